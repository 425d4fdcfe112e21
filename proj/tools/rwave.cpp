#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "rwave/io.hpp"
#include "rwave/plots.hpp"
#include "rwave/scenario.hpp"
#include "rwave/solver_fd.hpp"

namespace {

// exit codes: 0 all verdicts pass, 1 verdict/solver failure, 2 usage or IO
constexpr int kPass = 0, kFail = 1, kUsage = 2;

void print_verdicts(const std::vector<rwave::Verdict>& verdicts) {
  for (const rwave::Verdict& v : verdicts)
    std::printf("%s  %-22s value=%-14.6g bound=%.6g\n", v.pass ? "PASS" : "FAIL",
                v.name.c_str(), v.value, v.bound);
}

int usage_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the defocusing radial semilinear wave equation"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  int threads = 1;
  std::uint64_t seed = 0;
  app.add_option("--scenario", scenario_path, "scenario file (see scenarios/)");
  app.add_option("--out", out_dir, "output directory (overrides the scenario's)");
  app.add_option("--threads", threads, "worker threads for sweep cells")
      ->check(CLI::PositiveNumber);
  CLI::Option* seed_opt = app.add_option("--seed", seed, "override the scenario seed");

  CLI::App* cmd_run = app.add_subcommand("run", "evolve a scenario and write artifacts");
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "run a scenario and gate on its verdict suite");
  CLI::App* cmd_extract =
      app.add_subcommand("extract-radiation", "run a scenario and extract its radiation profile");
  CLI::App* cmd_invert =
      app.add_subcommand("invert-radiation", "materialize free-wave data from a profile");
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "expand the scenario's sweep axes");
  CLI::App* cmd_plot = app.add_subcommand("plot", "render plots for an artifact directory");
  for (CLI::App* sub : {cmd_run, cmd_verify, cmd_extract, cmd_invert, cmd_sweep, cmd_plot})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (cmd_plot->parsed()) {
      if (out_dir.empty()) return usage_error("plot needs --out ARTIFACT_DIR");
      rwave::PlotManifest m = rwave::emit_plots(out_dir);
      for (const std::string& f : m.files) std::printf("wrote %s\n", f.c_str());
      for (const std::string& n : m.notes) std::printf("note: %s\n", n.c_str());
      return kPass;
    }

    if (scenario_path.empty()) return usage_error("this subcommand needs --scenario FILE");
    rwave::Scenario scn = rwave::load_scenario(scenario_path);
    if (!out_dir.empty()) scn.out_dir = out_dir;
    if (seed_opt->count() > 0) {
      scn.seed = seed;
      scn.flat["seed"] = seed;  // so sweep cells inherit the override
    }

    if (cmd_sweep->parsed()) {
      nlohmann::ordered_json sweep = rwave::run_sweep(scn, threads);
      int ok = 0, failed = 0;
      for (const auto& row : sweep["rows"]) {
        bool good = row.value("status", "") == "ok" &&
                    row.value("verdicts_passed", 0) == row.value("verdicts_total", -1);
        (good ? ok : failed) += 1;
        std::printf("%s  %s%s%s\n", good ? "PASS" : "FAIL",
                    row.value("cell", std::string("?")).c_str(),
                    row.contains("message") ? " " : "",
                    row.value("message", std::string()).c_str());
      }
      std::printf("sweep: %d of %d cells clean; table at %s/sweep.csv\n", ok, ok + failed,
                  scn.out_dir.c_str());
      return failed == 0 ? kPass : kFail;
    }

    if (cmd_invert->parsed()) {
      if (scn.data.family != "from_radiation")
        return usage_error("invert-radiation needs a scenario with data.family = from_radiation");
      rwave::RadialGrid g = scn.make_scenario_grid();
      rwave::FieldState data = rwave::materialize(scn.data, g, scn.params, scn.seed);
      std::filesystem::path out = std::filesystem::path(scn.out_dir) / "inverted_data.csv";
      rwave::write_field_csv(out, g, data);
      nlohmann::ordered_json j;
      j["version"] = rwave::kVersion;
      j["file"] = "inverted_data.csv";
      j["energy"] = rwave::energy(data, g, scn.params);
      j["params"] = rwave::params_json(scn.params);
      rwave::write_json(std::filesystem::path(scn.out_dir) / "inverted_data.json", j);
      std::printf("wrote %s\n", out.string().c_str());
      return kPass;
    }

    if (cmd_extract->parsed()) {
      // rebuild through the validator with the extraction observable forced on
      auto flat = scn.flat;
      flat["diagnostics.observables"] = nlohmann::json::array({"energy", "radiation"});
      flat["output.dir"] = scn.out_dir;
      scn = rwave::scenario_from_flat(flat, scenario_path);
    }

    rwave::RunResult rr = rwave::run_scenario(scn, /*write_snapshots=*/!cmd_extract->parsed());
    if (rr.diverged) {
      const auto& dv = rr.summary["divergence"];
      std::fprintf(stderr, "solver diverged at t=%g (node %d, value %g); see %s/summary.json\n",
                   dv["t"].get<double>(), dv["node"].get<int>(), dv["value"].get<double>(),
                   scn.out_dir.c_str());
      return kFail;
    }
    print_verdicts(rr.verdicts);
    if (cmd_extract->parsed())
      std::printf("radiation profile at %s/radiation.csv\n", scn.out_dir.c_str());
    else
      std::printf("artifacts at %s (summary.json, diagnostics.csv)\n", scn.out_dir.c_str());
    return rr.all_pass() ? kPass : kFail;
  } catch (const rwave::DivergenceError& e) {
    std::fprintf(stderr, "solver diverged: %s\n", e.what());
    return kFail;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}
