#include "rwave/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "rwave/io.hpp"
#include "rwave/radiation.hpp"
#include "rwave/rng.hpp"
#include "rwave/solver_char.hpp"

namespace rwave {
namespace {

const std::set<std::string> kSections = {"model",       "grid",   "evolution", "data",
                                         "diagnostics", "output", "sweep"};

const std::set<std::string> kKeys = {
    "name",
    "seed",
    "model.d",
    "model.p",
    "model.zeta",
    "grid.r_max",
    "grid.h",
    "evolution.t_end",
    "evolution.cfl",
    "evolution.snapshot_stride",
    "evolution.solver",
    "data.family",
    "data.amplitude",
    "data.width",
    "data.r_in",
    "data.r_out",
    "data.epsilon",
    "data.profile",
    "data.t_match",
    "data.bumps",
    "diagnostics.observables",
    "diagnostics.eta",
    "diagnostics.R",
    "diagnostics.eta_min",
    "diagnostics.eta_max",
    "diagnostics.spacing",
    "diagnostics.t_match",
    "diagnostics.c",
    "diagnostics.kappa",
    "diagnostics.gamma",
    "diagnostics.band_R",
    "output.dir",
    "output.snapshots",
};

const std::set<std::string> kObservables = {"energy",    "flux",     "cone",  "morawetz",
                                            "potential", "pointwise", "radiation", "deficit",
                                            "decay",     "band",     "distribution"};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& source, const std::string& msg) {
  throw std::runtime_error(source + ": " + msg);
}

// Typed views into the flat key-value map, with unknown-key detection.
class Reader {
 public:
  Reader(const std::map<std::string, nlohmann::json>& kv, std::string source)
      : kv_(kv), source_(std::move(source)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  double num(const std::string& key, double fallback) {
    const nlohmann::json* v = fetch(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(source_, key + " must be a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const nlohmann::json* v = fetch(key);
    if (!v) return fallback;
    if (!v->is_number_integer() && !v->is_number_unsigned())
      fail(source_, key + " must be an integer");
    return v->get<int>();
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) {
    const nlohmann::json* v = fetch(key);
    if (!v) return fallback;
    if (!v->is_number_integer() && !v->is_number_unsigned())
      fail(source_, key + " must be an integer");
    return v->get<std::uint64_t>();
  }

  std::string str(const std::string& key, const std::string& fallback) {
    const nlohmann::json* v = fetch(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(source_, key + " must be a string");
    return v->get<std::string>();
  }

  std::vector<std::string> strings(const std::string& key) {
    const nlohmann::json* v = fetch(key);
    std::vector<std::string> out;
    if (!v) return out;
    if (v->is_string()) {
      out.push_back(v->get<std::string>());
      return out;
    }
    if (!v->is_array()) fail(source_, key + " must be a list of strings");
    for (const auto& item : *v) {
      if (!item.is_string()) fail(source_, key + " must be a list of strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  }

  void check_all_used() const {
    for (const auto& [key, value] : kv_) {
      if (key.rfind("sweep.", 0) == 0) continue;
      if (!used_.count(key)) fail(source_, "unknown key '" + key + "'");
    }
  }

 private:
  const nlohmann::json* fetch(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  const std::map<std::string, nlohmann::json>& kv_;
  std::string source_;
  std::set<std::string> used_;
};

bool wants(const Scenario& scn, const std::string& obs) {
  return std::find(scn.diag.observables.begin(), scn.diag.observables.end(), obs) !=
         scn.diag.observables.end();
}

double resolved_t_match(const Scenario& scn) {
  if (scn.diag.t_match > 0.0) return scn.diag.t_match;
  return 0.3 * scn.config.t_end;
}

void validate_scenario(const Scenario& scn, const std::string& source) {
  if (auto msg = validate(scn.params)) fail(source, *msg);

  if (!(scn.r_max > 0.0) || !(scn.h > 0.0)) fail(source, "grid: need r_max > 0 and h > 0");
  double cells = scn.r_max / scn.h;
  if (std::abs(cells - std::lround(cells)) > 1e-6 * std::max(1.0, cells))
    fail(source, "grid: r_max must be a multiple of h");
  if (std::lround(cells) < 16) fail(source, "grid: need at least 16 cells");

  if (!(scn.config.t_end > 0.0)) fail(source, "evolution: t_end must be positive");
  if (!(scn.config.cfl > 0.0) || scn.config.cfl > 1.0)
    fail(source, "evolution: cfl must lie in (0, 1]");
  if (scn.config.snapshot_stride < 1) fail(source, "evolution: snapshot_stride must be >= 1");
  if (scn.solver != "fd" && scn.solver != "char")
    fail(source, "evolution: solver must be 'fd' or 'char'");
  if (scn.solver == "char") {
    double steps = scn.config.t_end / scn.h;
    if (std::abs(steps - std::lround(steps)) > 1e-6 * std::max(1.0, steps))
      fail(source, "evolution: characteristic runs need t_end to be a multiple of h");
  }
  if (scn.snapshot_csvs != 0 && scn.snapshot_csvs < 2)
    fail(source, "output: snapshots must be 0 or >= 2");

  const DataSpec& data = scn.data;
  const std::set<std::string> families = {"gaussian", "compact_bump", "power_tail",
                                          "from_radiation", "random_smooth"};
  if (!families.count(data.family)) fail(source, "data: unknown family '" + data.family + "'");
  if (!std::isfinite(data.amplitude)) fail(source, "data: amplitude must be finite");
  if (data.family == "gaussian" && !(data.width > 0.0))
    fail(source, "data: gaussian width must be positive");
  if (data.family == "compact_bump" && !(data.r_in >= 0.0 && data.r_in < data.r_out))
    fail(source, "data: compact_bump needs 0 <= r_in < r_out");
  if (data.family == "power_tail" && !(data.epsilon > 0.0))
    fail(source, "data: power_tail epsilon must be positive");
  if (data.family == "from_radiation" && data.profile.empty())
    fail(source, "data: from_radiation needs a profile path");
  if (data.family == "random_smooth" && data.bumps < 1)
    fail(source, "data: random_smooth needs at least one bump");

  for (const std::string& obs : scn.diag.observables)
    if (!kObservables.count(obs)) fail(source, "diagnostics: unknown observable '" + obs + "'");
  if (wants(scn, "deficit") && wants(scn, "distribution"))
    fail(source, "diagnostics: deficit and distribution need different time windows");

  // enlarged-domain contract: the outer boundary must stay causally
  // disconnected from the data support for the whole run
  double sr = support_radius(data);
  if (sr >= 0.0) {
    double needed = sr + scn.config.t_end + 2.0;
    if (scn.r_max < needed - 1e-9) {
      std::ostringstream msg;
      msg << "grid: domain contract violated, need r_max >= " << needed
          << " (data support " << sr << " + t_end + 2)";
      fail(source, msg.str());
    }
  }

  const DiagnosticsSpec& dg = scn.diag;
  if (wants(scn, "radiation") || wants(scn, "deficit")) {
    if (!(dg.eta_min < dg.eta_max)) fail(source, "diagnostics: need eta_min < eta_max");
    if (0.9 * scn.config.t_end - dg.eta_max < 1.0)
      fail(source, "diagnostics: eta_max too close to the extraction times");
    double needed = scn.config.t_end - dg.eta_min;
    if (scn.r_max < needed - 1e-9) {
      std::ostringstream msg;
      msg << "grid: radiation extraction needs r_max >= " << needed << " (t_end - eta_min)";
      fail(source, msg.str());
    }
  }
  if (wants(scn, "deficit")) {
    double tm = resolved_t_match(scn);
    double needed = 2.0 * tm + std::max(std::abs(dg.eta_min), std::abs(dg.eta_max)) + 2.0;
    if (scn.r_max < needed - 1e-9) {
      std::ostringstream msg;
      msg << "grid: free-wave inversion needs r_max >= " << needed
          << " (2 t_match + max|eta| + 2)";
      fail(source, msg.str());
    }
  }
  if (wants(scn, "morawetz") || wants(scn, "distribution")) {
    if (!(dg.R > 0.0) || dg.R >= scn.r_max)
      fail(source, "diagnostics: R must lie in (0, r_max)");
  }
  if ((wants(scn, "morawetz") || wants(scn, "potential")) && scn.params.zeta != -1)
    fail(source, "diagnostics: morawetz/potential need a defocusing run");
  if (wants(scn, "decay")) {
    if (!(dg.kappa > 0.0 && dg.kappa < 1.0)) fail(source, "diagnostics: kappa outside (0, 1)");
    if (!(dg.c > 0.0)) fail(source, "diagnostics: c must be positive");
  }
  if (wants(scn, "band")) {
    DerivedConstants k = derive(scn.params);
    if (dg.gamma < 0.0 || dg.gamma > 2.0 * k.beta + 1e-12)
      fail(source, "diagnostics: gamma outside [0, 2 beta]");
    if (!(dg.c > 0.0)) fail(source, "diagnostics: c must be positive");
  }
}

}  // namespace

double support_radius(const DataSpec& data) {
  if (data.family == "gaussian") return 6.0 * data.width;  // below double precision beyond
  if (data.family == "compact_bump") return data.r_out;
  if (data.family == "random_smooth") return 5.0 + 6.0 * 1.5;  // centers <= 5, widths <= 1.5
  return -1.0;  // power_tail, from_radiation: unbounded
}

Scenario scenario_from_flat(const std::map<std::string, nlohmann::json>& flat,
                            const std::string& source) {
  Reader rd(flat, source);
  Scenario scn;
  scn.flat = flat;
  scn.name = rd.str("name", "scenario");
  scn.seed = rd.uinteger("seed", 1);

  scn.params.d = rd.integer("model.d", 3);
  scn.params.p = rd.num("model.p", 3.0);
  scn.params.zeta = rd.integer("model.zeta", -1);

  scn.r_max = rd.num("grid.r_max", 40.0);
  scn.h = rd.num("grid.h", 0.02);

  scn.config.t_end = rd.num("evolution.t_end", 1.0);
  scn.config.cfl = rd.num("evolution.cfl", 0.25);
  scn.config.snapshot_stride = rd.integer("evolution.snapshot_stride", 1);
  scn.solver = rd.str("evolution.solver", "fd");

  scn.data.family = rd.str("data.family", "gaussian");
  scn.data.amplitude = rd.num("data.amplitude", 1.0);
  scn.data.width = rd.num("data.width", 1.0);
  scn.data.r_in = rd.num("data.r_in", 1.0);
  scn.data.r_out = rd.num("data.r_out", 3.0);
  scn.data.epsilon = rd.num("data.epsilon", 0.01);
  scn.data.profile = rd.str("data.profile", "");
  scn.data.t_match = rd.num("data.t_match", 0.0);
  scn.data.bumps = rd.integer("data.bumps", 5);

  scn.diag.observables = rd.strings("diagnostics.observables");
  if (scn.diag.observables.empty()) scn.diag.observables = {"energy"};
  scn.diag.eta = rd.num("diagnostics.eta", 0.0);
  scn.diag.R = rd.num("diagnostics.R", 1.0);
  scn.diag.eta_min = rd.num("diagnostics.eta_min", -8.0);
  scn.diag.eta_max = rd.num("diagnostics.eta_max", 8.0);
  scn.diag.spacing = rd.num("diagnostics.spacing", 0.0);
  scn.diag.t_match = rd.num("diagnostics.t_match", 0.0);
  scn.diag.c = rd.num("diagnostics.c", 1.0);
  scn.diag.kappa = rd.num("diagnostics.kappa", 0.5);
  scn.diag.gamma = rd.num("diagnostics.gamma", 0.0);
  scn.diag.band_R = rd.num("diagnostics.band_R", 1.0);

  scn.out_dir = rd.str("output.dir", "out");
  scn.snapshot_csvs = rd.integer("output.snapshots", 9);

  rd.check_all_used();

  // sweep axes: each value must be a list over a known scalar key
  for (const auto& [key, value] : flat) {
    if (key.rfind("sweep.", 0) != 0) continue;
    std::string target = key.substr(6);
    if (!kKeys.count(target)) fail(source, "sweep: unknown axis '" + target + "'");
    if (!value.is_array() || value.empty())
      fail(source, "sweep: axis '" + target + "' must be a non-empty list");
    scn.sweep_axes[target] = std::vector<nlohmann::json>(value.begin(), value.end());
  }

  validate_scenario(scn, source);
  return scn;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());

  std::map<std::string, nlohmann::json> flat;
  std::string line, section;
  int line_no = 0;
  auto where = [&] {
    std::ostringstream s;
    s << path.string() << ":" << line_no;
    return s.str();
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(where(), "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (!kSections.count(section)) fail(where(), "unknown section [" + section + "]");
      continue;
    }
    size_t eq = text.find('=');
    if (eq == std::string::npos) fail(where(), "expected key = value");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty()) fail(where(), "empty key");
    if (value.empty()) fail(where(), "empty value for '" + key + "'");
    std::string full = section.empty() ? key : section + "." + key;
    if (flat.count(full)) fail(where(), "duplicate key '" + full + "'");
    nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // bare words are strings
    flat[full] = parsed;
  }
  return scenario_from_flat(flat, path.string());
}

FieldState materialize(const DataSpec& data, const RadialGrid& g, const ModelParams& mp,
                       std::uint64_t seed) {
  FieldState out;
  out.t = 0.0;
  out.u = Eigen::ArrayXd::Zero(g.size());
  out.ut = Eigen::ArrayXd::Zero(g.size());

  if (data.family == "gaussian") {
    out.u = data.amplitude * (-(g.r / data.width).square()).exp();
  } else if (data.family == "compact_bump") {
    double mid = 0.5 * (data.r_in + data.r_out);
    double half = 0.5 * (data.r_out - data.r_in);
    for (int j = 0; j < g.size(); ++j) {
      double s = (g.r[j] - mid) / half;
      if (std::abs(s) < 1.0) {
        double b = 1.0 - s * s;
        out.u[j] = data.amplitude * b * b * b * b;
      }
    }
  } else if (data.family == "power_tail") {
    double a = 2.0 * (mp.p + mp.d + 1.0) / ((mp.p + 1.0) * (mp.p + 1.0)) + data.epsilon;
    for (int j = 0; j < g.size(); ++j) {
      double r = g.r[j];
      if (r <= 1.0) {
        out.u[j] = 1.0;
      } else if (r >= 2.0) {
        out.u[j] = std::pow(r, -a);
      } else {
        double x = r - 1.0;  // quintic smoothstep keeps the glue C^2
        double s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
        out.u[j] = (1.0 - s) + s * std::pow(r, -a);
      }
    }
    out.u *= data.amplitude;
  } else if (data.family == "from_radiation") {
    RadiationProfile prof = read_radiation_csv(data.profile);
    double eta_abs = std::max(std::abs(prof.eta[0]), std::abs(prof.eta[prof.eta.size() - 1]));
    double tm = data.t_match > 0.0 ? data.t_match : 50.0 * std::max(1.0, eta_abs);
    return invert_radiation(prof, tm, g, mp);
  } else if (data.family == "random_smooth") {
    for (int i = 0; i < data.bumps; ++i) {
      double amp = uniform_in(seed, 3 * i, -1.0, 1.0);
      double center = uniform_in(seed, 3 * i + 1, 0.0, 5.0);
      double width = uniform_in(seed, 3 * i + 2, 0.3, 1.5);
      // even-symmetrized so u extends smoothly through the origin
      out.u += amp * ((-((g.r - center) / width).square()).exp() +
                      (-((g.r + center) / width).square()).exp());
    }
    out.u *= data.amplitude;
  } else {
    throw std::invalid_argument("unknown data family '" + data.family + "'");
  }
  return out;
}

namespace {

Trajectory to_field_trajectory(const ReducedTrajectory& rt, const EvolutionConfig& cfg) {
  Trajectory out;
  out.params = rt.params;
  out.grid = rt.grid;
  out.config = cfg;
  out.states.reserve(rt.states.size());
  for (const ReducedState& s : rt.states) out.states.push_back(from_reduced(s, rt.grid, rt.params));
  return out;
}

void fill_series(std::vector<DiagnosticsRecord>& recs, const std::vector<double>& times,
                 const Series& series, double DiagnosticsRecord::*member) {
  size_t i = 0;
  for (size_t k = 0; k < recs.size(); ++k) {
    while (i < series.size() && series[i].first < times[k] - 1e-9) ++i;
    if (i < series.size() && std::abs(series[i].first - times[k]) <= 1e-9)
      recs[k].*member = series[i].second;
  }
}

double max_increment_after(const Series& s, double t_from) {
  double worst = 0.0;
  for (size_t k = 0; k + 1 < s.size(); ++k)
    if (s[k].first >= t_from) worst = std::max(worst, s[k + 1].second - s[k].second);
  return worst;
}

double ratio_or(double num, double den, double if_zero) {
  if (den == 0.0) return num == 0.0 ? if_zero : std::numeric_limits<double>::infinity();
  return num / den;
}

nlohmann::ordered_json verdict_json(const std::vector<Verdict>& verdicts) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Verdict& v : verdicts)
    arr.push_back({{"name", v.name}, {"pass", v.pass}, {"value", v.value}, {"bound", v.bound}});
  return arr;
}

}  // namespace

bool RunResult::all_pass() const {
  if (diverged) return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

RunResult run_scenario(const Scenario& scn, bool write_snapshots) {
  const Tolerances tol;
  RadialGrid g = scn.make_scenario_grid();
  DerivedConstants kc = derive(scn.params);
  FieldState init = materialize(scn.data, g, scn.params, scn.seed);

  RunResult res;
  res.dir = scn.out_dir;

  nlohmann::ordered_json& summary = res.summary;
  summary["version"] = kVersion;
  summary["name"] = scn.name;
  summary["params"] = {{"d", scn.params.d}, {"p", scn.params.p}, {"zeta", scn.params.zeta}};
  summary["constants"] = params_json(scn.params)["constants"];
  summary["grid"] = grid_json(g);
  summary["evolution"] = {{"t_end", scn.config.t_end},
                          {"cfl", scn.config.cfl},
                          {"snapshot_stride", scn.config.snapshot_stride},
                          {"solver", scn.solver}};
  summary["seed"] = scn.seed;

  Trajectory traj;
  ReducedTrajectory rtraj;  // kept only for char runs (native extraction + CSV)
  bool is_char = scn.solver == "char";
  try {
    if (is_char) {
      ReducedState r0 = to_reduced(init, g, scn.params);
      rtraj = evolve_reduced(r0, scn.config.t_end, scn.config.snapshot_stride, g, scn.params);
      traj = to_field_trajectory(rtraj, scn.config);
    } else {
      traj = evolve(init, scn.config, g, scn.params);
    }
    if (wants(scn, "distribution")) {
      EvolutionConfig back_cfg = scn.config;
      back_cfg.t_end = -scn.config.t_end;
      Trajectory back = evolve_backward(init, back_cfg, g, scn.params);
      traj = merge_trajectories(back, traj);
    }
  } catch (const DivergenceError& e) {
    summary["status"] = "diverged";
    summary["divergence"] = {{"t", e.t}, {"node", e.node}, {"value", e.value}};
    write_json(res.dir / "summary.json", summary);
    res.diverged = true;
    return res;
  }

  size_t S = traj.states.size();
  std::vector<double> times(S);
  for (size_t k = 0; k < S; ++k) times[k] = traj.states[k].t;

  std::vector<DiagnosticsRecord> recs(S);
  for (size_t k = 0; k < S; ++k) recs[k].t = times[k];

  // energy is always on
  double e0 = 0.0, e_last = 0.0, drift = 0.0;
  for (size_t k = 0; k < S; ++k) {
    double e = energy(traj.states[k], g, scn.params);
    recs[k].e_total = e;
    if (k == 0) e0 = e;
    e_last = e;
    drift = std::max(drift, std::abs(e - e0));
  }
  double drift_rel = ratio_or(drift, e0, 0.0);
  summary["energy"] = {{"initial", e0}, {"final", e_last}, {"drift_rel", drift_rel}};
  res.verdicts.push_back({"energy-drift", drift_rel <= tol.drift_rel, drift_rel, tol.drift_rel});

  nlohmann::ordered_json obs;

  if (wants(scn, "flux") || wants(scn, "cone")) {
    ConeSeries cs = cone_series(traj, scn.diag.eta);
    fill_series(recs, times, cs.interior_energy, &DiagnosticsRecord::e_interior);
    if (!cs.interior_energy.empty()) {
      Series residual;
      double base = cs.interior_energy.front().second;
      for (size_t k = 0; k < cs.interior_energy.size(); ++k)
        residual.emplace_back(cs.interior_energy[k].first,
                              cs.interior_energy[k].second - base - cs.cumulative_flux[k].second);
      fill_series(recs, times, residual, &DiagnosticsRecord::flux_residual);
      double res_rel = ratio_or(std::abs(residual.back().second), e0, 0.0);
      obs["flux"] = {{"residual", residual.back().second}, {"residual_rel", res_rel}};
      if (wants(scn, "flux"))
        res.verdicts.push_back(
            {"flux-balance", res_rel <= tol.flux_residual_rel, res_rel, tol.flux_residual_rel});
    }
    if (wants(scn, "cone")) {
      double worst = cone_monotonicity(traj, scn.diag.eta);
      double back = backward_cone_monotonicity(traj, traj.states.back().t);
      ConeSurfaceBounds bounds = cone_surface_bounds(traj, scn.diag.eta);
      obs["cone"] = {{"worst_increment", worst},
                     {"backward_worst", back},
                     {"flux_total", bounds.flux_total},
                     {"hardy_term", bounds.hardy_term}};
      res.verdicts.push_back(
          {"cone-monotone", worst >= -tol.cone_slack * e0, worst, -tol.cone_slack * e0});
      const double back_tol =
          (tol.cone_slack + tol.backward_cone_coeff * std::pow(scn.h, 3)) * e0;
      res.verdicts.push_back({"cone-backward", back <= back_tol, back, back_tol});
      res.verdicts.push_back({"cone-flux-bound", bounds.flux_within(tol), bounds.flux_total,
                              e0 * (1.0 + tol.inequality_slack)});
    }
  }

  if (wants(scn, "morawetz")) {
    MorawetzSeries ms = morawetz_series(traj, scn.diag.R);
    fill_series(recs, times, ms.interior, &DiagnosticsRecord::morawetz_interior);
    fill_series(recs, times, ms.sphere, &DiagnosticsRecord::morawetz_sphere);
    fill_series(recs, times, ms.exterior, &DiagnosticsRecord::morawetz_exterior);
    MorawetzReport report = {ms.interior.back().second, ms.sphere.back().second,
                             ms.exterior.back().second, ms.total_energy};
    double ratio = ratio_or(report.sum(), 2.0 * e0, 0.0);
    obs["morawetz"] = {{"interior", report.interior},
                       {"sphere", report.sphere},
                       {"exterior", report.exterior},
                       {"sum_over_2E", ratio}};
    res.verdicts.push_back({"morawetz-bound", report.within(tol), report.sum(),
                            2.0 * e0 * (1.0 + tol.inequality_slack)});
    double min_part = std::min({report.interior, report.sphere, report.exterior});
    res.verdicts.push_back({"morawetz-signs", min_part >= 0.0, min_part, 0.0});
  }

  if (wants(scn, "potential")) {
    Series pot = potential_series(traj);
    fill_series(recs, times, pot, &DiagnosticsRecord::potential);
    double initial = pot.front().second;
    double min_late = std::numeric_limits<double>::infinity();
    double t_cut = times.front() + 2.0 / 3.0 * (times.back() - times.front());
    for (const auto& [t, v] : pot)
      if (t >= t_cut) min_late = std::min(min_late, v);
    double ratio = ratio_or(min_late, initial, 0.0);
    obs["potential"] = {{"initial", initial}, {"min_last_third", min_late}, {"ratio", ratio}};
    res.verdicts.push_back(
        {"potential-liminf", ratio <= tol.potential_min_frac, ratio, tol.potential_min_frac});
  }

  if (wants(scn, "pointwise")) {
    double max1 = 0.0, max2 = 0.0, b1 = 0.0, b2 = 0.0;
    for (size_t k = 0; k < S; ++k) {
      PointwiseRatios pr = pointwise_ratio(traj.states[k], g, scn.params);
      recs[k].pointwise_ratio1 = pr.ratio1_max;
      recs[k].pointwise_ratio2 = pr.ratio2_max;
      max1 = std::max(max1, pr.ratio1_max);
      max2 = std::max(max2, pr.ratio2_max);
      b1 = pr.bound1;
      b2 = pr.bound2;
    }
    obs["pointwise"] = {{"max1", max1}, {"bound1", b1}, {"max2", max2}, {"bound2", b2}};
    res.verdicts.push_back(
        {"pointwise-1", max1 <= b1 * (1.0 + tol.inequality_slack), max1, b1});
    res.verdicts.push_back(
        {"pointwise-2", max2 <= b2 * (1.0 + tol.inequality_slack), max2, b2});
  }

  RadiationProfile prof;
  bool have_prof = false;
  if (wants(scn, "radiation") || wants(scn, "deficit")) {
    double spacing = scn.diag.spacing > 0.0 ? scn.diag.spacing : g.h;
    Eigen::ArrayXd eta = uniform_eta_grid(scn.diag.eta_min, scn.diag.eta_max, spacing);
    double t_last = times.back();
    size_t prev_idx = 0;
    double target = times.front() + 0.9 * (t_last - times.front());
    for (size_t k = 0; k < S; ++k)
      if (std::abs(times[k] - target) < std::abs(times[prev_idx] - target)) prev_idx = k;
    if (prev_idx + 1 >= S) prev_idx = S - 2;
    double t_prev = times[prev_idx];

    ReducedTrajectory extraction;
    if (is_char) {
      extraction = rtraj;
    } else {
      extraction.params = scn.params;
      extraction.grid = g;
      extraction.states.push_back(to_reduced(traj.states[prev_idx], g, scn.params));
      extraction.states.push_back(to_reduced(traj.states.back(), g, scn.params));
    }
    prof = extract_radiation(extraction, eta, {t_prev, t_last}, scn.params);
    have_prof = true;

    double norm_sq = prof.norm_sq();
    double energy_ratio = ratio_or(kc.c_d * norm_sq, e0, 0.0);
    obs["radiation"] = {{"norm_sq", norm_sq},
                        {"energy_ratio", energy_ratio},
                        {"t_extract", prof.t_extract},
                        {"max_quality", prof.quality.size() ? prof.quality.maxCoeff() : 0.0}};
    res.verdicts.push_back({"radiation-energy-bound",
                            energy_ratio <= 1.0 + tol.inequality_slack, energy_ratio,
                            1.0 + tol.inequality_slack});
  }

  if (wants(scn, "deficit")) {
    double tm = resolved_t_match(scn);
    FieldState free0 = invert_radiation(prof, tm, g, scn.params);
    ModelParams lin = scn.params;
    lin.zeta = 0;
    Trajectory free_traj = evolve(free0, scn.config, g, lin);
    Series ext = exterior_deficit(traj, free_traj, scn.diag.eta);
    FullDeficit full = full_deficit(traj, free_traj, prof);
    fill_series(recs, times, ext, &DiagnosticsRecord::exterior_deficit);
    fill_series(recs, times, full.series, &DiagnosticsRecord::full_deficit);

    size_t ref = 0;
    while (ref + 1 < ext.size() && ext[ref].first < 0.1 * times.back()) ++ref;
    double ext_ratio = ratio_or(ext.back().second, ext[ref].second, 0.0);
    double full_ratio = ratio_or(full.series.back().second, full.series.front().second, 0.0);
    double gap_rel = ratio_or(full.energy_gap, e0, 0.0);
    double bump = max_increment_after(ext, 0.5 * times.back());
    obs["deficit"] = {{"t_match", tm},
                      {"exterior_ref_t", ext[ref].first},
                      {"exterior_ref", ext[ref].second},
                      {"exterior_final", ext.back().second},
                      {"exterior_ratio", ext_ratio},
                      {"full_initial", full.series.front().second},
                      {"full_final", full.series.back().second},
                      {"full_ratio", full_ratio},
                      {"energy_gap", full.energy_gap},
                      {"energy_gap_rel", gap_rel}};
    res.verdicts.push_back({"exterior-deficit", ext_ratio <= tol.exterior_deficit_frac,
                            ext_ratio, tol.exterior_deficit_frac});
    res.verdicts.push_back({"deficit-monotone", bump <= tol.deficit_monotone_slack * e0, bump,
                            tol.deficit_monotone_slack * e0});
    res.verdicts.push_back(
        {"full-deficit", full_ratio <= tol.full_deficit_frac, full_ratio, tol.full_deficit_frac});
    res.verdicts.push_back({"energy-gap-sign", full.energy_gap >= -tol.inequality_slack * e0,
                            full.energy_gap, -tol.inequality_slack * e0});
    res.verdicts.push_back(
        {"energy-gap", gap_rel <= tol.energy_gap_frac, gap_rel, tol.energy_gap_frac});
  }

  if (wants(scn, "decay")) {
    Series dec = interior_decay(traj, scn.diag.c, scn.diag.kappa);
    fill_series(recs, times, dec, &DiagnosticsRecord::e_interior);
    try {
      DecayFit fit = fit_decay(dec, 0.2 * times.back(), times.back());
      obs["decay"] = {{"exponent", fit.exponent}, {"intercept", fit.intercept},
                      {"r2", fit.r2},             {"t_lo", fit.t_lo},
                      {"t_hi", fit.t_hi},         {"samples", fit.samples}};
      bool pass = fit.exponent < 0.0 && fit.r2 >= 0.8;
      res.verdicts.push_back({"interior-decay", pass, fit.exponent, 0.0});
    } catch (const std::invalid_argument& e) {
      obs["decay"] = {{"note", e.what()}};
    }
  }

  if (wants(scn, "band")) {
    if (!have_prof)
      throw std::runtime_error(scn.name + ": band observable needs radiation requested too");
    Series band = middle_band_deficit(traj, prof, scn.diag.c, scn.diag.gamma, scn.diag.band_R);
    if (!band.empty()) {
      double initial = band.front().second;
      double late = 0.0;
      double t_cut = times.front() + 2.0 / 3.0 * (times.back() - times.front());
      for (const auto& [t, v] : band)
        if (t >= t_cut) late = std::max(late, v);
      double ratio = ratio_or(late, initial, 0.0);
      obs["band"] = {{"initial", initial}, {"late_max", late}, {"ratio", ratio}};
      res.verdicts.push_back(
          {"band-deficit", ratio <= tol.potential_min_frac, ratio, tol.potential_min_frac});
    }
  }

  if (wants(scn, "distribution")) {
    EnergyDistribution dist = energy_distribution_check(traj, scn.diag.R);
    obs["distribution"] = {{"lhs", dist.lhs}, {"rhs", dist.rhs}};
    res.verdicts.push_back({"distribution",
                            dist.lhs <= dist.rhs + tol.distribution_slack * e0, dist.lhs,
                            dist.rhs + tol.distribution_slack * e0});
  }

  summary["status"] = "ok";
  summary["observables"] = obs;
  summary["verdicts"] = verdict_json(res.verdicts);

  // artifacts
  nlohmann::ordered_json index;
  index["version"] = kVersion;
  index["name"] = scn.name;
  index["solver"] = scn.solver;
  index["params"] = params_json(scn.params);
  index["grid"] = grid_json(g);
  index["config"] = summary["evolution"];
  index["seed"] = scn.seed;
  index["times"] = times;
  nlohmann::ordered_json files;
  files["diagnostics"] = "diagnostics.csv";
  files["summary"] = "summary.json";

  if (write_snapshots && scn.snapshot_csvs >= 2 && S >= 2) {
    size_t m = std::min<size_t>(scn.snapshot_csvs, S);
    nlohmann::ordered_json snaps = nlohmann::ordered_json::array();
    size_t last_idx = static_cast<size_t>(-1);
    for (size_t j = 0; j < m; ++j) {
      size_t idx = (j * (S - 1)) / (m - 1);
      if (idx == last_idx) continue;
      last_idx = idx;
      char name[32];
      std::snprintf(name, sizeof name, "snapshots/snap-%06zu.csv", idx);
      write_field_csv(res.dir / name, g, traj.states[idx]);
      snaps.push_back({{"t", times[idx]}, {"file", name}});
    }
    files["snapshots"] = snaps;
  }
  if (is_char && !rtraj.states.empty()) {
    write_reduced_csv(res.dir / "reduced_final.csv", g, rtraj.states.back());
    files["reduced_final"] = "reduced_final.csv";
  }
  if (have_prof) {
    write_radiation_csv(res.dir / "radiation.csv", prof);
    nlohmann::ordered_json rj;
    rj["t_extract"] = prof.t_extract;
    rj["eta_min"] = prof.eta[0];
    rj["eta_max"] = prof.eta[prof.eta.size() - 1];
    rj["spacing"] = prof.deta();
    rj["count"] = prof.eta.size();
    rj["norm_sq"] = prof.norm_sq();
    rj["params"] = params_json(scn.params);
    write_json(res.dir / "radiation.json", rj);
    files["radiation"] = "radiation.csv";
  }
  index["files"] = files;

  write_diagnostics_csv(res.dir / "diagnostics.csv", recs);
  write_json(res.dir / "index.json", index);
  write_json(res.dir / "summary.json", summary);
  write_json(res.dir / "verdicts.json", verdict_json(res.verdicts));
  return res;
}

nlohmann::ordered_json run_sweep(const Scenario& base, int threads) {
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes(
      base.sweep_axes.begin(), base.sweep_axes.end());
  size_t total = 1;
  for (const auto& [key, values] : axes) total *= values.size();
  if (axes.empty()) total = 1;

  struct Cell {
    std::map<std::string, nlohmann::json> values;
    nlohmann::ordered_json row;
  };
  std::vector<Cell> cells(total);

  for (size_t i = 0; i < total; ++i) {
    size_t rest = i;
    for (size_t a = axes.size(); a-- > 0;) {
      const auto& [key, values] = axes[a];
      cells[i].values[key] = values[rest % values.size()];
      rest /= values.size();
    }
  }

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < total;) {
      Cell& cell = cells[i];
      char tag[32];
      std::snprintf(tag, sizeof tag, "cell-%03zu", i);

      nlohmann::ordered_json row;
      row["cell"] = tag;
      for (const auto& [key, value] : cell.values) row[key] = value;
      try {
        std::map<std::string, nlohmann::json> flat = base.flat;
        for (auto it = flat.begin(); it != flat.end();)
          it = it->first.rfind("sweep.", 0) == 0 ? flat.erase(it) : std::next(it);
        for (const auto& [key, value] : cell.values) flat[key] = value;
        flat["name"] = base.name + "-" + tag;
        flat["output.dir"] = (std::filesystem::path(base.out_dir) / tag).string();
        Scenario scn = scenario_from_flat(flat, base.name + "/" + tag);
        RunResult rr = run_scenario(scn);
        row["status"] = rr.diverged ? "diverged" : "ok";
        row["energy_initial"] = rr.summary.contains("energy")
                                    ? rr.summary["energy"]["initial"]
                                    : nlohmann::ordered_json();
        if (rr.summary.contains("energy")) row["drift_rel"] = rr.summary["energy"]["drift_rel"];
        if (rr.summary.contains("observables") &&
            rr.summary["observables"].contains("flux"))
          row["flux_residual_rel"] = rr.summary["observables"]["flux"]["residual_rel"];
        if (rr.summary.contains("observables") &&
            rr.summary["observables"].contains("decay") &&
            rr.summary["observables"]["decay"].contains("exponent"))
          row["decay_exponent"] = rr.summary["observables"]["decay"]["exponent"];
        int passed = 0;
        for (const Verdict& v : rr.verdicts) passed += v.pass ? 1 : 0;
        row["verdicts_passed"] = passed;
        row["verdicts_total"] = rr.verdicts.size();
      } catch (const std::exception& e) {
        row["status"] = "error";
        row["message"] = e.what();
      }
      cell.row = std::move(row);
    }
  };

  int nworkers = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  if (nworkers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  nlohmann::ordered_json sweep;
  sweep["version"] = kVersion;
  sweep["name"] = base.name;
  nlohmann::ordered_json ax;
  for (const auto& [key, values] : axes) ax[key] = values;
  sweep["axes"] = ax;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const Cell& cell : cells) rows.push_back(cell.row);
  sweep["rows"] = rows;

  // refinement orders when the sweep is a pure h-axis
  if (axes.size() == 1 && axes[0].first == "grid.h") {
    auto orders_of = [&](const char* metric) {
      nlohmann::ordered_json orders = nlohmann::ordered_json::array();
      for (size_t i = 0; i + 1 < cells.size(); ++i) {
        const auto& a = cells[i].row;
        const auto& b = cells[i + 1].row;
        if (a.value("status", "") != "ok" || b.value("status", "") != "ok") continue;
        if (!a.contains(metric) || !b.contains(metric)) continue;
        double va = a[metric].get<double>(), vb = b[metric].get<double>();
        double ha = a["grid.h"].get<double>(), hb = b["grid.h"].get<double>();
        if (va > 0.0 && vb > 0.0 && ha != hb)
          orders.push_back(std::log(va / vb) / std::log(ha / hb));
      }
      return orders;
    };
    nlohmann::ordered_json orders;
    orders["drift_rel"] = orders_of("drift_rel");
    orders["flux_residual_rel"] = orders_of("flux_residual_rel");
    sweep["orders"] = orders;
  }

  write_json(std::filesystem::path(base.out_dir) / "sweep.json", sweep);

  // flat CSV companion
  std::set<std::string> columns = {"cell", "status"};
  for (const auto& [key, values] : axes) columns.insert(key);
  std::vector<std::string> cols = {"cell"};
  for (const auto& [key, values] : axes) cols.push_back(key);
  cols.push_back("status");
  for (const char* extra : {"energy_initial", "drift_rel", "flux_residual_rel",
                            "decay_exponent", "verdicts_passed", "verdicts_total"})
    cols.push_back(extra);
  std::string csv;
  for (size_t c = 0; c < cols.size(); ++c) {
    if (c) csv += ',';
    csv += cols[c];
  }
  csv += '\n';
  for (const Cell& cell : cells) {
    for (size_t c = 0; c < cols.size(); ++c) {
      if (c) csv += ',';
      if (!cell.row.contains(cols[c])) continue;
      const nlohmann::ordered_json& v = cell.row[cols[c]];
      if (v.is_string())
        csv += v.get<std::string>();
      else if (v.is_number_float())
        csv += format_double(v.get<double>());
      else
        csv += v.dump();
    }
    csv += '\n';
  }
  atomic_write(std::filesystem::path(base.out_dir) / "sweep.csv", csv);
  return sweep;
}

}  // namespace rwave
