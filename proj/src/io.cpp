#include "rwave/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rwave {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

double parse_double(const std::string& tok, const std::filesystem::path& path, int line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) {
    std::ostringstream msg;
    msg << path.string() << ":" << line_no << ": expected a number, got '" << tok << "'";
    throw std::runtime_error(msg.str());
  }
  return v;
}

// Reads a CSV with the exact given header; returns one vector per column.
std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              const std::string& header) {
  CsvTable table = read_csv(path);
  std::string joined;
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c) joined += ',';
    joined += table.columns[c];
  }
  if (joined != header)
    throw std::runtime_error(path.string() + ": expected header '" + header + "', got '" +
                             joined + "'");
  return std::move(table.values);
}

Eigen::ArrayXd to_array(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  table.columns = split_line(line);
  table.values.resize(table.columns.size());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto toks = split_line(line);
    if (toks.size() != table.columns.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected " << table.columns.size()
          << " columns, got " << toks.size();
      throw std::runtime_error(msg.str());
    }
    for (size_t c = 0; c < toks.size(); ++c)
      table.values[c].push_back(parse_double(toks[c], path, line_no));
  }
  return table;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

nlohmann::ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::ordered_json::parse(in);
}

void write_field_csv(const std::filesystem::path& path, const RadialGrid& g, const FieldState& s) {
  std::string out = "r,u,ut\n";
  for (int j = 0; j < g.size(); ++j) {
    out += format_double(g.r[j]);
    out += ',';
    out += format_double(s.u[j]);
    out += ',';
    out += format_double(s.ut[j]);
    out += '\n';
  }
  atomic_write(path, out);
}

FieldCsv read_field_csv(const std::filesystem::path& path) {
  auto cols = read_columns(path, "r,u,ut");
  if (cols[0].size() < 2) throw std::runtime_error(path.string() + ": too few rows");
  FieldCsv out;
  int n = static_cast<int>(cols[0].size()) - 1;
  out.grid = make_grid(cols[0].back(), n);
  out.state.t = 0.0;
  out.state.u = to_array(cols[1]);
  out.state.ut = to_array(cols[2]);
  return out;
}

void write_reduced_csv(const std::filesystem::path& path, const RadialGrid& g,
                       const ReducedState& s) {
  std::string out = "r,w,v_plus,v_minus\n";
  for (int j = 0; j < g.size(); ++j) {
    out += format_double(g.r[j]);
    out += ',';
    out += format_double(s.w[j]);
    out += ',';
    out += format_double(s.v_plus[j]);
    out += ',';
    out += format_double(s.v_minus[j]);
    out += '\n';
  }
  atomic_write(path, out);
}

void write_radiation_csv(const std::filesystem::path& path, const RadiationProfile& prof) {
  std::string out = "eta,g,quality\n";
  for (long j = 0; j < prof.eta.size(); ++j) {
    out += format_double(prof.eta[j]);
    out += ',';
    out += format_double(prof.g[j]);
    out += ',';
    out += format_double(prof.quality[j]);
    out += '\n';
  }
  atomic_write(path, out);
}

RadiationProfile read_radiation_csv(const std::filesystem::path& path) {
  auto cols = read_columns(path, "eta,g,quality");
  RadiationProfile out;
  out.eta = to_array(cols[0]);
  out.g = to_array(cols[1]);
  out.quality = to_array(cols[2]);
  return out;
}

void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsRecord>& records) {
  std::string out =
      "t,e_total,e_interior,flux_residual,morawetz_interior,morawetz_sphere,"
      "morawetz_exterior,potential,exterior_deficit,full_deficit,pointwise_ratio1,"
      "pointwise_ratio2\n";
  for (const DiagnosticsRecord& r : records) {
    const double vals[] = {r.t,
                           r.e_total,
                           r.e_interior,
                           r.flux_residual,
                           r.morawetz_interior,
                           r.morawetz_sphere,
                           r.morawetz_exterior,
                           r.potential,
                           r.exterior_deficit,
                           r.full_deficit,
                           r.pointwise_ratio1,
                           r.pointwise_ratio2};
    for (size_t c = 0; c < std::size(vals); ++c) {
      if (c) out += ',';
      out += format_double(vals[c]);
    }
    out += '\n';
  }
  atomic_write(path, out);
}

nlohmann::ordered_json params_json(const ModelParams& mp) {
  DerivedConstants k = derive(mp);
  nlohmann::ordered_json j;
  j["d"] = mp.d;
  j["p"] = mp.p;
  j["zeta"] = mp.zeta;
  j["constants"] = {{"lambda", k.lambda},      {"beta", k.beta},
                    {"kappa0", k.kappa0},      {"s_p", k.s_p},
                    {"c_d", k.c_d},            {"p_critical", k.p_critical},
                    {"p_conformal", k.p_conformal}};
  return j;
}

nlohmann::ordered_json grid_json(const RadialGrid& g) {
  return {{"r_max", g.r_max}, {"n", g.n}, {"h", g.h}};
}

}  // namespace rwave
