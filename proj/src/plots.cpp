#include "rwave/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "rwave/diagnostics.hpp"
#include "rwave/io.hpp"

namespace rwave {
namespace {

constexpr double kW = 720, kH = 480;
constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 52;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double place(double v, double a, double b) const {  // data -> pixel
    double x = log ? std::log10(v) : v;
    double xlo = log ? std::log10(lo) : lo;
    double xhi = log ? std::log10(hi) : hi;
    if (xhi - xlo < 1e-300) return 0.5 * (a + b);
    return a + (x - xlo) / (xhi - xlo) * (b - a);
  }
  double tick(int i, int n) const {  // i-th of n tick values, in data units
    double xlo = log ? std::log10(lo) : lo;
    double xhi = log ? std::log10(hi) : hi;
    double x = xlo + (xhi - xlo) * i / (n - 1);
    return log ? std::pow(10.0, x) : x;
  }
};

std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const Series& pts, bool loglog,
                     const DecayFit* fit) {
  Axis xa, ya;
  xa.log = ya.log = loglog;
  bool first = true;
  for (const auto& [x, y] : pts) {
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if (loglog && (x <= 0.0 || y <= 0.0)) continue;
    if (first) {
      xa.lo = xa.hi = x;
      ya.lo = ya.hi = y;
      first = false;
    } else {
      xa.lo = std::min(xa.lo, x);
      xa.hi = std::max(xa.hi, x);
      ya.lo = std::min(ya.lo, y);
      ya.hi = std::max(ya.hi, y);
    }
  }
  if (first) return "";
  if (!loglog && ya.hi == ya.lo) {
    ya.lo -= 1.0;
    ya.hi += 1.0;
  }
  if (loglog && ya.hi == ya.lo) {
    ya.lo *= 0.5;
    ya.hi *= 2.0;
  }

  auto X = [&](double v) { return xa.place(v, kLeft, kW - kRight); };
  auto Y = [&](double v) { return ya.place(v, kH - kBottom, kTop); };

  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
    << "' viewBox='0 0 " << kW << " " << kH << "'>\n";
  s << "<rect width='" << kW << "' height='" << kH << "' fill='white'/>\n";
  s << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-family='sans-serif'"
    << " font-size='15'>" << title << "</text>\n";

  const int nticks = 5;
  for (int i = 0; i < nticks; ++i) {
    double tx = xa.tick(i, nticks), ty = ya.tick(i, nticks);
    double pxx = X(tx), pyy = Y(ty);
    s << "<line x1='" << px(pxx) << "' y1='" << kTop << "' x2='" << px(pxx) << "' y2='"
      << kH - kBottom << "' stroke='#dddddd'/>\n";
    s << "<line x1='" << kLeft << "' y1='" << px(pyy) << "' x2='" << kW - kRight << "' y2='"
      << px(pyy) << "' stroke='#dddddd'/>\n";
    s << "<text x='" << px(pxx) << "' y='" << kH - kBottom + 18
      << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << fmt(tx)
      << "</text>\n";
    s << "<text x='" << kLeft - 6 << "' y='" << px(pyy + 4)
      << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << fmt(ty)
      << "</text>\n";
  }
  s << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << kW - kLeft - kRight
    << "' height='" << kH - kTop - kBottom << "' fill='none' stroke='#333333'/>\n";
  s << "<text x='" << kW / 2 << "' y='" << kH - 12
    << "' text-anchor='middle' font-family='sans-serif' font-size='12'>" << xlabel
    << "</text>\n";
  s << "<text x='16' y='" << kH / 2
    << "' text-anchor='middle' font-family='sans-serif' font-size='12' transform='rotate(-90 16 "
    << kH / 2 << ")'>" << ylabel << "</text>\n";

  // polyline segments, broken at non-plottable samples
  std::string seg;
  int seg_count = 0;
  auto flush = [&] {
    if (seg_count >= 2)
      s << "<polyline points='" << seg << "' fill='none' stroke='#1f77b4' stroke-width='1.5'/>\n";
    seg.clear();
    seg_count = 0;
  };
  for (const auto& [x, y] : pts) {
    bool ok = std::isfinite(x) && std::isfinite(y) && (!loglog || (x > 0.0 && y > 0.0));
    if (!ok) {
      flush();
      continue;
    }
    seg += px(X(x));
    seg += ',';
    seg += px(Y(y));
    seg += ' ';
    ++seg_count;
  }
  flush();

  if (fit) {
    double y_lo = std::exp(fit->intercept) * std::pow(fit->t_lo, fit->exponent);
    double y_hi = std::exp(fit->intercept) * std::pow(fit->t_hi, fit->exponent);
    s << "<line x1='" << px(X(fit->t_lo)) << "' y1='" << px(Y(y_lo)) << "' x2='"
      << px(X(fit->t_hi)) << "' y2='" << px(Y(y_hi))
      << "' stroke='#d62728' stroke-width='1.5' stroke-dasharray='6 4'/>\n";
    s << "<text x='" << kW - kRight - 8 << "' y='" << kTop + 18
      << "' text-anchor='end' font-family='sans-serif' font-size='12' fill='#d62728'>slope "
      << fmt(fit->exponent) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string gnuplot_script(const std::string& csv, const std::string& outname, int xcol, int ycol,
                           const std::string& xlabel, const std::string& ylabel, bool loglog) {
  std::ostringstream s;
  s << "# standalone: gnuplot " << outname << ".gp\n";
  s << "set datafile separator ','\n";
  s << "set terminal svg size 720,480\n";
  s << "set output '" << outname << ".gnuplot.svg'\n";
  s << "set xlabel '" << xlabel << "'\n";
  s << "set ylabel '" << ylabel << "'\n";
  if (loglog) s << "set logscale xy\n";
  s << "plot '../" << csv << "' using " << xcol << ":" << ycol << " with lines title '" << ylabel
    << "'\n";
  return s.str();
}

}  // namespace

PlotManifest emit_plots(const std::filesystem::path& artifact_dir) {
  PlotManifest m;
  // columns whose decay against t is worth a fitted log-log view
  const std::set<std::string> decaying = {"e_interior", "potential", "exterior_deficit",
                                          "full_deficit"};

  auto emit = [&](const std::string& name, const std::string& content) {
    atomic_write(artifact_dir / "plots" / name, content);
    m.files.push_back("plots/" + name);
  };

  std::filesystem::path diag = artifact_dir / "diagnostics.csv";
  if (!std::filesystem::exists(diag)) {
    m.notes.push_back("diagnostics.csv missing, nothing to plot");
  } else {
    CsvTable table = read_csv(diag);
    if (table.values.empty() || table.values[0].empty()) {
      m.notes.push_back("diagnostics.csv has no rows");
    } else if (table.columns.empty() || table.columns[0] != "t") {
      m.notes.push_back("diagnostics.csv lacks a leading t column");
    } else {
      const std::vector<double>& t = table.values[0];
      for (size_t c = 1; c < table.columns.size(); ++c) {
        const std::string& col = table.columns[c];
        Series pts;
        size_t finite = 0, positive = 0;
        for (size_t i = 0; i < t.size(); ++i) {
          double v = table.values[c][i];
          pts.emplace_back(t[i], v);
          if (std::isfinite(v)) ++finite;
          if (std::isfinite(v) && v > 0.0 && t[i] > 0.0) ++positive;
        }
        if (finite < 2) {
          m.notes.push_back(col + ": fewer than 2 finite samples, skipped");
          continue;
        }
        emit(col + ".svg", svg_plot(col, "t", col, pts, false, nullptr));
        emit(col + ".gp",
             gnuplot_script("diagnostics.csv", col, 1, static_cast<int>(c) + 1, "t", col, false));

        if (decaying.count(col) && positive >= 8) {
          double t_hi = t.back();
          DecayFit fit;
          const DecayFit* fit_ptr = nullptr;
          try {
            fit = fit_decay(pts, 0.2 * t_hi, t_hi);
            fit_ptr = &fit;
          } catch (const std::invalid_argument&) {
            m.notes.push_back(col + ": not enough late positive samples for a fit");
          }
          std::string svg = svg_plot(col + " (log-log)", "t", col, pts, true, fit_ptr);
          if (!svg.empty()) {
            emit(col + "_loglog.svg", svg);
            emit(col + "_loglog.gp", gnuplot_script("diagnostics.csv", col + "_loglog", 1,
                                                    static_cast<int>(c) + 1, "t", col, true));
          }
        }
      }
    }
  }

  std::filesystem::path rad = artifact_dir / "radiation.csv";
  if (std::filesystem::exists(rad)) {
    CsvTable table = read_csv(rad);
    if (table.columns.size() >= 2 && !table.values[0].empty()) {
      Series pts;
      for (size_t i = 0; i < table.values[0].size(); ++i)
        pts.emplace_back(table.values[0][i], table.values[1][i]);
      emit("radiation.svg", svg_plot("radiation profile", "eta", "g", pts, false, nullptr));
      emit("radiation.gp", gnuplot_script("radiation.csv", "radiation", 1, 2, "eta", "g", false));
    } else {
      m.notes.push_back("radiation.csv has no rows");
    }
  }

  nlohmann::ordered_json manifest;
  manifest["files"] = m.files;
  manifest["notes"] = m.notes;
  write_json(artifact_dir / "plots" / "manifest.json", manifest);
  m.files.push_back("plots/manifest.json");
  return m;
}

}  // namespace rwave
