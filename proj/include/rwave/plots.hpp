#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rwave {

struct PlotManifest {
  std::vector<std::string> files;  // written, relative to the artifact dir
  std::vector<std::string> notes;  // skipped series and why
};

// Render the artifact directory's diagnostics.csv and radiation.csv into
// self-contained SVG plots plus standalone gnuplot scripts (under plots/).
// Decaying series also get a log-log variant annotated with the fitted
// slope.  Output is a pure function of the CSV contents.
PlotManifest emit_plots(const std::filesystem::path& artifact_dir);

}  // namespace rwave
