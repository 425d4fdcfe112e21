#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwave/diagnostics.hpp"
#include "rwave/grid.hpp"
#include "rwave/params.hpp"
#include "rwave/radiation.hpp"

namespace rwave {

inline constexpr const char* kVersion = "0.1.0";

// %.17g: prints every IEEE double exactly enough to round-trip bit-for-bit,
// and identically across platforms, which keeps artifacts diffable.
std::string format_double(double x);

// Write content to a sibling .tmp file and rename it over the target, so a
// crashed run never leaves a torn file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);
nlohmann::ordered_json read_json(const std::filesystem::path& path);

// Any rwave CSV, column-major.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // one vector per column
};

CsvTable read_csv(const std::filesystem::path& path);

struct FieldCsv {
  RadialGrid grid;
  FieldState state;  // t is not stored in the CSV; it stays 0 on read
};

// Columns r,u,ut.
void write_field_csv(const std::filesystem::path& path, const RadialGrid& g, const FieldState& s);
FieldCsv read_field_csv(const std::filesystem::path& path);

// Columns r,w,v_plus,v_minus.
void write_reduced_csv(const std::filesystem::path& path, const RadialGrid& g,
                       const ReducedState& s);

// Columns eta,g,quality.
void write_radiation_csv(const std::filesystem::path& path, const RadiationProfile& prof);
RadiationProfile read_radiation_csv(const std::filesystem::path& path);

void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsRecord>& records);

// Model parameters plus every derived constant under a "constants" key.
nlohmann::ordered_json params_json(const ModelParams& mp);

nlohmann::ordered_json grid_json(const RadialGrid& g);

}  // namespace rwave
