#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace she {

inline constexpr const char* kToolVersion = "0.1.0";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Provenance stamped into every output. Only the first four fields enter
/// the CSV header; timestamps and paths live in the JSON sidecar so that
/// reruns produce identical CSV bytes.
struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string generator_id;
  std::string tool_version = kToolVersion;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;

  std::string header_line() const;
};

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

std::string utc_now();

/// Writes to `path`.tmp, then renames over `path`.
void write_atomic(const std::string& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> columns;
  /// Cells are preformatted; use format_double for numbers.
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

std::string render_csv(const RunManifest& manifest, const CsvTable& table);
void write_csv(const std::string& path, const RunManifest& manifest, const CsvTable& table);

void write_manifest_json(const std::string& path, const RunManifest& manifest);

struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  bool line = true;
};

/// Log-log (or linear, when log_axes is false) line and scatter plot.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series,
                       const std::string& annotation, bool log_axes = true);
void write_svg(const std::string& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<PlotSeries>& series,
               const std::string& annotation, bool log_axes = true);

}  // namespace she
