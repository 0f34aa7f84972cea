#include "she/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace she {

std::string RunManifest::header_line() const {
  return "# manifest: " + config_hash + " seed=" + std::to_string(seed) +
         " generator=" + generator_id + " version=" + tool_version;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) throw IoError("cannot create " + target.parent_path().string() + ": " + ec.message());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size())
    throw std::invalid_argument("csv row width does not match the header");
  rows.push_back(std::move(cells));
}

std::string render_csv(const RunManifest& manifest, const CsvTable& table) {
  std::string s = manifest.header_line() + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) s += ',';
    s += table.columns[i];
  }
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += row[i];
    }
    s += '\n';
  }
  return s;
}

void write_csv(const std::string& path, const RunManifest& manifest, const CsvTable& table) {
  write_atomic(path, render_csv(manifest, table));
}

void write_manifest_json(const std::string& path, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["generator_id"] = manifest.generator_id;
  j["tool_version"] = manifest.tool_version;
  j["started_utc"] = manifest.started_utc;
  j["finished_utc"] = manifest.finished_utc;
  j["outputs"] = manifest.outputs;
  write_atomic(path, j.dump(2) + "\n");
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series,
                       const std::string& annotation, bool log_axes) {
  const double W = 640, H = 480, L = 80, R = 20, T = 40, B = 60;
  auto tx = [&](double v) { return log_axes ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if (log_axes && (s.xs[i] <= 0 || s.ys[i] <= 0)) continue;
      x0 = std::min(x0, tx(s.xs[i]));
      x1 = std::max(x1, tx(s.xs[i]));
      y0 = std::min(y0, tx(s.ys[i]));
      y1 = std::max(y1, tx(s.ys[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  auto sx = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double v) { return H - B - (tx(v) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double vx = log_axes ? std::pow(10.0, fx) : fx, vy = log_axes ? std::pow(10.0, fy) : fy;
    o << "<text x=\"" << num(sx(vx)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << tick_label(vx) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << num(sy(vy) + 4) << "\" text-anchor=\"end\">"
      << tick_label(vy) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (T + H - B) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if (log_axes && (s.xs[i] <= 0 || s.ys[i] <= 0)) continue;
      pts += num(sx(s.xs[i])) + "," + num(sy(s.ys[i])) + " ";
      o << "<circle cx=\"" << num(sx(s.xs[i])) << "\" cy=\"" << num(sy(s.ys[i]))
        << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    }
    if (s.line && !pts.empty())
      o << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"" << pts << "\"/>\n";
    o << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 14 * k << "\" fill=\"" << c << "\">"
      << xml_escape(s.label) << "</text>\n";
  }
  if (!annotation.empty())
    o << "<text x=\"" << W - R - 8 << "\" y=\"" << H - B - 10 << "\" text-anchor=\"end\">"
      << xml_escape(annotation) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<PlotSeries>& series,
               const std::string& annotation, bool log_axes) {
  write_atomic(path, render_svg(title, x_label, y_label, series, annotation, log_axes));
}

}  // namespace she
