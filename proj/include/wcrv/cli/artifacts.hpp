#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wcrv/common/errors.hpp"

namespace wcrv {

/// Shortest round-trippable decimal form of a double, for bit-identical CSVs
/// across runs.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw ValidationError("cannot write " + path.string());
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
    columns_ = header.size();
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw ValidationError("CSV row width mismatch");
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

private:
  std::ofstream out_;
  size_t columns_ = 0;
};

/// Minimal line plot: one polyline over auto-scaled axes with tick labels.
inline void write_svg_line_plot(const std::filesystem::path& path,
                                const std::vector<double>& xs, const std::vector<double>& ys,
                                const std::string& x_label, const std::string& y_label,
                                const std::string& title) {
  if (xs.size() != ys.size() || xs.empty()) throw ValidationError("svg plot: bad data");
  const double w = 640, h = 420, ml = 80, mr = 20, mt = 40, mb = 50;
  double x0 = *std::min_element(xs.begin(), xs.end());
  double x1 = *std::max_element(xs.begin(), xs.end());
  double y0 = *std::min_element(ys.begin(), ys.end());
  double y1 = *std::max_element(ys.begin(), ys.end());
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double px = (w - ml - mr) / (x1 - x0);
  const double py = (h - mt - mb) / (y1 - y0);

  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "' viewBox='0 0 " << w << " " << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
      << "</text>\n";
  out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  out << "<text x='" << (w + ml - mr) / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
  out << "<text x='16' y='" << (h + mt - mb) / 2 << "' font-size='12' transform='rotate(-90 16 "
      << (h + mt - mb) / 2 << ")' text-anchor='middle'>" << y_label << "</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double tx = x0 + tick * (x1 - x0) / 4;
    const double ty = y0 + tick * (y1 - y0) / 4;
    out << "<text x='" << ml + (tx - x0) * px << "' y='" << h - mb + 16
        << "' text-anchor='middle' font-size='10'>" << format_double(tx).substr(0, 8)
        << "</text>\n";
    out << "<text x='" << ml - 6 << "' y='" << h - mb - (ty - y0) * py + 3
        << "' text-anchor='end' font-size='10'>" << format_double(ty).substr(0, 8)
        << "</text>\n";
  }
  out << "<polyline fill='none' stroke='#1f6fb2' stroke-width='1.5' points='";
  for (size_t i = 0; i < xs.size(); ++i)
    out << ml + (xs[i] - x0) * px << "," << h - mb - (ys[i] - y0) * py << " ";
  out << "'/>\n";
  for (size_t i = 0; i < xs.size(); ++i)
    out << "<circle cx='" << ml + (xs[i] - x0) * px << "' cy='" << h - mb - (ys[i] - y0) * py
        << "' r='2.2' fill='#1f6fb2'/>\n";
  out << "</svg>\n";
}

} // namespace wcrv
