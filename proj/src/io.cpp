// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lorpman/errors.hpp"

namespace lorpman {

std::string format_real(double v) { return format_real(v, 17); }

std::string format_real(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

bool parse_real(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  return out;
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool all_numeric(const std::vector<std::string>& cells) {
  double v;
  return std::all_of(cells.begin(), cells.end(), [&](const std::string& c) { return parse_real(c, v); });
}

}  // namespace

CsvTable parse_csv(std::string_view text, bool header_optional) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      have_header = true;
      if (!(header_optional && all_numeric(cells))) {
        table.header = std::move(cells);
        continue;
      }
      for (std::size_t k = 0; k < cells.size(); ++k) table.header.push_back("c" + std::to_string(k));
    }
    if (cells.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(table.rows.size() + 1) + " (line " +
                       std::to_string(line_no) + "): expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::size_t NumericTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
}

NumericTable to_numeric(const CsvTable& table) {
  NumericTable out;
  out.header = table.header;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Vector row(table.rows[r].size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!parse_real(table.rows[r][k], row[k])) {
        throw ParseError("row " + std::to_string(r + 1) + ", column '" + table.header[k] +
                         "': not a number: '" + table.rows[r][k] + "'");
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

CsvTable from_numeric(const NumericTable& table) {
  CsvTable out;
  out.header = table.header;
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double v : row) cells.push_back(format_real(v));
    out.rows.push_back(std::move(cells));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("short write to " + path.string());
}

FrontSample front_from_csv(std::string_view text, Orientation orientation) {
  const NumericTable table = to_numeric(parse_csv(text, true));
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    if (table.header[k].rfind("obj_", 0) == 0) cols.push_back(k);
  }
  if (cols.empty()) {
    for (std::size_t k = 0; k < table.header.size(); ++k) cols.push_back(k);
  }
  FrontSample front;
  front.orientation = orientation;
  for (const auto& row : table.rows) {
    Vector p;
    for (std::size_t k : cols) p.push_back(row[k]);
    front.points.push_back(std::move(p));
  }
  return front;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return format_real(v, 6); }

}  // namespace

std::string render_svg(const SvgPlot& plot) {
  constexpr double kWidth = 640, kHeight = 480, kMargin = 60;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool any = false;
  for (const auto& s : plot.series) {
    for (const auto& p : s.points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      if (!any) {
        x_lo = x_hi = p[0];
        y_lo = y_hi = p[1];
        any = true;
      }
      x_lo = std::min(x_lo, p[0]);
      x_hi = std::max(x_hi, p[0]);
      y_lo = std::min(y_lo, p[1]);
      y_hi = std::max(y_hi, p[1]);
    }
  }
  const double x_pad = x_hi > x_lo ? 0.05 * (x_hi - x_lo) : 0.5;
  const double y_pad = y_hi > y_lo ? 0.05 * (y_hi - y_lo) : 0.5;
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;
  auto sx = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
  auto sy = [&](double y) {
    return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin);
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << xml_escape(plot.title) << "</text>\n"
     << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
     << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
     << kHeight - kMargin << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(plot.x_label) << "</text>\n"
     << "<text x=\"15\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
     << "transform=\"rotate(-90 15 " << kHeight / 2 << ")\">" << xml_escape(plot.y_label)
     << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x_lo + (x_hi - x_lo) * t / 4.0, fy = y_lo + (y_hi - y_lo) * t / 4.0;
    os << "<text x=\"" << num(sx(fx)) << "\" y=\"" << kHeight - kMargin + 16
       << "\" text-anchor=\"middle\" font-size=\"10\">" << format_real(fx, 3) << "</text>\n"
       << "<text x=\"" << kMargin - 6 << "\" y=\"" << num(sy(fy))
       << "\" text-anchor=\"end\" font-size=\"10\">" << format_real(fy, 3) << "</text>\n";
  }

  double legend_y = kMargin;
  for (const auto& s : plot.series) {
    const std::string color = xml_escape(s.color.empty() ? "black" : s.color);
    os << "<g class=\"series\" data-label=\"" << xml_escape(s.label) << "\">\n";
    switch (s.style) {
      case SvgSeries::Style::kMarkers:
        for (const auto& p : s.points) {
          os << "<circle cx=\"" << num(sx(p[0])) << "\" cy=\"" << num(sy(p[1]))
             << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
        break;
      case SvgSeries::Style::kSquares:
        for (const auto& p : s.points) {
          os << "<rect x=\"" << num(sx(p[0]) - 4) << "\" y=\"" << num(sy(p[1]) - 4)
             << "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"" << color << "\"/>\n";
        }
        break;
      case SvgSeries::Style::kPath: {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < s.points.size(); ++k) {
          if (k) os << ' ';
          os << num(sx(s.points[k][0])) << ',' << num(sy(s.points[k][1]));
        }
        os << "\"/>\n";
        break;
      }
    }
    os << "</g>\n";
    os << "<text x=\"" << kWidth - kMargin << "\" y=\"" << legend_y
       << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">"
       << xml_escape(s.label) << "</text>\n";
    legend_y += 14;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace lorpman
