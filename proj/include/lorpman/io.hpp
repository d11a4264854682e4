// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0
//
// CSV and SVG artifacts. CSV is UTF-8, comma separated, one header row, `.`
// as decimal point; reals are printed with 17 significant digits so that
// parsing the text gives back the same double.

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lorpman/matrix.hpp"
#include "lorpman/metrics.hpp"

namespace lorpman {

/// `v` with 17 significant digits, enough to parse back to the same double.
std::string format_real(double v);
/// `v` with `digits` significant digits, general notation.
std::string format_real(double v, int digits);

/// Parses a whole cell as a double. Returns false on trailing garbage.
bool parse_real(std::string_view text, double& out);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const CsvTable& table);
/// Splits `text` into rows. The first row is the header unless
/// `header_optional` is set and every cell of it parses as a number.
/// Quoted cells are not supported. Errors name the 1-based line.
CsvTable parse_csv(std::string_view text, bool header_optional = false);

struct NumericTable {
  std::vector<std::string> header;
  std::vector<Vector> rows;

  /// Index of `name` in the header, or npos.
  std::size_t column(std::string_view name) const;
};

/// Every cell must be a real number; errors name the row.
NumericTable to_numeric(const CsvTable& table);
CsvTable from_numeric(const NumericTable& table);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncates then writes, and
/// throws IoError naming the path on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Objective points from a CSV. Columns named obj_* are used when present,
/// otherwise every column. An empty file yields an empty front.
FrontSample front_from_csv(std::string_view text, Orientation orientation);

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<std::array<double, 2>> points;
  enum class Style { kMarkers, kPath, kSquares } style = Style::kMarkers;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
};

/// Static scatter plot. kMarkers series emit one <circle> per point, kPath
/// series one <polyline>, kSquares one <rect> per point.
std::string render_svg(const SvgPlot& plot);

}  // namespace lorpman
