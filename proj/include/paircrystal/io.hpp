#pragma once

// Deterministic serialization for the experiment runner: tables written as
// CSV or JSON with 17 significant digits, FNV-1a checksums, and static SVG
// plots. Nothing here reads the clock or any random source.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace paircrystal::io {

inline constexpr int kCsvSchemaVersion = 1;

/// "%.17g"; non-finite values are written as nan, inf, -inf.
std::string format_double(double v);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a64(std::string_view bytes);

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument when the row width differs from the header.
  void add_row(std::vector<Cell> row);
};

enum class TableFormat { csv, json };

/// Comma-separated, header row, LF line endings. Strings containing a comma,
/// quote or newline are quoted per RFC 4180.
std::string to_csv(const Table& t);

/// {"columns": [...], "rows": [[...], ...]} with numbers in 17 digits.
std::string to_json(const Table& t);

std::string render(const Table& t, TableFormat fmt);
const char* extension(TableFormat fmt);

/// Writes bytes exactly (binary mode, no newline translation).
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool scatter = false;
  std::string color;  ///< empty selects from the default palette
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 800;
  int height = 500;
};

/// Static SVG with axes, ticks, a legend and one polyline or marker set per
/// series. Non-finite points are skipped (they break a polyline).
std::string render_svg(const Plot& plot);

}  // namespace paircrystal::io
