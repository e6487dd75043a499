#include "paircrystal/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace paircrystal::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("table: row width does not match header");
  rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

std::string cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    // JSON has no NaN/inf literals; those become null.
    return std::isfinite(*d) ? format_double(*d) : "null";
  }
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return nlohmann::json(std::get<std::string>(c)).dump();
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cell_text(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& t) {
  std::string out = "{\n  \"columns\": [";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ", ";
    out += nlohmann::json(t.columns[i]).dump();
  }
  out += "],\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out += r ? ",\n    [" : "\n    [";
    for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
      if (i) out += ", ";
      out += cell_json(t.rows[r][i]);
    }
    out += ']';
  }
  out += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

std::string render(const Table& t, TableFormat fmt) { return fmt == TableFormat::csv ? to_csv(t) : to_json(t); }

const char* extension(TableFormat fmt) { return fmt == TableFormat::csv ? ".csv" : ".json"; }

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

std::string fixed(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string escape_xml(const std::string& s) {
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

std::string tick_label(double v) {
  std::array<char, 32> buf{};
  if (v == 0.0) return "0";
  std::snprintf(buf.data(), buf.size(), "%.4g", v);
  return buf.data();
}

// 1-2-5 tick spacing giving roughly `target` intervals.
std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

const std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg(const Plot& plot) {
  const double left = 80, right = 20, top = 40, bottom = 60;
  const double w = plot.width, h = plot.height;
  const double pw = w - left - right, ph = h - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin <= 0) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin <= 1e-300 + 1e-12 * std::abs(ymax)) {
    const double pad = std::max(1e-12, 0.5 * std::abs(ymax));
    ymin -= pad;
    ymax += pad;
  } else {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) + "\" height=\"" +
       std::to_string(plot.height) + "\" viewBox=\"0 0 " + std::to_string(plot.width) + " " +
       std::to_string(plot.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fixed(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape_xml(plot.title) + "</text>\n";
  o += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) + "\" height=\"" +
       fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : nice_ticks(xmin, xmax, 8)) {
    const double x = sx(t);
    o += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(x) + "\" y2=\"" +
         fixed(top + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(top + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(t) + "</text>\n";
  }
  for (double t : nice_ticks(ymin, ymax, 6)) {
    const double y = sy(t);
    o += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
         fixed(y) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(y + 4) + "\" text-anchor=\"end\">" +
         tick_label(t) + "</text>\n";
  }
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(h - 15) + "\" text-anchor=\"middle\">" +
       escape_xml(plot.x_label) + "</text>\n";
  o += "<text x=\"18\" y=\"" + fixed(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fixed(top + ph / 2) + ")\">" + escape_xml(plot.y_label) + "</text>\n";

  o += "<g>\n";
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const std::string color = s.color.empty() ? kPalette[k % kPalette.size()] : s.color;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.scatter) {
      o += "<g fill=\"" + color + "\">\n";
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o += "<circle cx=\"" + fixed(sx(s.x[i])) + "\" cy=\"" + fixed(sy(s.y[i])) + "\" r=\"1.5\"/>\n";
      }
      o += "</g>\n";
    } else {
      std::string pts;
      auto flush = [&] {
        if (!pts.empty())
          o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
        pts.clear();
      };
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        if (!pts.empty()) pts += ' ';
        pts += fixed(sx(s.x[i])) + "," + fixed(sy(s.y[i]));
      }
      flush();
    }
  }
  o += "</g>\n";

  // Legend
  double ly = top + 15;
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    if (s.label.empty()) continue;
    const std::string color = s.color.empty() ? kPalette[k % kPalette.size()] : s.color;
    const double lx = left + pw - 150;
    o += "<rect x=\"" + fixed(lx) + "\" y=\"" + fixed(ly - 9) + "\" width=\"12\" height=\"3\" fill=\"" + color +
         "\"/>\n";
    o += "<text x=\"" + fixed(lx + 18) + "\" y=\"" + fixed(ly - 3) + "\">" + escape_xml(s.label) + "</text>\n";
    ly += 16;
  }
  o += "</svg>\n";
  return o;
}

}  // namespace paircrystal::io
