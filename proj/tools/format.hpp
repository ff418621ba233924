#pragma once

// Output helpers for the dualgeo tool: round-trip number formatting, RFC 4180
// CSV rows and point parsing.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dualgeo::cli {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join_reals(const std::vector<double>& xs, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += format_real(xs[i]);
  }
  return out;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

/// "1.5,-2,3e-4" -> {1.5, -2, 3e-4}. Throws std::invalid_argument.
inline std::vector<double> parse_reals(std::string_view s) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    std::string_view item = s.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw std::invalid_argument("not a list of reals: '" + std::string(s) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

/// Splits repeated flag values further on ';' so that "-p 0,0;1,1" works too.
inline std::vector<std::vector<double>> parse_point_list(const std::vector<std::string>& values) {
  std::vector<std::vector<double>> out;
  for (const auto& v : values) {
    std::string_view rest = v;
    while (true) {
      const auto semi = rest.find(';');
      const auto item = rest.substr(0, semi);
      if (!item.empty()) out.push_back(parse_reals(item));
      if (semi == std::string_view::npos) break;
      rest.remove_prefix(semi + 1);
    }
  }
  return out;
}

struct GridAxis {
  double lo;
  double hi;
  int count;
};

/// "lo:hi:n,lo:hi:n" -> one axis per chart coordinate.
inline std::vector<GridAxis> parse_grid(std::string_view s) {
  std::vector<GridAxis> axes;
  while (true) {
    const auto comma = s.find(',');
    const std::string item(s.substr(0, comma));
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;
    char tail = 0;
    if (std::sscanf(item.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3 || n < 1)
      throw std::invalid_argument("grid axis must look like lo:hi:n, got '" + item + "'");
    axes.push_back({lo, hi, n});
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return axes;
}

inline double axis_value(const GridAxis& a, int i) {
  if (a.count == 1) return a.lo;
  return a.lo + (a.hi - a.lo) * static_cast<double>(i) / static_cast<double>(a.count - 1);
}

}  // namespace dualgeo::cli
