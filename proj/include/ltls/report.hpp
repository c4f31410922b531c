#pragma once

// Flat key=value configuration and the CSV table writer used by the CLI.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ltls/errors.hpp"

namespace ltls {

inline constexpr std::string_view kVersion = "0.1.0";

/// Ordered so that echoes are stable.
using Config = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Lines of `key = value`; '#' starts a comment; blank lines are ignored.
inline Config parse_config(std::istream& in) {
  Config c;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DomainError("config line " + std::to_string(no) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string val = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw DomainError("config line " + std::to_string(no) + ": empty key");
    c[key] = val;
  }
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Shortest text that is exact to 17 significant digits.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const Config& c, const std::string& key, double fallback) {
  const auto it = c.find(key);
  if (it == c.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size()) throw DomainError("config key '" + key + "': not a number: " + it->second);
  return v;
}

inline long parse_long(const Config& c, const std::string& key, long fallback) {
  const double v = parse_double(c, key, double(fallback));
  if (v != std::floor(v)) throw DomainError("config key '" + key + "': expected an integer");
  return long(v);
}

inline bool parse_bool(const Config& c, const std::string& key, bool fallback) {
  const auto it = c.find(key);
  if (it == c.end()) return fallback;
  const std::string& s = it->second;
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw DomainError("config key '" + key + "': expected true/false");
}

/// A numeric table with '#' header lines.
struct CsvTable {
  std::vector<std::string> header;   // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void note(const std::string& key, const std::string& value) { header.push_back(key + "=" + value); }
  void note(const std::string& key, double value) { note(key, fmt17(value)); }

  void write(std::ostream& os) const {
    for (const auto& h : header) os << "# " << h << '\n';
    os << "# columns=";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt17(r[i]);
      os << '\n';
    }
  }
};

/// Parsed form of a table written by CsvTable::write.
struct CsvRead {
  std::vector<std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline CsvRead read_csv(std::istream& in) {
  CsvRead r;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string h = trim(std::string_view(line).substr(1));
      if (h.rfind("columns=", 0) == 0) {
        std::stringstream ss(h.substr(8));
        std::string col;
        while (std::getline(ss, col, ',')) r.columns.push_back(col);
      } else {
        r.header.push_back(h);
      }
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell == "nan" ? NAN : std::stod(cell));
    r.rows.push_back(std::move(row));
  }
  return r;
}

}  // namespace ltls
