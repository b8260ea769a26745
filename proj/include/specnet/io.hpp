#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specnet/common.hpp"

namespace specnet {

// All numeric output goes through one shortest-round-trip formatter so that
// identical runs produce byte-identical files.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DataError("non-numeric cell: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw DataError("non-numeric cell: '" + text + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

// Square matrix with gene names on both the header row and first column.
inline void write_named_matrix(const std::filesystem::path& path, const Matrix<double>& m,
                               const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "gene";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    out << names[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m.cols(); ++j) out << ',' << format_number(m(i, j));
    out << '\n';
  }
}

struct NamedMatrix {
  Matrix<double> values;
  std::vector<std::string> names;
};

inline NamedMatrix read_named_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
  auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError("matrix header too short in " + path.string());
  NamedMatrix out;
  out.names.assign(header.begin() + 1, header.end());
  const Index n = static_cast<Index>(out.names.size());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (static_cast<Index>(cells.size()) != n + 1)
      throw DataError("ragged matrix row in " + path.string());
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_number(cells[c]));
    rows.push_back(std::move(row));
  }
  if (static_cast<Index>(rows.size()) != n)
    throw DataError("matrix in " + path.string() + " is not square");
  out.values = Matrix<double>(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.values(i, j) = rows[i][j];
  return out;
}

// Time-series file: leading `time` column, one column per signal.
inline void write_series(const std::filesystem::path& path, const Vector<double>& time,
                         const Matrix<double>& values, const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "time";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Index t = 0; t < values.rows(); ++t) {
    out << format_number(time[t]);
    for (Index j = 0; j < values.cols(); ++j) out << ',' << format_number(values(t, j));
    out << '\n';
  }
}

struct SeriesFile {
  Vector<double> time;
  Matrix<double> values;
  std::vector<std::string> names;
};

inline SeriesFile read_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "time")
    throw DataError("series file must start with a time column: " + path.string());
  SeriesFile out;
  out.names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw DataError("ragged series row in " + path.string());
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c));
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) throw DataError("series too short in " + path.string());
  out.time = Vector<double>(static_cast<Index>(rows.size()));
  out.values = Matrix<double>(static_cast<Index>(rows.size()), static_cast<Index>(out.names.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    out.time[static_cast<Index>(t)] = rows[t][0];
    for (std::size_t j = 1; j < rows[t].size(); ++j)
      out.values(static_cast<Index>(t), static_cast<Index>(j - 1)) = rows[t][j];
  }
  return out;
}

// Flat `key = value` configuration. Consumers pop the keys they understand;
// anything left over is treated as a typo and rejected.
class Config {
 public:
  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read config file: " + path.string());
    Config cfg;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      auto trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw DataError("config line " + std::to_string(line_no) + " is not key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw DataError("empty config key on line " + std::to_string(line_no));
      if (cfg.entries_.count(key)) throw DataError("duplicate config key: " + key);
      cfg.entries_[key] = value;
    }
    return cfg;
  }

  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string v = it->second;
    entries_.erase(it);
    return v;
  }

  double take_number(const std::string& key, double fallback) {
    auto v = take(key);
    return v ? parse_number(*v) : fallback;
  }

  long take_integer(const std::string& key, long fallback) {
    const double v = take_number(key, static_cast<double>(fallback));
    const long r = static_cast<long>(v);
    if (static_cast<double>(r) != v) throw DataError("config key '" + key + "' must be an integer");
    return r;
  }

  bool take_flag(const std::string& key, bool fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw DataError("config key '" + key + "' must be true or false");
  }

  std::pair<double, double> take_pair(const std::string& key, std::pair<double, double> fallback) {
    auto v = take(key);
    if (!v) return fallback;
    auto cells = split_csv_line(*v);
    if (cells.size() != 2) throw DataError("config key '" + key + "' must be two numbers");
    return {parse_number(trim(cells[0])), parse_number(trim(cells[1]))};
  }

  void reject_unknown() const {
    if (!entries_.empty())
      throw DataError("unknown config key: '" + entries_.begin()->first + "'");
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace specnet
