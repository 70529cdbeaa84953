#include "popctl/config.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace popctl {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': expected a number, got '" + text +
                "'");
  }
}

}  // namespace

Config Config::Parse(std::istream& in, const std::string& source) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(source + ":" + std::to_string(lineno) +
                  ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(source + ":" + std::to_string(lineno) + ": empty key");
    }
    if (cfg.Has(key)) {
      throw Error(source + ":" + std::to_string(lineno) + ": duplicate key '" +
                  key + "'");
    }
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  return Parse(in, path);
}

void Config::SetAssignment(const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw Error("override '" + assignment + "' is not key=value");
  }
  Set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::Set(const std::string& key, const std::string& value) {
  if (key.empty()) throw Error("empty config key");
  values_[key] = value;
}

std::string Config::GetString(const std::string& key,
                              const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double Config::GetDouble(const std::string& key, double def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : parse_double(key, it->second);
}

int Config::GetInt(const std::string& key, int def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  double v = parse_double(key, it->second);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw Error("config key '" + key + "': expected an integer");
  }
  return static_cast<int>(v);
}

std::vector<double> Config::GetDoubles(const std::string& key,
                                       const std::vector<double>& def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::vector<double> out;
  for (const auto& part : split(it->second, ',')) {
    out.push_back(parse_double(key, part));
  }
  return out;
}

std::vector<int> Config::GetInts(const std::string& key,
                                 const std::vector<int>& def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::vector<int> out;
  for (const auto& part : split(it->second, ',')) {
    double v = parse_double(key, part);
    if (v != std::floor(v)) {
      throw Error("config key '" + key + "': expected integers");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Vec Config::GetVec(const std::string& key, const Vec& def) const {
  if (!Has(key)) return def;
  std::vector<double> v = GetDoubles(key, {});
  return Eigen::Map<Vec>(v.data(), static_cast<long>(v.size()));
}

Mat Config::GetMat(const std::string& key, const Mat& def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(it->second, ';')) {
    if (row.empty()) continue;
    std::vector<double> r;
    for (const auto& part : split(row, ',')) r.push_back(parse_double(key, part));
    if (!rows.empty() && r.size() != rows[0].size()) {
      throw Error("config key '" + key + "': ragged matrix");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw Error("config key '" + key + "': empty matrix");
  Mat m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void Config::RequireKnown(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) throw Error("unknown config key '" + key + "'");
  }
}

}  // namespace popctl
