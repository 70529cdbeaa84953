#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "popctl/simplex.h"

namespace popctl {

// Flat key = value configuration. '#' starts a comment. Vectors are comma
// separated; matrix rows are separated by ';'.
class Config {
 public:
  static Config Parse(std::istream& in, const std::string& source = "<input>");
  static Config Load(const std::string& path);

  // Accepts "key=value".
  void SetAssignment(const std::string& assignment);
  void Set(const std::string& key, const std::string& value);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  std::string GetString(const std::string& key, const std::string& def) const;
  double GetDouble(const std::string& key, double def) const;
  int GetInt(const std::string& key, int def) const;
  std::vector<double> GetDoubles(const std::string& key,
                                 const std::vector<double>& def) const;
  std::vector<int> GetInts(const std::string& key,
                           const std::vector<int>& def) const;
  Vec GetVec(const std::string& key, const Vec& def) const;
  Mat GetMat(const std::string& key, const Mat& def) const;

  // Throws Error naming the first key outside `allowed`.
  void RequireKnown(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace popctl
