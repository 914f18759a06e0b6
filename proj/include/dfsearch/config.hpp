#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace dfsearch {

/// Flat key=value experiment configuration. Lines starting with '#' and blank
/// lines are ignored; trailing "# ..." comments are stripped.
///
/// Every typed getter records the value it resolved (the configured one or
/// the default), so resolved_text() reproduces the run exactly. Keys never
/// read by the command are reported by reject_unknown().
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return raw_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { raw_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  long get_int(const std::string& key, long fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback);
  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& fallback);

  /// Records a value computed from other keys (e.g. a default grid) so the
  /// sidecar pins it explicitly.
  void record(const std::string& key, const std::vector<double>& xs);

  /// Requires `key`, when present, to equal `expected`; records it either way.
  void expect(const std::string& key, const std::string& expected);

  void reject_unknown() const;

  /// Sorted key=value lines of everything resolved so far.
  std::string resolved_text() const;

 private:
  const std::string* lookup(const std::string& key);

  std::map<std::string, std::string> raw_;
  std::map<std::string, std::string> resolved_;
  std::set<std::string> used_;
  std::string source_;
};

/// Shortest round-trip text of a double ("%.17g").
std::string format_double(double x);

}  // namespace dfsearch
