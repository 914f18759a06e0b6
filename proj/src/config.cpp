#include "dfsearch/config.hpp"

#include "dfsearch/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dfsearch {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a finite number");
  }
  return v;
}

long to_long(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ",";
    out += fmt(xs[k]);
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  c.source_ = source;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    }
    if (c.raw_.count(key)) {
      throw ConfigError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    }
    c.raw_[key] = value;
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse(in, path.string());
}

const std::string* Config::lookup(const std::string& key) {
  used_.insert(key);
  const auto it = raw_.find(key);
  return it == raw_.end() ? nullptr : &it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const auto* v = lookup(key);
  return resolved_[key] = v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) {
  const auto* v = lookup(key);
  const double x = v ? to_double(key, *v) : fallback;
  resolved_[key] = format_double(x);
  return x;
}

long Config::get_int(const std::string& key, long fallback) {
  const auto* v = lookup(key);
  const long x = v ? to_long(key, *v) : fallback;
  resolved_[key] = std::to_string(x);
  return x;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const auto* v = lookup(key);
  bool x = fallback;
  if (v) {
    if (*v == "true" || *v == "1") {
      x = true;
    } else if (*v == "false" || *v == "0") {
      x = false;
    } else {
      throw ConfigError("key '" + key + "': expected true or false, got '" + *v + "'");
    }
  }
  resolved_[key] = x ? "true" : "false";
  return x;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) {
  const auto* v = lookup(key);
  std::vector<double> xs = fallback;
  if (v) {
    xs.clear();
    for (const auto& item : split_list(*v)) xs.push_back(to_double(key, item));
  }
  resolved_[key] = join(xs, format_double);
  return xs;
}

void Config::record(const std::string& key, const std::vector<double>& xs) {
  resolved_[key] = join(xs, format_double);
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) {
  const auto* v = lookup(key);
  std::vector<int> xs = fallback;
  if (v) {
    xs.clear();
    for (const auto& item : split_list(*v)) {
      const long x = to_long(key, item);
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError("key '" + key + "': value out of range");
      xs.push_back(static_cast<int>(x));
    }
  }
  resolved_[key] = join(xs, [](int x) { return std::to_string(x); });
  return xs;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) {
  const auto* v = lookup(key);
  std::vector<std::string> xs = v ? split_list(*v) : fallback;
  resolved_[key] = join(xs, [](const std::string& s) { return s; });
  return xs;
}

void Config::expect(const std::string& key, const std::string& expected) {
  const auto* v = lookup(key);
  if (v && *v != expected) {
    throw ConfigError("key '" + key + "' is '" + *v + "' but this run needs '" + expected + "'");
  }
  resolved_[key] = expected;
}

void Config::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, value] : raw_) {
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError(source_ + ": unknown key(s): " + unknown);
}

std::string Config::resolved_text() const {
  std::string out;
  for (const auto& [key, value] : resolved_) out += key + "=" + value + "\n";
  return out;
}

}  // namespace dfsearch
