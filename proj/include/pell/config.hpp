#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pell {

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_no, const std::string& what)
      : std::runtime_error(line_no > 0 ? "config line " + std::to_string(line_no) +
                                             ": " + what
                                       : what),
        line(line_no) {}
};

/// Plain-text configuration: one `key = value` per line grouped under
/// `[section]` headers; `#` starts a comment. No nesting, no quoting.
class Config {
 public:
  static Config parse(std::istream& in) {
    Config cfg;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#') continue;
      cfg.echo_.push_back(s);
      if (s.front() == '[') {
        if (s.back() != ']' || s.size() < 3)
          throw ConfigError(line_no, "malformed section header '" + s + "'");
        section = strip(s.substr(1, s.size() - 2));
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(line_no, "expected 'key = value', got '" + s + "'");
      std::string key = strip(s.substr(0, eq));
      std::string value = strip(s.substr(eq + 1));
      if (key.empty()) throw ConfigError(line_no, "empty key");
      cfg.values_[section.empty() ? key : section + "." + key] = value;
      cfg.lines_[section.empty() ? key : section + "." + key] = line_no;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file: " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError(0, "missing required key '" + key + "'");
    return it->second;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get(key)); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  int get_int(const std::string& key) const {
    double v = get_double(key);
    int i = static_cast<int>(v);
    if (double(i) != v)
      throw ConfigError(line_of(key), "key '" + key + "' must be an integer");
    return i;
  }
  int get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::string t = strip(item);
      if (t.empty()) continue;
      out.push_back(to_double(key, t));
    }
    if (out.empty())
      throw ConfigError(line_of(key), "key '" + key + "' holds an empty list");
    return out;
  }

  /// config body (comments stripped), for echoing into output headers
  const std::vector<std::string>& echo() const { return echo_; }

  int line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  static std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  double to_double(const std::string& key, const std::string& v) const {
    try {
      size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(line_of(key), "key '" + key + "' is not a number: '" + v + "'");
    }
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::vector<std::string> echo_;
};

}  // namespace pell
