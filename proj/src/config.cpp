#include "sphflow/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sphflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text,
                            const std::string& origin) {
  Config cfg;
  cfg.text_ = text;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty value for key '" + key + "'");
    if (cfg.find(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

const std::string* Config::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

const std::string& Config::require(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return *v;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

double Config::get_double(const std::string& key) const {
  const std::string& v = require(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size())
    throw ConfigError(origin_ + ": key '" + key + "': bad number '" + v + "'");
  return x;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const std::string& v = require(key);
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size())
    throw ConfigError(origin_ + ": key '" + key + "': bad integer '" + v + "'");
  return static_cast<int>(x);
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = require(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "': bad boolean '" + v + "'");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

std::string Config::get_string(const std::string& key) const {
  return require(key);
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  return has(key) ? *find(key) : fallback;
}

void Config::require_known(const std::vector<std::string>& exact,
                           const std::vector<std::string>& prefixes) const {
  for (const auto& [k, v] : entries_) {
    bool ok = false;
    for (const auto& e : exact)
      if (k == e) {
        ok = true;
        break;
      }
    if (!ok)
      for (const auto& p : prefixes)
        if (k.size() > p.size() && k.compare(0, p.size(), p) == 0) {
          ok = true;
          break;
        }
    if (!ok)
      throw ConfigError(origin_ + ": unknown key '" + k + "'");
  }
}

}  // namespace sphflow
