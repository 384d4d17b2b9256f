#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sphflow {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` configuration text with dotted keys and '#' comments.
// Keys keep their file order; duplicate keys are rejected.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;

  // All keys in file order.
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  // Throws ConfigError naming the first key that is neither listed exactly
  // nor covered by one of the prefixes.
  void require_known(const std::vector<std::string>& exact,
                     const std::vector<std::string>& prefixes) const;

  // Verbatim text of the parsed source (for copying into run directories).
  const std::string& text() const { return text_; }
  const std::string& origin() const { return origin_; }

 private:
  const std::string* find(const std::string& key) const;
  const std::string& require(const std::string& key) const;

  std::vector<std::pair<std::string, std::string>> entries_;
  std::string text_;
  std::string origin_;
};

}  // namespace sphflow
