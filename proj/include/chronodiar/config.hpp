// Reader for the flat TOML subset used by generator configs:
//   # comment
//   key = 1.5          (numbers, "strings", true/false)
//   [table]            (keys below become "table.key")

#pragma once

#include "chronodiar/datagen.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace chronodiar::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Value = std::variant<double, std::string, bool>;

class KeyValues {
 public:
  static KeyValues parse(const std::string& text);

  bool contains(const std::string& key) const { return values_.contains(key); }
  bool has_table(const std::string& table) const;

  double number(const std::string& key, double fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  /// Keys present in the file that were never read through an accessor.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, Value> values_;
  mutable std::map<std::string, bool> touched_;
};

/// Throws ConfigError on syntax errors, wrong value types or unknown keys.
GenConfig gen_config_from_text(const std::string& text);
GenConfig load_gen_config(const std::string& path);

}  // namespace chronodiar::config
