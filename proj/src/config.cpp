#include "chronodiar/config.hpp"

#include "chronodiar/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace chronodiar::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

Value parse_value(const std::string& raw, std::size_t line) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    return raw.substr(1, raw.size() - 2);
  }
  std::string digits;
  for (char c : raw) {
    if (c != '_') digits += c;
  }
  double v = 0.0;
  const char* begin = digits.data();
  const char* end = begin + digits.size();
  if (!digits.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("line " + std::to_string(line) + ": cannot parse value '" + raw + "'");
  }
  return v;
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string raw;
  std::string table;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || !valid_key(trim(line.substr(1, line.size() - 2)))) {
        throw ConfigError("line " + std::to_string(n) + ": malformed table header");
      }
      table = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) {
      throw ConfigError("line " + std::to_string(n) + ": invalid key '" + key + "'");
    }
    const std::string full = table.empty() ? key : table + "." + key;
    if (kv.values_.contains(full)) {
      throw ConfigError("line " + std::to_string(n) + ": duplicate key '" + full + "'");
    }
    kv.values_.emplace(full, parse_value(trim(line.substr(eq + 1)), n));
  }
  return kv;
}

bool KeyValues::has_table(const std::string& table) const {
  const std::string prefix = table + ".";
  auto it = values_.lower_bound(prefix);
  return it != values_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

double KeyValues::number(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  touched_[key] = true;
  if (const double* v = std::get_if<double>(&it->second)) return *v;
  throw ConfigError("key '" + key + "' must be a number");
}

std::string KeyValues::string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  touched_[key] = true;
  if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
  throw ConfigError("key '" + key + "' must be a string");
}

bool KeyValues::boolean(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  touched_[key] = true;
  if (const bool* v = std::get_if<bool>(&it->second)) return *v;
  throw ConfigError("key '" + key + "' must be true or false");
}

std::vector<std::string> KeyValues::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!touched_.contains(key)) out.push_back(key);
  }
  return out;
}

GenConfig gen_config_from_text(const std::string& text) {
  const KeyValues kv = KeyValues::parse(text);
  GenConfig cfg;
  auto integer = [&](const std::string& key, double fallback) {
    const double v = kv.number(key, fallback);
    if (v != std::floor(v)) throw ConfigError("key '" + key + "' must be an integer");
    return v;
  };
  cfg.dimension = static_cast<int>(integer("dimension", cfg.dimension));
  cfg.n_speakers = static_cast<int>(integer("n_speakers", cfg.n_speakers));
  cfg.duration = kv.number("duration", cfg.duration);
  cfg.frame_period = kv.number("frame_period", cfg.frame_period);
  cfg.kappa = kv.number("kappa", cfg.kappa);
  cfg.min_pairwise_angle = kv.number("min_pairwise_angle", cfg.min_pairwise_angle);
  cfg.turn_mean = kv.number("turn_mean", cfg.turn_mean);
  cfg.pause_mean = kv.number("pause_mean", cfg.pause_mean);
  cfg.overlap_prob = kv.number("overlap_prob", cfg.overlap_prob);
  const double seed = integer("seed", 0.0);
  if (seed < 0.0) throw ConfigError("key 'seed' must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  if (kv.has_table("enrollment_skew")) {
    EnrollmentSkew skew;
    skew.speaker = kv.string("enrollment_skew.speaker", speaker_name(1));
    skew.drift_angle_degrees = kv.number("enrollment_skew.drift_angle_degrees", 0.0);
    skew.skew_duration_seconds = kv.number("enrollment_skew.skew_duration_seconds", 1.0);
    cfg.enrollment_skew = skew;
  }
  if (const auto unused = kv.unused_keys(); !unused.empty()) {
    throw ConfigError("unknown config key '" + unused.front() + "'");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

GenConfig load_gen_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return gen_config_from_text(text);
}

}  // namespace chronodiar::config
