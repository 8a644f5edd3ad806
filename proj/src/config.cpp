#include "quantnoise/config.hpp"

#include <fstream>
#include <sstream>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"

namespace quantnoise {

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

KeyValueConfig KeyValueConfig::from_text(std::string_view text) {
  KeyValueConfig cfg;
  std::size_t lineno = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
    ++lineno;

    std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw config_error("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw config_error("missing config key: " + key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  try {
    return parse_double(get_string(key));
  } catch (const io_error& e) {
    throw config_error("config key '" + key + "': " + e.what());
  }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
  try {
    return parse_int(get_string(key));
  } catch (const io_error& e) {
    throw config_error("config key '" + key + "': " + e.what());
  }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return static_cast<std::uint64_t>(get_int(key));
}

}  // namespace quantnoise
