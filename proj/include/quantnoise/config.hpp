#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace quantnoise {

// Flat "key = value" configuration text. '#' starts a comment, blank lines
// are ignored, keys may be dotted (quantizer.bits, noise.scale, ...).
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_text(std::string_view text);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace quantnoise
