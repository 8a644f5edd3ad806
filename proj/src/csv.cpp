#include "quantnoise/csv.hpp"

#include <charconv>
#include <cstdio>

#include "quantnoise/errors.hpp"

namespace quantnoise {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw io_error("invalid number: '" + std::string(text) + "'");
  }
  return v;
}

long long parse_int(std::string_view text) {
  text = trim(text);
  long long v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw io_error("invalid integer: '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_hex64(std::string_view text) {
  text = trim(text);
  std::uint64_t v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v, 16);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw io_error("invalid hex value: '" + std::string(text) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path);
  return in;
}

bool header_value(std::string_view line, std::string_view key, std::string& out) {
  std::string token(key);
  token += '=';
  std::size_t pos = line.find(token);
  while (pos != std::string_view::npos) {
    // must start at a token boundary
    if (pos == 0 || line[pos - 1] == ' ' || line[pos - 1] == '\t' || line[pos - 1] == '#') {
      std::size_t start = pos + token.size();
      std::size_t end = line.find_first_of(" \t\r", start);
      if (end == std::string_view::npos) end = line.size();
      out = std::string(line.substr(start, end - start));
      return true;
    }
    pos = line.find(token, pos + 1);
  }
  return false;
}

}  // namespace quantnoise
