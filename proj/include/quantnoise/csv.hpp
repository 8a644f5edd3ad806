#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace quantnoise {

// Shortest decimal form that parses back to the identical double. All
// artifact files use this so that equal runs produce byte-equal files.
std::string format_double(double v);
std::string format_hex64(std::uint64_t v);

double parse_double(std::string_view text);  // throws io_error
long long parse_int(std::string_view text);
std::uint64_t parse_hex64(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view line, char sep);

std::ofstream open_output(const std::string& path);
std::ifstream open_input(const std::string& path);

// Extracts "<key>=<token>" from an artifact comment line; returns false when
// the key is absent.
bool header_value(std::string_view line, std::string_view key, std::string& out);

}  // namespace quantnoise
