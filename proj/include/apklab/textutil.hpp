#pragma once

#include <chrono>
#include <filesystem>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace apklab {

std::string to_hex(const unsigned char* data, std::size_t len);
std::string to_hex(std::string_view bytes);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

// Splits on a single delimiter; keeps empty pieces.
std::vector<std::string> split(std::string_view s, char delim);
// Splits on a delimiter and trims each piece; drops empties ("a, b," -> {"a","b"}).
std::vector<std::string> split_trimmed(std::string_view s, char delim);

bool iequals(std::string_view a, std::string_view b);

std::string url_encode(std::string_view s);
std::string url_decode(std::string_view s);

// "2013-09-02T10:15:30Z"
std::string iso8601_utc(std::chrono::system_clock::time_point tp);
std::string iso8601_now_utc();
// "20130902T101530Z" (run-id prefix)
std::string utc_timestamp_compact();

std::string random_hex(std::size_t digits);

// Maximal runs of printable ASCII (0x20..0x7e) of at least min_len bytes.
std::vector<std::string> printable_runs(std::string_view bytes, std::size_t min_len);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace apklab
