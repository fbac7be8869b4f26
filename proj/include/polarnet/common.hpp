#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace polarnet {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input content does not follow the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the arguments was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

using Timestamp = std::chrono::sys_seconds;
using CountryCode = std::string;

/// user_id -> country code for geolocated users.
using UserCountries = std::unordered_map<std::string, CountryCode>;

// ISO-8601 with zone ("Z", "+hh:mm", "+hhmm"); fractional seconds are truncated.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);  // "YYYY-MM-DDTHH:MM:SSZ"
std::string format_date(Timestamp t);       // "YYYY-MM-DD"

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Shortest round-trip decimal form, stable across runs.
std::string format_real(double v);

/// 64-bit FNV-1a; used for config digests and derived seeds.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// SplitMix64 step, used to derive independent child seeds from one root seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Reads a text file line by line; lines starting with '#' and blank lines are skipped.
std::vector<std::string> read_data_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace polarnet
