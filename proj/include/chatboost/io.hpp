#pragma once

#include <string>

namespace chatboost {

/// Shortest decimal string that round-trips the exact double value.
std::string format_double(double v);

double parse_double(const std::string& token, const std::string& context);
long long parse_int(const std::string& token, const std::string& context);

std::string read_file(const std::string& path);

/// Writes content to a temporary sibling file and renames it into place, so
/// the destination is never left half-written.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace chatboost
