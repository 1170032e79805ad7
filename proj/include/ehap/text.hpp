#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <string>
#include <string_view>
#include <vector>

namespace ehap::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Whole-field parse; rejects trailing garbage, empty fields and non-finite values.
bool parse_double(std::string_view field, double& out);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

}  // namespace ehap::text
