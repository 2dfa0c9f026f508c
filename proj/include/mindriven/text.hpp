// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mindriven {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::optional<double> try_parse_double(std::string_view s);
std::optional<unsigned long long> try_parse_uint(std::string_view s);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

}  // namespace mindriven
