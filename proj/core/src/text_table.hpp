#pragma once

#include <filesystem>
#include <utility>
#include <vector>

namespace msct::detail {

/// Rows of a two-column numeric text file. Columns may be separated by
/// whitespace or commas; blank lines and lines starting with '#' are skipped.
/// Throws LoadError naming the file and line on malformed input.
std::vector<std::pair<double, double>> read_two_columns(const std::filesystem::path& path);

/// Integer keV value of a grid entry, or LoadError if it is not integral.
int integral_kev(double value, const std::filesystem::path& path, std::size_t line);

} // namespace msct::detail
