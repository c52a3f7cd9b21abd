#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace audit {

/// "%.9g"; the numeric format of every CSV the toolkit writes.
std::string format_sig9(double v);

/// Fixed-point with `decimals` digits, used for SVG coordinates.
std::string format_fixed(double v, int decimals);

/// Splits one CSV line on commas (no quoting) and strips surrounding blanks
/// and a trailing '\r'.
std::vector<std::string> split_csv_line(std::string_view line);

std::string read_text_file(const std::filesystem::path& path);
/// Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace audit
