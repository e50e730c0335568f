#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace stablelab {

// %.17g, with inf, -inf and nan spelled out
std::string format_number(double v);

std::string csv_string(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

// writes through a temporary file so a partial file never appears under `path`
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace stablelab
