#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace aft::io {

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string_view value);

}  // namespace aft::io
