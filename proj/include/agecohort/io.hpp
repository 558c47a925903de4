#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace agecohort::io {

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
// Appends under an exclusive advisory lock on the file.
void append_file(const std::filesystem::path& path, std::string_view content);

}  // namespace agecohort::io
