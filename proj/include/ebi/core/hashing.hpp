#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ebi {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ebi
