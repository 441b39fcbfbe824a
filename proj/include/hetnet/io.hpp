#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace hetnet {

/// Whole-file read; throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`. Creates missing
/// parent directories. Throws IoError naming the path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// FNV-1a 64 of the bytes as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace hetnet
