#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace cpl {

// FNV-1a over the file's bytes; used to fingerprint run artifacts.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

std::string fnv1a64_hex(std::uint64_t hash);

} // namespace cpl
