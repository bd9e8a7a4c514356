#ifndef MBTI_UTIL_HPP_
#define MBTI_UTIL_HPP_
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mbti {

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// Per-stage seed: the global seed plus the FNV-1a hash of the stage name.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stage) noexcept {
  return global_seed + fnv1a64(stage);
}

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mbti

#endif  // MBTI_UTIL_HPP_
