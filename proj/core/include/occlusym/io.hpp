#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "occlusym/mask2d.hpp"

namespace occlusym {

// Writes to `path.tmp` and renames over `path`. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Binary PGM (P5, maxval 255). Set bits map to 255, unset to 0.
std::string encode_pgm(const BinaryMask& mask);
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);

// Grey levels as-is (e.g. 255 visible / 128 occluded / 0 background).
std::string encode_pgm(int width, int height, const std::vector<std::uint8_t>& levels);
void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& levels);

struct GreyImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> levels;
};

GreyImage decode_pgm(std::string_view bytes);
GreyImage read_pgm(const std::filesystem::path& path);

// Any non-zero level reads as set.
BinaryMask read_pgm_mask(const std::filesystem::path& path);

// 255 where visible, 128 where occluded, 0 elsewhere.
std::vector<std::uint8_t> composite_levels(const BinaryMask& visible, const BinaryMask& occluded);

}  // namespace occlusym
