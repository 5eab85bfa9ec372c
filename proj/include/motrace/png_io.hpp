#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "motrace/image.hpp"

namespace motrace {

// 8-bit PNG only. Gray files are promoted to RGB on read.

ImageRGB read_png(const std::filesystem::path& path);
ImageRGB decode_png(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_png(const ImageRGB& img);
std::vector<std::uint8_t> encode_png(const ImageGray& img);

void write_png(const std::filesystem::path& path, const ImageRGB& img);
void write_png(const std::filesystem::path& path, const ImageGray& img);

struct PngSize {
  int width = 0;
  int height = 0;
};

/// Reads only the header.
PngSize read_png_size(const std::filesystem::path& path);

}  // namespace motrace
