#include "motrace/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "motrace/error.hpp"

namespace motrace {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path,
          const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::vector<std::uint8_t> encode_raw(const std::uint8_t* pixels, int width,
                                     int height, std::uint32_t format) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0,
                                 nullptr)) {
    throw Error(ErrorCode::IoError, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0,
                                 nullptr)) {
    throw Error(ErrorCode::IoError, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

ImageRGB decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::IoError, std::string("png decode: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::IoError, std::string("png decode: ") + image.message);
  }
  return ImageRGB(static_cast<int>(image.width), static_cast<int>(image.height),
                  std::move(pixels));
}

ImageRGB read_png(const std::filesystem::path& path) {
  try {
    return decode_png(slurp(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const ImageRGB& img) {
  return encode_raw(img.data().data(), img.width(), img.height(),
                    PNG_FORMAT_RGB);
}

std::vector<std::uint8_t> encode_png(const ImageGray& img) {
  std::vector<std::uint8_t> pixels(img.values().size());
  std::transform(img.values().begin(), img.values().end(), pixels.begin(),
                 [](double v) {
                   return static_cast<std::uint8_t>(
                       std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
                 });
  return encode_raw(pixels.data(), img.width(), img.height(), PNG_FORMAT_GRAY);
}

void write_png(const std::filesystem::path& path, const ImageRGB& img) {
  dump(path, encode_png(img));
}

void write_png(const std::filesystem::path& path, const ImageGray& img) {
  dump(path, encode_png(img));
}

PngSize read_png_size(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::IoError,
                path.string() + ": " + std::string(image.message));
  }
  PngSize size{static_cast<int>(image.width), static_cast<int>(image.height)};
  png_image_free(&image);
  return size;
}

}  // namespace motrace
