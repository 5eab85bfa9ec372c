#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace motrace {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
  double norm() const { return std::hypot(x, y); }
};

/// Axis-aligned pixel rectangle; top-left corner plus extent.
struct Roi {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Roi&, const Roi&) = default;
  bool contains(double x, double y) const {
    return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height;
  }
};

/// 8-bit interleaved RGB raster.
class ImageRGB {
 public:
  ImageRGB() = default;
  ImageRGB(int width, int height);
  ImageRGB(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(int x, int y, int c) const { return data_[index(x, y) + c]; }
  std::uint8_t& at(int x, int y, int c) { return data_[index(x, y) + c]; }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  friend bool operator==(const ImageRGB&, const ImageRGB&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Row-major real-valued raster with no range constraint (gradients,
/// corner responses).
class RealField {
 public:
  RealField() = default;
  RealField(int width, int height, double fill = 0.0);
  RealField(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return values_.empty(); }

  double operator()(int x, int y) const { return values_[index(x, y)]; }
  double& operator()(int x, int y) { return values_[index(x, y)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_size(const RealField& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const RealField&, const RealField&) = default;

 protected:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Grayscale intensities in [0, 1]. Constructors validate the range.
class ImageGray : public RealField {
 public:
  ImageGray() = default;
  ImageGray(int width, int height, double fill = 0.0);
  ImageGray(int width, int height, std::vector<double> values);
};

struct Pyramid {
  std::vector<ImageGray> levels;  // level 0 is full resolution

  int size() const { return static_cast<int>(levels.size()); }
};

struct Gradient {
  RealField gx;
  RealField gy;
};

ImageGray to_grayscale(const ImageRGB& img);

/// Promote to RGB, quantizing to 8 bits with round-to-nearest.
ImageRGB to_rgb(const ImageGray& img);

ImageGray crop_roi(const ImageGray& img, const Roi& roi);
ImageRGB crop_roi(const ImageRGB& img, const Roi& roi);

/// Each level is a 5-tap binomial blur of the previous one decimated by 2.
/// Requires min(width, height) / 2^(levels-1) >= 16.
Pyramid build_pyramid(const ImageGray& img, int levels);

/// Sobel responses scaled by 1/8, so a unit ramp has unit gradient. Edges
/// are replicated.
Gradient gradient(const RealField& img);

/// Bilinear sample; throws OutOfBounds outside [0, w-1] x [0, h-1].
double sample_bilinear(const RealField& img, double x, double y);

ImageGray absolute_difference(const ImageGray& a, const ImageGray& b);

ImageGray adjust_brightness(const ImageGray& img, double gain);
ImageRGB adjust_brightness(const ImageRGB& img, double gain);

namespace detail {

// Caller guarantees 0 <= x <= w-1 and 0 <= y <= h-1.
inline double sample_unchecked(const RealField& img, double x, double y) {
  const int w = img.width();
  const int h = img.height();
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 >= w - 1) x0 = w > 1 ? w - 2 : 0;
  if (y0 >= h - 1) y0 = h > 1 ? h - 2 : 0;
  const double fx = x - x0;
  const double fy = y - y0;
  const auto v = img.values();
  const std::size_t row = static_cast<std::size_t>(y0) * w;
  const int x1 = w > 1 ? x0 + 1 : x0;
  const std::size_t next_row = h > 1 ? row + w : row;
  const double top = v[row + x0] * (1.0 - fx) + v[row + x1] * fx;
  const double bottom = v[next_row + x0] * (1.0 - fx) + v[next_row + x1] * fx;
  return top * (1.0 - fy) + bottom * fy;
}

// Coordinates outside the image are clamped to the nearest edge.
inline double sample_clamped(const RealField& img, double x, double y) {
  return sample_unchecked(img, std::clamp(x, 0.0, img.width() - 1.0),
                          std::clamp(y, 0.0, img.height() - 1.0));
}

}  // namespace detail

}  // namespace motrace
