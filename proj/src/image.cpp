#include "motrace/image.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "motrace/error.hpp"

namespace motrace {

namespace {

std::string dims(int w, int h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

void check_roi(int w, int h, const Roi& roi) {
  if (roi.width <= 0 || roi.height <= 0 || roi.x0 < 0 || roi.y0 < 0 ||
      roi.x0 + roi.width > w || roi.y0 + roi.height > h) {
    throw Error(ErrorCode::RoiOutOfBounds,
                "roi (" + std::to_string(roi.x0) + "," + std::to_string(roi.y0) +
                    "," + std::to_string(roi.width) + "," +
                    std::to_string(roi.height) + ") exceeds image " + dims(w, h));
  }
}

void check_gain(double gain) {
  if (!(gain > 0.0)) {
    throw Error(ErrorCode::InvalidGain, "gain must be positive");
  }
}

// 5-tap binomial [1 4 6 4 1] / 16, separable, replicated borders.
RealField binomial_blur(const RealField& img) {
  constexpr std::array<double, 5> k = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                       1.0 / 16};
  const int w = img.width();
  const int h = img.height();
  RealField tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -2; t <= 2; ++t) {
        acc += k[t + 2] * img(std::clamp(x + t, 0, w - 1), y);
      }
      tmp(x, y) = acc;
    }
  }
  RealField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -2; t <= 2; ++t) {
        acc += k[t + 2] * tmp(x, std::clamp(y + t, 0, h - 1));
      }
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

ImageRGB::ImageRGB(int width, int height)
    : ImageRGB(width, height,
               std::vector<std::uint8_t>(
                   static_cast<std::size_t>(std::max(width, 0)) *
                   std::max(height, 0) * 3)) {}

ImageRGB::ImageRGB(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidImage, "image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorCode::InvalidImage, "RGB buffer size does not match " +
                                             dims(width, height));
  }
}

RealField::RealField(int width, int height, double fill)
    : width_(width),
      height_(height),
      values_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0),
              fill) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidImage, "image dimensions must be positive");
  }
}

RealField::RealField(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidImage, "image dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::InvalidImage,
                "buffer size does not match " + dims(width, height));
  }
}

ImageGray::ImageGray(int width, int height, double fill)
    : RealField(width, height, fill) {
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw Error(ErrorCode::InvalidImage, "intensity outside [0, 1]");
  }
}

ImageGray::ImageGray(int width, int height, std::vector<double> values)
    : RealField(width, height, std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidImage, "intensity outside [0, 1]");
    }
  }
}

ImageGray to_grayscale(const ImageRGB& img) {
  ImageGray out(img.width(), img.height());
  auto dst = out.values();
  const auto src = img.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double luma = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] +
                        0.114 * src[3 * i + 2];
    dst[i] = std::clamp(luma / 255.0, 0.0, 1.0);
  }
  return out;
}

ImageRGB to_rgb(const ImageGray& img) {
  ImageRGB out(img.width(), img.height());
  auto dst = out.data();
  const auto src = img.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto q = static_cast<std::uint8_t>(
        std::lround(std::clamp(src[i], 0.0, 1.0) * 255.0));
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = q;
  }
  return out;
}

ImageGray crop_roi(const ImageGray& img, const Roi& roi) {
  check_roi(img.width(), img.height(), roi);
  ImageGray out(roi.width, roi.height);
  for (int v = 0; v < roi.height; ++v) {
    for (int u = 0; u < roi.width; ++u) {
      out(u, v) = img(roi.x0 + u, roi.y0 + v);
    }
  }
  return out;
}

ImageRGB crop_roi(const ImageRGB& img, const Roi& roi) {
  check_roi(img.width(), img.height(), roi);
  ImageRGB out(roi.width, roi.height);
  for (int v = 0; v < roi.height; ++v) {
    for (int u = 0; u < roi.width; ++u) {
      for (int c = 0; c < 3; ++c) {
        out.at(u, v, c) = img.at(roi.x0 + u, roi.y0 + v, c);
      }
    }
  }
  return out;
}

Pyramid build_pyramid(const ImageGray& img, int levels) {
  if (levels < 1) {
    throw Error(ErrorCode::TooManyLevels, "pyramid needs at least one level");
  }
  const int smallest = std::min(img.width(), img.height()) >> (levels - 1);
  if (levels > 31 || smallest < 16) {
    throw Error(ErrorCode::TooManyLevels,
                std::to_string(levels) + " levels on " +
                    dims(img.width(), img.height()) +
                    " leaves a level under 16 px");
  }
  Pyramid pyr;
  pyr.levels.reserve(levels);
  pyr.levels.push_back(img);
  for (int k = 1; k < levels; ++k) {
    const ImageGray& prev = pyr.levels.back();
    const RealField blurred = binomial_blur(prev);
    ImageGray next(prev.width() / 2, prev.height() / 2);
    for (int y = 0; y < next.height(); ++y) {
      for (int x = 0; x < next.width(); ++x) {
        next(x, y) = std::clamp(blurred(2 * x, 2 * y), 0.0, 1.0);
      }
    }
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

Gradient gradient(const RealField& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorCode::ImageTooSmall,
                "gradient needs at least 3x3, got " + dims(w, h));
  }
  Gradient g{RealField(w, h), RealField(w, h)};
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, w - 1);
      const double dx = (img(xp, ym) + 2.0 * img(xp, y) + img(xp, yp)) -
                        (img(xm, ym) + 2.0 * img(xm, y) + img(xm, yp));
      const double dy = (img(xm, yp) + 2.0 * img(x, yp) + img(xp, yp)) -
                        (img(xm, ym) + 2.0 * img(x, ym) + img(xp, ym));
      g.gx(x, y) = dx / 8.0;
      g.gy(x, y) = dy / 8.0;
    }
  }
  return g;
}

double sample_bilinear(const RealField& img, double x, double y) {
  if (!(x >= 0.0 && y >= 0.0 && x <= img.width() - 1 &&
        y <= img.height() - 1)) {
    throw Error(ErrorCode::OutOfBounds,
                "sample (" + std::to_string(x) + ", " + std::to_string(y) +
                    ") outside " + dims(img.width(), img.height()));
  }
  return detail::sample_unchecked(img, x, y);
}

ImageGray absolute_difference(const ImageGray& a, const ImageGray& b) {
  if (!a.same_size(b)) {
    throw Error(ErrorCode::DimensionMismatch,
                dims(a.width(), a.height()) + " vs " +
                    dims(b.width(), b.height()));
  }
  ImageGray out(a.width(), a.height());
  auto dst = out.values();
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::abs(va[i] - vb[i]);
  return out;
}

ImageGray adjust_brightness(const ImageGray& img, double gain) {
  check_gain(gain);
  ImageGray out = img;
  for (double& v : out.values()) v = std::min(v * gain, 1.0);
  return out;
}

ImageRGB adjust_brightness(const ImageRGB& img, double gain) {
  check_gain(gain);
  ImageRGB out = img;
  for (auto& v : out.data()) {
    v = static_cast<std::uint8_t>(std::min(std::lround(v * gain), 255L));
  }
  return out;
}

}  // namespace motrace
