#pragma once

#include <cstdint>
#include <optional>

#include "motrace/image.hpp"
#include "motrace/motion.hpp"

namespace motrace {

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct ArrowStyle {
  double scale = 10.0;        // unified arrow-length multiplier
  Rgb color{255, 0, 0};
  double head_length = 6.0;   // px
  int line_width = 1;         // px

  void validate() const;
};

/// Endpoints of one arrow before rasterization.
struct ArrowGeometry {
  Point2 tail;        // feature origin in frame A
  Point2 tip;         // origin + scale * residual
  Point2 head_left;   // arrowhead barbs; equal to tip for a zero-length arrow
  Point2 head_right;
};

ArrowGeometry arrow_geometry(const MotionVector& v, const ArrowStyle& style);

struct OverlayProvenance {
  int frame_a = 0;
  int frame_b = 0;
  std::optional<double> ts;
  double scale = 0.0;
  double brightness_gain = 1.0;
};

struct OverlayImage {
  ImageRGB image;
  OverlayProvenance provenance;
};

/// Brightens the base frame, promotes it to RGB and draws one arrow per
/// vector (Bresenham, no antialiasing). Segments are clipped to the frame.
OverlayImage render_arrows(const ImageGray& base, const MotionField& field,
                           const ArrowStyle& style, double brightness_gain);

/// |a - b| rescaled so the largest difference is 1; all-zero stays zero.
ImageGray render_difference(const ImageGray& a, const ImageGray& b_adjusted);

/// Fraction of field origins that land on the brightest `quantile` of diff
/// after a square dilation of `radius` px. nullopt for an empty field.
std::optional<double> spatial_agreement(const MotionField& field,
                                        const ImageGray& diff, double quantile,
                                        int radius = 7);

}  // namespace motrace
