#include "motrace/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "motrace/error.hpp"

namespace motrace {

namespace {

constexpr double kHeadAngle = 25.0 * std::numbers::pi / 180.0;

// Liang-Barsky clip of segment p->q against [lo, hi] on both axes.
bool clip_segment(Point2& p, Point2& q, double lo_x, double lo_y, double hi_x,
                  double hi_y) {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  double t0 = 0.0, t1 = 1.0;
  const double pk[4] = {-dx, dx, -dy, dy};
  const double qk[4] = {p.x - lo_x, hi_x - p.x, p.y - lo_y, hi_y - p.y};
  for (int i = 0; i < 4; ++i) {
    if (pk[i] == 0.0) {
      if (qk[i] < 0.0) return false;
      continue;
    }
    const double t = qk[i] / pk[i];
    if (pk[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  const Point2 start = p;
  p = start + t0 * Point2{dx, dy};
  q = start + t1 * Point2{dx, dy};
  return true;
}

void stamp(ImageRGB& img, int x, int y, int width, Rgb c) {
  const int lo = -(width - 1) / 2;
  for (int oy = lo; oy < lo + width; ++oy) {
    for (int ox = lo; ox < lo + width; ++ox) {
      const int px = x + ox;
      const int py = y + oy;
      if (px < 0 || py < 0 || px >= img.width() || py >= img.height()) continue;
      img.at(px, py, 0) = c.r;
      img.at(px, py, 1) = c.g;
      img.at(px, py, 2) = c.b;
    }
  }
}

void draw_segment(ImageRGB& img, Point2 p, Point2 q, int width, Rgb c) {
  if (!clip_segment(p, q, -0.5, -0.5, img.width() - 0.5, img.height() - 0.5)) {
    return;
  }
  int x0 = static_cast<int>(std::lround(p.x));
  int y0 = static_cast<int>(std::lround(p.y));
  const int x1 = static_cast<int>(std::lround(q.x));
  const int y1 = static_cast<int>(std::lround(q.y));
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    stamp(img, x0, y0, width, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

void ArrowStyle::validate() const {
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParams, "arrow scale must be > 0");
  if (!(head_length >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "head_length must be >= 0");
  }
  if (line_width < 1) throw Error(ErrorCode::InvalidParams, "line_width must be >= 1");
}

ArrowGeometry arrow_geometry(const MotionVector& v, const ArrowStyle& style) {
  ArrowGeometry g;
  g.tail = v.origin;
  g.tip = v.origin + style.scale * v.residual;
  g.head_left = g.head_right = g.tip;
  const Point2 shaft = g.tip - g.tail;
  const double len = shaft.norm();
  if (len > 0.0) {
    const double back = std::atan2(-shaft.y, -shaft.x);
    const double head = std::min(style.head_length, len);
    g.head_left = g.tip + Point2{head * std::cos(back + kHeadAngle),
                                 head * std::sin(back + kHeadAngle)};
    g.head_right = g.tip + Point2{head * std::cos(back - kHeadAngle),
                                  head * std::sin(back - kHeadAngle)};
  }
  return g;
}

OverlayImage render_arrows(const ImageGray& base, const MotionField& field,
                           const ArrowStyle& style, double brightness_gain) {
  style.validate();
  OverlayImage out;
  out.image = to_rgb(adjust_brightness(base, brightness_gain));
  out.provenance = {field.frame_a, field.frame_b, field.ts_applied, style.scale,
                    brightness_gain};
  for (const auto& v : field.vectors) {
    const ArrowGeometry g = arrow_geometry(v, style);
    draw_segment(out.image, g.tail, g.tip, style.line_width, style.color);
    if (g.head_left != g.tip) {
      draw_segment(out.image, g.tip, g.head_left, style.line_width, style.color);
      draw_segment(out.image, g.tip, g.head_right, style.line_width, style.color);
    }
  }
  return out;
}

ImageGray render_difference(const ImageGray& a, const ImageGray& b_adjusted) {
  ImageGray diff = absolute_difference(a, b_adjusted);
  const auto values = diff.values();
  const double peak = *std::max_element(values.begin(), values.end());
  if (peak > 0.0) {
    for (double& v : diff.values()) v /= peak;
  }
  return diff;
}

std::optional<double> spatial_agreement(const MotionField& field,
                                        const ImageGray& diff, double quantile,
                                        int radius) {
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "quantile must be in (0, 1]");
  }
  if (radius < 0) throw Error(ErrorCode::InvalidParams, "radius must be >= 0");
  if (field.vectors.empty()) return std::nullopt;

  const int w = diff.width();
  const int h = diff.height();
  std::vector<double> sorted(diff.values().begin(), diff.values().end());
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(quantile * sorted.size())));
  std::nth_element(sorted.begin(), sorted.begin() + (keep - 1), sorted.end(),
                   std::greater<>());
  const double cutoff = sorted[keep - 1];

  // Separable square dilation of the bright set.
  std::vector<std::uint8_t> bright(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < bright.size(); ++i) {
    const double v = diff.values()[i];
    bright[i] = v >= cutoff && v > 0.0;
  }
  std::vector<std::uint8_t> rows(bright.size()), dilated(bright.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t any = 0;
      for (int t = std::max(0, x - radius); !any && t <= std::min(w - 1, x + radius); ++t) {
        any = bright[static_cast<std::size_t>(y) * w + t];
      }
      rows[static_cast<std::size_t>(y) * w + x] = any;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t any = 0;
      for (int t = std::max(0, y - radius); !any && t <= std::min(h - 1, y + radius); ++t) {
        any = rows[static_cast<std::size_t>(t) * w + x];
      }
      dilated[static_cast<std::size_t>(y) * w + x] = any;
    }
  }

  int hits = 0;
  for (const auto& v : field.vectors) {
    const long x = std::lround(v.origin.x);
    const long y = std::lround(v.origin.y);
    if (x < 0 || y < 0 || x >= w || y >= h) {
      throw Error(ErrorCode::OutOfBounds, "field origin outside the difference image");
    }
    hits += dilated[static_cast<std::size_t>(y) * w + x];
  }
  return static_cast<double>(hits) / field.vectors.size();
}

}  // namespace motrace
