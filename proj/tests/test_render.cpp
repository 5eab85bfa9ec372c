#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "motrace/error.hpp"
#include "motrace/features.hpp"
#include "motrace/klt.hpp"
#include "motrace/render.hpp"
#include "motrace/synthetic.hpp"
#include "test_support.hpp"

using namespace motrace;

namespace {

MotionVector vec_at(Point2 origin, Point2 residual) {
  MotionVector v;
  v.origin = origin;
  v.residual = residual;
  v.raw = residual;
  v.magnitude = residual.norm();
  return v;
}

bool is_color(const ImageRGB& img, int x, int y, Rgb c) {
  return img.at(x, y, 0) == c.r && img.at(x, y, 1) == c.g && img.at(x, y, 2) == c.b;
}

}  // namespace

TEST(Arrows, EmptyFieldIsBrightenedBase) {
  const ImageGray base = motrace::testing::random_image(30, 20, 1);
  const OverlayImage o = render_arrows(base, MotionField{}, ArrowStyle{}, 1.8);
  EXPECT_EQ(o.image, to_rgb(adjust_brightness(base, 1.8)));
  EXPECT_EQ(o.provenance.brightness_gain, 1.8);
  EXPECT_EQ(o.provenance.scale, 10.0);
}

TEST(Arrows, TipIsOriginPlusScaledResidual) {
  const ArrowGeometry g = arrow_geometry(vec_at({40, 30}, {1, 2}), ArrowStyle{});
  EXPECT_EQ(g.tail, (Point2{40, 30}));
  EXPECT_DOUBLE_EQ(g.tip.x - g.tail.x, 10.0);
  EXPECT_DOUBLE_EQ(g.tip.y - g.tail.y, 20.0);
}

TEST(Arrows, DoublingScaleDoublesTipDisplacement) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  ArrowStyle s1, s2;
  s1.scale = 3.7;
  s2.scale = 7.4;
  for (int i = 0; i < 200; ++i) {
    const MotionVector v = vec_at({100 + u(rng), 80 + u(rng)}, {u(rng), u(rng)});
    const ArrowGeometry a = arrow_geometry(v, s1);
    const ArrowGeometry b = arrow_geometry(v, s2);
    EXPECT_EQ(a.tip, v.origin + s1.scale * v.residual);
    EXPECT_NEAR((b.tip - b.tail - 2.0 * (a.tip - a.tail)).norm(), 0.0, 1e-12);
  }
}

TEST(Arrows, HeadBarbsAreSymmetricAndBehindTip) {
  const ArrowGeometry g = arrow_geometry(vec_at({50, 50}, {0, 2}), ArrowStyle{});
  EXPECT_NEAR((g.head_left - g.tip).norm(), 6.0, 1e-12);
  EXPECT_NEAR((g.head_right - g.tip).norm(), 6.0, 1e-12);
  EXPECT_NEAR(g.head_left.y, g.head_right.y, 1e-12);
  EXPECT_LT(g.head_left.y, g.tip.y);
  EXPECT_NEAR(g.head_left.x - g.tip.x, -(g.head_right.x - g.tip.x), 1e-12);
}

TEST(Arrows, ZeroResidualHasDegenerateHead) {
  const ArrowGeometry g = arrow_geometry(vec_at({5, 5}, {0, 0}), ArrowStyle{});
  EXPECT_EQ(g.tip, g.tail);
  EXPECT_EQ(g.head_left, g.tip);
  EXPECT_EQ(g.head_right, g.tip);
}

TEST(Arrows, RasterCoversTailAndTip) {
  const ImageGray base(60, 50, 0.1);
  MotionField f;
  f.vectors = {vec_at({10, 10}, {2.0, 1.5})};
  const OverlayImage o = render_arrows(base, f, ArrowStyle{}, 1.0);
  EXPECT_TRUE(is_color(o.image, 10, 10, Rgb{}));
  EXPECT_TRUE(is_color(o.image, 30, 25, Rgb{}));
  EXPECT_FALSE(is_color(o.image, 50, 5, Rgb{}));
}

TEST(Arrows, ClippedAtBorderWithoutOverrun) {
  const ImageGray base(64, 48, 0.2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> px(0.0, 63.0), py(0.0, 47.0), d(-40.0, 40.0);
  MotionField f;
  for (int i = 0; i < 300; ++i) f.vectors.push_back(vec_at({px(rng), py(rng)}, {d(rng), d(rng)}));
  f.vectors.push_back(vec_at({60, 24}, {5, 0}));
  ArrowStyle style;
  style.scale = 50.0;
  style.line_width = 3;
  const OverlayImage o = render_arrows(base, f, style, 1.0);
  ASSERT_EQ(o.image.width(), 64);
  ASSERT_EQ(o.image.height(), 48);
  ASSERT_EQ(o.image.data().size(), 64u * 48u * 3u);
  EXPECT_TRUE(is_color(o.image, 63, 24, Rgb{}));
}

TEST(Arrows, InvalidStyle) {
  ArrowStyle s;
  s.scale = 0.0;
  EXPECT_THROW(render_arrows(ImageGray(4, 4), MotionField{}, s, 1.0), Error);
}

TEST(Difference, IdenticalInputsAreBlack) {
  const ImageGray a = motrace::testing::random_image(20, 20, 5);
  const ImageGray d = render_difference(a, a);
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(Difference, SinglePixelIsMaximal) {
  ImageGray a(10, 8, 0.2);
  ImageGray b = a;
  b(3, 4) = 0.7;
  const ImageGray d = render_difference(a, b);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 10; ++x) EXPECT_EQ(d(x, y), (x == 3 && y == 4) ? 1.0 : 0.0);
  }
  EXPECT_THROW(render_difference(ImageGray(3, 3), ImageGray(3, 4)), Error);
}

TEST(Difference, ZeroIffEqual) {
  ImageGray a = motrace::testing::random_image(16, 16, 6);
  ImageGray b = a;
  b(15, 15) = a(15, 15) > 0.5 ? 0.0 : 1.0;
  double sum = 0.0;
  const ImageGray d = render_difference(a, b);
  for (double v : d.values()) sum += v;
  EXPECT_GT(sum, 0.0);
}

TEST(Difference, BrightRegionMatchesBlockFootprint) {
  SceneSpec spec;
  spec.texture_seed = 51;
  spec.noise_sigma = 0.005;
  const Roi rect{220, 100, 140, 120};
  const Point2 delta{0.0, 9.0};
  spec.blocks.push_back({rect, delta});
  const ScenePair scene = generate_pair(spec);
  const ImageGray d = render_difference(scene.frame_a, scene.frame_b);

  // Bright = local mean over an LK-window-sized box above Otsu's threshold,
  // which separates the noise floor from the block without a tuned constant.
  const int w = d.width(), h = d.height(), r = TrackParams{}.window / 2;
  RealField mean(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      int n = 0;
      for (int v = std::max(0, y - r); v <= std::min(h - 1, y + r); ++v) {
        for (int u = std::max(0, x - r); u <= std::min(w - 1, x + r); ++u, ++n) s += d(u, v);
      }
      mean(x, y) = s / n;
    }
  }
  std::vector<double> hist(256, 0.0);
  for (double v : mean.values()) hist[std::min(255, static_cast<int>(v * 256.0))] += 1.0;
  double total = 0.0, moment = 0.0;
  for (int k = 0; k < 256; ++k) {
    total += hist[k];
    moment += k * hist[k];
  }
  double w_low = 0.0, m_low = 0.0, best = -1.0;
  int cut = 0;
  for (int k = 0; k < 255; ++k) {
    w_low += hist[k];
    m_low += k * hist[k];
    if (w_low == 0.0 || w_low == total) continue;
    const double mu0 = m_low / w_low, mu1 = (moment - m_low) / (total - w_low);
    const double between = w_low * (total - w_low) * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      cut = k;
    }
  }
  const double threshold = (cut + 1) / 256.0;

  const Roi moved{rect.x0, rect.y0, rect.width, rect.height + static_cast<int>(delta.y)};
  int inter = 0, uni = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool bright = mean(x, y) >= threshold;
      const bool foot = moved.contains(x, y);
      inter += bright && foot;
      uni += bright || foot;
    }
  }
  EXPECT_GE(static_cast<double>(inter) / uni, 0.8);
}

TEST(Agreement, OriginsOnBrightestPixels) {
  ImageGray d(50, 40);
  d(10, 10) = 1.0;
  d(30, 20) = 0.9;
  MotionField f;
  f.vectors = {vec_at({10, 10}, {0, 5}), vec_at({30, 20}, {0, 5})};
  const auto a = spatial_agreement(f, d, 0.001, 0);
  ASSERT_TRUE(a.has_value());
  EXPECT_EQ(*a, 1.0);
  f.vectors.push_back(vec_at({45, 35}, {0, 5}));
  EXPECT_NEAR(*spatial_agreement(f, d, 0.001, 0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(*spatial_agreement(f, d, 0.001, 15), 1.0, 1e-12);
}

TEST(Agreement, EmptyFieldIsUndefined) {
  EXPECT_FALSE(spatial_agreement(MotionField{}, ImageGray(10, 10), 0.05).has_value());
}

TEST(Agreement, InvalidArguments) {
  MotionField f;
  f.vectors = {vec_at({1, 1}, {1, 1})};
  EXPECT_THROW(spatial_agreement(f, ImageGray(10, 10), 0.0), Error);
  EXPECT_THROW(spatial_agreement(f, ImageGray(10, 10), 0.05, -1), Error);
  f.vectors = {vec_at({12, 1}, {1, 1})};
  EXPECT_THROW(spatial_agreement(f, ImageGray(10, 10), 0.05), Error);
}
