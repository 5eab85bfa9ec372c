#include <gtest/gtest.h>

#include "motrace/error.hpp"
#include "motrace/image.hpp"
#include "motrace/png_io.hpp"
#include "test_support.hpp"

using namespace motrace;
using motrace::testing::random_image;
using motrace::testing::TempDir;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no motrace::Error thrown";
  return ErrorCode::NotFound;
}

}  // namespace

TEST(Grayscale, UsesRec601Weights) {
  ImageRGB rgb(2, 1);
  rgb.at(0, 0, 0) = 255;
  rgb.at(1, 0, 1) = 255;
  const ImageGray g = to_grayscale(rgb);
  EXPECT_NEAR(g(0, 0), 0.299, 1e-12);
  EXPECT_NEAR(g(1, 0), 0.587, 1e-12);
}

TEST(Grayscale, RangeIsValidated) {
  EXPECT_EQ(code_of([] { ImageGray(2, 2, 1.5); }), ErrorCode::InvalidImage);
  EXPECT_EQ(code_of([] { ImageGray(2, 1, std::vector<double>{0.2, -0.1}); }),
            ErrorCode::InvalidImage);
}

TEST(Crop, NestedCropsCompose) {
  const ImageGray img = random_image(40, 30, 7);
  const Roi outer{5, 4, 30, 20};
  const Roi inner{3, 2, 10, 8};
  const ImageGray twice = crop_roi(crop_roi(img, outer), inner);
  const ImageGray once = crop_roi(img, Roi{8, 6, 10, 8});
  EXPECT_EQ(twice, once);
}

TEST(Crop, OutOfBoundsRoi) {
  const ImageGray img(10, 10);
  EXPECT_EQ(code_of([&] { crop_roi(img, Roi{5, 5, 6, 2}); }), ErrorCode::RoiOutOfBounds);
  EXPECT_EQ(code_of([&] { crop_roi(img, Roi{-1, 0, 2, 2}); }), ErrorCode::RoiOutOfBounds);
  EXPECT_EQ(code_of([&] { crop_roi(img, Roi{0, 0, 0, 2}); }), ErrorCode::RoiOutOfBounds);
}

TEST(Pyramid, HalvingSizes) {
  const Pyramid p = build_pyramid(ImageGray(640, 360), 3);
  ASSERT_EQ(p.size(), 3);
  EXPECT_EQ(p.levels[1].width(), 320);
  EXPECT_EQ(p.levels[1].height(), 180);
  EXPECT_EQ(p.levels[2].width(), 160);
  EXPECT_EQ(p.levels[2].height(), 90);
}

TEST(Pyramid, FloorHalvingOnOddSizes) {
  const Pyramid p = build_pyramid(ImageGray(641, 361), 3);
  EXPECT_EQ(p.levels[1].width(), 320);
  EXPECT_EQ(p.levels[1].height(), 180);
  EXPECT_EQ(p.levels[2].width(), 160);
  EXPECT_EQ(p.levels[2].height(), 90);
}

TEST(Pyramid, SingleLevelIsInput) {
  const ImageGray img = random_image(20, 18, 3);
  const Pyramid p = build_pyramid(img, 1);
  ASSERT_EQ(p.size(), 1);
  EXPECT_EQ(p.levels[0], img);
}

TEST(Pyramid, TooManyLevels) {
  EXPECT_EQ(code_of([] { build_pyramid(ImageGray(20, 20), 3); }), ErrorCode::TooManyLevels);
  EXPECT_EQ(code_of([] { build_pyramid(ImageGray(20, 20), 0); }), ErrorCode::TooManyLevels);
}

TEST(Pyramid, ConstantStaysConstant) {
  const Pyramid p = build_pyramid(ImageGray(64, 64, 0.25), 3);
  for (const auto& level : p.levels) {
    for (double v : level.values()) EXPECT_NEAR(v, 0.25, 1e-15);
  }
}

TEST(Gradient, ConstantImageIsZero) {
  const Gradient g = gradient(ImageGray(12, 9, 0.7));
  for (double v : g.gx.values()) EXPECT_EQ(v, 0.0);
  for (double v : g.gy.values()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, UnitRamp) {
  const int w = 20;
  ImageGray img(w, 10);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < w; ++x) img(x, y) = static_cast<double>(x) / w;
  }
  const Gradient g = gradient(img);
  for (int y = 1; y < 9; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      EXPECT_NEAR(g.gx(x, y), 1.0 / w, 1e-15);
      EXPECT_NEAR(g.gy(x, y), 0.0, 1e-15);
    }
  }
}

TEST(Gradient, StepEdgeHandEvaluated) {
  // Columns 0..4 are 0, columns 5..9 are 1. Sobel/8 on the 3x3 patch that
  // straddles the step: (1+2+1)/8 = 0.5 on both columns adjacent to it.
  ImageGray img(10, 6);
  for (int y = 0; y < 6; ++y) {
    for (int x = 5; x < 10; ++x) img(x, y) = 1.0;
  }
  const Gradient g = gradient(img);
  for (int y = 0; y < 6; ++y) {
    EXPECT_DOUBLE_EQ(g.gx(4, y), 0.5);
    EXPECT_DOUBLE_EQ(g.gx(5, y), 0.5);
    EXPECT_DOUBLE_EQ(g.gx(2, y), 0.0);
    EXPECT_DOUBLE_EQ(g.gx(8, y), 0.0);
    for (int x = 0; x < 10; ++x) EXPECT_DOUBLE_EQ(g.gy(x, y), 0.0);
  }
}

TEST(Gradient, IsLinear) {
  const ImageGray img = random_image(17, 13, 11);
  RealField scaled(17, 13);
  for (int y = 0; y < 13; ++y) {
    for (int x = 0; x < 17; ++x) scaled(x, y) = 0.37 * img(x, y);
  }
  const Gradient g = gradient(img);
  const Gradient gs = gradient(scaled);
  for (int y = 0; y < 13; ++y) {
    for (int x = 0; x < 17; ++x) {
      EXPECT_NEAR(gs.gx(x, y), 0.37 * g.gx(x, y), 1e-15);
      EXPECT_NEAR(gs.gy(x, y), 0.37 * g.gy(x, y), 1e-15);
    }
  }
}

TEST(Gradient, TooSmall) {
  EXPECT_EQ(code_of([] { gradient(ImageGray(2, 5)); }), ErrorCode::ImageTooSmall);
}

TEST(Bilinear, ExactAtNodes) {
  const ImageGray img = random_image(9, 7, 5);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) EXPECT_EQ(sample_bilinear(img, x, y), img(x, y));
  }
}

TEST(Bilinear, MidpointAndAffineBetweenNodes) {
  const ImageGray img = random_image(9, 7, 6);
  EXPECT_NEAR(sample_bilinear(img, 2.5, 3.0), 0.5 * (img(2, 3) + img(3, 3)), 1e-15);
  for (double t : {0.1, 0.25, 0.8}) {
    EXPECT_NEAR(sample_bilinear(img, 4.0, 1.0 + t),
                (1.0 - t) * img(4, 1) + t * img(4, 2), 1e-15);
  }
}

TEST(Bilinear, OutOfBounds) {
  const ImageGray img(5, 5);
  EXPECT_EQ(code_of([&] { sample_bilinear(img, -0.5, 1.0); }), ErrorCode::OutOfBounds);
  EXPECT_EQ(code_of([&] { sample_bilinear(img, 1.0, 4.01); }), ErrorCode::OutOfBounds);
  EXPECT_NO_THROW(sample_bilinear(img, 4.0, 4.0));
}

TEST(AbsoluteDifference, Examples) {
  const ImageGray a = random_image(8, 8, 1);
  const ImageGray same = absolute_difference(a, a);
  for (double v : same.values()) EXPECT_EQ(v, 0.0);
  const ImageGray full = absolute_difference(ImageGray(4, 4, 1.0), ImageGray(4, 4, 0.0));
  for (double v : full.values()) {
    EXPECT_EQ(v, 1.0);
  }
  EXPECT_EQ(code_of([] { absolute_difference(ImageGray(4, 4), ImageGray(4, 5)); }),
            ErrorCode::DimensionMismatch);
}

TEST(AbsoluteDifference, Symmetric) {
  const ImageGray a = random_image(11, 6, 2);
  const ImageGray b = random_image(11, 6, 3);
  EXPECT_EQ(absolute_difference(a, b), absolute_difference(b, a));
}

TEST(Brightness, GainAndClamp) {
  const ImageGray img = random_image(5, 5, 4);
  EXPECT_EQ(adjust_brightness(img, 1.0), img);
  EXPECT_EQ(adjust_brightness(ImageGray(1, 1, 0.6), 2.0)(0, 0), 1.0);
  EXPECT_EQ(code_of([&] { adjust_brightness(img, 0.0); }), ErrorCode::InvalidGain);
  ImageRGB rgb(1, 1);
  rgb.at(0, 0, 0) = 200;
  rgb.at(0, 0, 1) = 100;
  const ImageRGB out = adjust_brightness(rgb, 2.0);
  EXPECT_EQ(out.at(0, 0, 0), 255);
  EXPECT_EQ(out.at(0, 0, 1), 200);
  EXPECT_EQ(code_of([&] { adjust_brightness(rgb, -1.0); }), ErrorCode::InvalidGain);
}

TEST(Png, RoundTripRgbAndGray) {
  TempDir dir;
  ImageRGB rgb(7, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) {
      for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = static_cast<std::uint8_t>(x * 31 + y * 7 + c * 50);
    }
  }
  write_png(dir / "rgb.png", rgb);
  EXPECT_EQ(read_png(dir / "rgb.png"), rgb);
  EXPECT_EQ(read_png_size(dir / "rgb.png").width, 7);

  const ImageGray gray = to_grayscale(rgb);
  write_png(dir / "gray.png", gray);
  const ImageRGB back = read_png(dir / "gray.png");
  EXPECT_EQ(back, to_rgb(gray));
  EXPECT_EQ(decode_png(encode_png(rgb)), rgb);
}

TEST(Png, MissingFile) {
  EXPECT_EQ(code_of([] { read_png("/nonexistent/frame.png"); }), ErrorCode::IoError);
}
