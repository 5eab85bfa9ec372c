#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "motrace/image.hpp"
#include "motrace/pipeline.hpp"
#include "motrace/png_io.hpp"
#include "motrace/synthetic.hpp"

namespace motrace::testing {

// Deleted on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("motrace_test_" + std::to_string(rd()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Smooth analytic texture, independent of the library's value noise: a sum
// of sinusoids at incommensurate frequencies. Exact sub-pixel translation is
// a phase shift.
inline double sine_texture(double x, double y) {
  const double v = 0.5 + 0.12 * std::sin(0.31 * x + 0.17 * y) +
                   0.10 * std::sin(0.23 * y - 0.41 * x + 1.3) +
                   0.08 * std::sin(0.53 * x + 0.61 * y + 0.7) +
                   0.07 * std::cos(0.71 * x - 0.29 * y + 2.1) +
                   0.06 * std::sin(0.13 * x + 0.83 * y + 0.4);
  return std::clamp(v, 0.0, 1.0);
}

inline ImageGray sine_image(int w, int h, double dx = 0.0, double dy = 0.0) {
  ImageGray img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img(x, y) = sine_texture(x - dx, y - dy);
  }
  return img;
}

inline ImageGray random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageGray img(w, h);
  for (double& v : img.values()) v = u(rng);
  return img;
}

// Writes a scene's frames as frame_000001.png and frame_000002.png.
inline ScenePair write_scene(const SceneSpec& spec, const std::filesystem::path& dir) {
  ScenePair scene = generate_pair(spec);
  std::filesystem::create_directories(dir);
  write_png(dir / frame_file_name(1), scene.frame_a);
  write_png(dir / frame_file_name(2), scene.frame_b);
  return scene;
}

}  // namespace motrace::testing
