#include "motrace/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "motrace/error.hpp"

namespace motrace {

namespace {

constexpr int kOctaves = 3;
constexpr double kCell[kOctaves] = {16.0, 8.0, 4.0};
constexpr double kWeight[kOctaves] = {1.0, 0.5, 0.25};
constexpr double kWeightSum = 1.75;

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

// Uniform [0, 1) and standard normal draws with a fixed algorithm, so a seed
// reproduces the same scene on every platform.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Sum of plane waves with random direction and phase; each component of the
// displacement has standard deviation sigma over the plane.
class JitterField {
 public:
  JitterField(std::uint64_t seed, double sigma) : sigma_(sigma) {
    if (sigma <= 0.0) return;
    std::mt19937_64 rng(mix(seed ^ 0x6a09e667f3bcc909ULL));
    for (auto& axis : waves_) {
      for (auto& w : axis) {
        const double wavelength = uniform(rng, 150.0, 300.0);
        const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double k = 2.0 * std::numbers::pi / wavelength;
        w = {k * std::cos(angle), k * std::sin(angle),
             uniform(rng, 0.0, 2.0 * std::numbers::pi)};
      }
    }
  }

  Point2 operator()(double x, double y) const {
    if (sigma_ <= 0.0) return {0.0, 0.0};
    const double amp = sigma_ * std::sqrt(2.0 / kWaves);
    double d[2] = {0.0, 0.0};
    for (int a = 0; a < 2; ++a) {
      for (const auto& w : waves_[a]) d[a] += std::cos(w.kx * x + w.ky * y + w.phase);
    }
    return {amp * d[0], amp * d[1]};
  }

 private:
  static constexpr int kWaves = 4;
  struct Wave {
    double kx = 0.0, ky = 0.0, phase = 0.0;
  };
  double sigma_;
  Wave waves_[2][kWaves];
};

bool inside_rect(const Roi& r, double x, double y) {
  return x >= r.x0 && y >= r.y0 && x < r.x0 + r.width && y < r.y0 + r.height;
}

bool inside_moved(const MovingBlock& b, double x, double y) {
  return x >= b.rect.x0 + b.delta.x && y >= b.rect.y0 + b.delta.y &&
         x < b.rect.x0 + b.rect.width + b.delta.x &&
         y < b.rect.y0 + b.rect.height + b.delta.y;
}

}  // namespace

double ValueNoiseTexture::lattice(int octave, long ix, long iy) const {
  std::uint64_t h = mix(seed_ ^ mix(static_cast<std::uint64_t>(octave)));
  h = mix(h ^ static_cast<std::uint64_t>(ix));
  h = mix(h ^ static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double ValueNoiseTexture::operator()(double x, double y) const {
  double acc = 0.0;
  for (int o = 0; o < kOctaves; ++o) {
    const double u = x / kCell[o];
    const double v = y / kCell[o];
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    const long ix = static_cast<long>(fu);
    const long iy = static_cast<long>(fv);
    const double tx = fade(u - fu);
    const double ty = fade(v - fv);
    const double top = lattice(o, ix, iy) * (1.0 - tx) + lattice(o, ix + 1, iy) * tx;
    const double bottom =
        lattice(o, ix, iy + 1) * (1.0 - tx) + lattice(o, ix + 1, iy + 1) * tx;
    acc += kWeight[o] * (top * (1.0 - ty) + bottom * ty);
  }
  return acc / kWeightSum;
}

void SceneSpec::validate() const {
  if (width < 16 || height < 16) {
    throw Error(ErrorCode::InvalidParams, "scene must be at least 16x16");
  }
  if (!(noise_sigma >= 0.0) || !(jitter_sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "noise and jitter sigmas must be >= 0");
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    const Roi& r = b.rect;
    const bool before = r.width > 0 && r.height > 0 && r.x0 >= 0 && r.y0 >= 0 &&
                        r.x0 + r.width <= width && r.y0 + r.height <= height;
    const bool after = r.x0 + b.delta.x >= 0.0 && r.y0 + b.delta.y >= 0.0 &&
                       r.x0 + r.width + b.delta.x <= width &&
                       r.y0 + r.height + b.delta.y <= height;
    if (!before || !after) {
      throw Error(ErrorCode::BlockOutOfBounds,
                  "block " + std::to_string(k) + " leaves the frame");
    }
  }
}

int GroundTruth::label_at(Point2 p) const {
  const long x = std::lround(p.x);
  const long y = std::lround(p.y);
  if (x < 0 || y < 0 || x >= width || y >= height) return -1;
  return labels[static_cast<std::size_t>(y) * width + x];
}

Point2 GroundTruth::expected_residual(Point2 origin) const {
  const int label = label_at(origin);
  if (label <= 0) return {0.0, 0.0};
  const Point2 delta = block_deltas[label - 1];
  return apply_homography(camera_h, origin + delta) -
         apply_homography(camera_h, origin);
}

ScenePair generate_pair(const SceneSpec& spec) {
  spec.validate();
  const ValueNoiseTexture texture(spec.texture_seed);
  // Whatever sat behind a block was never visible in frame A, so the band a
  // block uncovers gets its own texture rather than a copy of the block.
  const ValueNoiseTexture hidden(mix(spec.texture_seed ^ 0x510e527fade682d1ULL));
  const JitterField jitter(spec.texture_seed, spec.jitter_sigma);
  const Homography to_scene = spec.camera_h.inverse();
  const int w = spec.width;
  const int h = spec.height;

  ScenePair out{ImageGray(w, h), ImageGray(w, h), {}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.frame_a(x, y) = texture(x, y);
  }

  std::mt19937_64 noise_rng(mix(spec.texture_seed ^ 0xbb67ae8584caa73bULL));
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Point2 s = apply_homography(to_scene, {double(u), double(v)});
      double value = 0.0;
      const MovingBlock* owner = nullptr;
      for (const auto& b : spec.blocks) {
        if (inside_moved(b, s.x, s.y)) {
          owner = &b;
          break;
        }
      }
      if (owner) {
        value = texture(s.x - owner->delta.x, s.y - owner->delta.y);
      } else {
        const Point2 j = jitter(s.x, s.y);
        const bool uncovered = std::any_of(
            spec.blocks.begin(), spec.blocks.end(),
            [&](const MovingBlock& b) { return inside_rect(b.rect, s.x, s.y); });
        value = uncovered ? hidden(s.x - j.x, s.y - j.y) : texture(s.x - j.x, s.y - j.y);
      }
      if (spec.noise_sigma > 0.0) value += spec.noise_sigma * standard_normal(noise_rng);
      out.frame_b(u, v) = std::clamp(value, 0.0, 1.0);
    }
  }

  GroundTruth& t = out.truth;
  t.width = w;
  t.height = h;
  t.camera_h = spec.camera_h;
  t.labels.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
        if (spec.blocks[k].rect.contains(x, y)) {
          t.labels[static_cast<std::size_t>(y) * w + x] = static_cast<int>(k) + 1;
          break;
        }
      }
    }
  }
  for (const auto& b : spec.blocks) t.block_deltas.push_back(b.delta);
  return out;
}

TruthScore score_against_truth(const MotionField& filtered,
                               const MotionField& tracked,
                               const GroundTruth& truth, double tol) {
  TruthScore s;
  const std::size_t nblocks = truth.block_deltas.size();
  std::vector<double> err_sum(nblocks, 0.0);
  std::vector<int> err_count(nblocks, 0);
  auto label_of = [&](const MotionVector& v) {
    const int label = truth.label_at(v.origin);
    if (label < 0) {
      throw Error(ErrorCode::SceneMismatch, "field origin outside the scene");
    }
    return label;
  };

  for (const auto& v : tracked.vectors) {
    if (label_of(v) > 0) ++s.block_resident;
  }
  for (const auto& v : filtered.vectors) {
    ++s.surviving;
    const int label = label_of(v);
    if (label == 0) continue;
    const double err = (v.residual - truth.expected_residual(v.origin)).norm();
    err_sum[label - 1] += err;
    ++err_count[label - 1];
    if (err <= tol) ++s.true_positives;
  }
  if (s.surviving > 0) {
    s.precision = static_cast<double>(s.true_positives) / s.surviving;
  }
  s.recall = s.block_resident > 0
                 ? static_cast<double>(s.true_positives) / s.block_resident
                 : 0.0;
  for (std::size_t k = 0; k < nblocks; ++k) {
    s.block_delta_error.push_back(
        err_count[k] > 0 ? std::optional<double>(err_sum[k] / err_count[k])
                         : std::nullopt);
  }
  return s;
}

Homography random_camera_motion(std::uint64_t seed, int width, int height,
                                double max_shift) {
  std::mt19937_64 rng(mix(seed ^ 0x3c6ef372fe94f82bULL));
  const double cx = 0.5 * (width - 1);
  const double cy = 0.5 * (height - 1);
  const double angle = uniform(rng, -0.5, 0.5) * std::numbers::pi / 180.0;
  const double scale = uniform(rng, 0.99, 1.01);
  const double tx = uniform(rng, -max_shift, max_shift);
  const double ty = uniform(rng, -max_shift, max_shift);
  const double g = uniform(rng, -1e-5, 1e-5);
  const double hh = uniform(rng, -1e-5, 1e-5);

  Eigen::Matrix3d to_centre = Eigen::Matrix3d::Identity();
  to_centre(0, 2) = -cx;
  to_centre(1, 2) = -cy;
  Eigen::Matrix3d perspective = Eigen::Matrix3d::Identity();
  perspective(2, 0) = g;
  perspective(2, 1) = hh;
  Eigen::Matrix3d similarity = Eigen::Matrix3d::Identity();
  similarity(0, 0) = scale * std::cos(angle);
  similarity(0, 1) = -scale * std::sin(angle);
  similarity(1, 0) = scale * std::sin(angle);
  similarity(1, 1) = scale * std::cos(angle);
  Eigen::Matrix3d back = Eigen::Matrix3d::Identity();
  back(0, 2) = cx + tx;
  back(1, 2) = cy + ty;
  return Homography(back * similarity * perspective * to_centre);
}

SceneSpec make_demo_scene(std::uint64_t seed, bool with_block, int width,
                          int height) {
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.texture_seed = seed;
  spec.camera_h = random_camera_motion(seed, width, height);
  spec.noise_sigma = 0.005;
  if (!with_block) return spec;

  std::mt19937_64 rng(mix(seed ^ 0xa54ff53a5f1d36f1ULL));
  const double area_fraction = uniform(rng, 0.05, 0.15);
  const double aspect = uniform(rng, 0.7, 1.4);
  const double area = area_fraction * width * height;
  const int bw = static_cast<int>(std::lround(std::sqrt(area * aspect)));
  const int bh = static_cast<int>(std::lround(area / bw));
  const double magnitude = uniform(rng, 5.0, 15.0);
  const double direction =
      (90.0 + uniform(rng, -30.0, 30.0)) * std::numbers::pi / 180.0;
  const Point2 delta{magnitude * std::cos(direction), magnitude * std::sin(direction)};
  const int margin = 24;
  const int x0 = margin + static_cast<int>(uniform01(rng) * (width - bw - 2 * margin));
  const int y0 = margin + static_cast<int>(uniform01(rng) * (height - bh - 2 * margin));
  spec.blocks.push_back({Roi{x0, y0, bw, bh}, delta});
  return spec;
}

}  // namespace motrace
