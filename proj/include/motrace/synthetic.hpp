#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "motrace/homography.hpp"
#include "motrace/image.hpp"
#include "motrace/motion.hpp"

namespace motrace {

/// A rectangle of scene content that moves by `delta` between frames.
struct MovingBlock {
  Roi rect;
  Point2 delta;
};

struct SceneSpec {
  int width = 641;
  int height = 361;
  std::uint64_t texture_seed = 1;
  Homography camera_h;  // frame A -> frame B, simulated hand-held motion
  std::vector<MovingBlock> blocks;
  double noise_sigma = 0.0;   // intensity std added to frame B
  double jitter_sigma = 0.0;  // px std of smooth background displacement

  /// Throws BlockOutOfBounds / InvalidParams.
  void validate() const;
};

struct GroundTruth {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // row-major; 0 background, k = blocks[k-1]
  std::vector<Point2> block_deltas;
  Homography camera_h;

  int label_at(Point2 p) const;  // nearest pixel; -1 outside
  /// Residual (raw - camera) that a perfect tracker reports at a frame-A
  /// point: H(o + delta) - H(o) for block points, 0 for rigid background.
  Point2 expected_residual(Point2 origin) const;
};

struct ScenePair {
  ImageGray frame_a;
  ImageGray frame_b;
  GroundTruth truth;
};

/// Band-limited seeded texture: three octaves of value noise with quintic
/// interpolation, defined on the whole plane with range [0, 1].
class ValueNoiseTexture {
 public:
  explicit ValueNoiseTexture(std::uint64_t seed) : seed_(seed) {}
  double operator()(double x, double y) const;

 private:
  double lattice(int octave, long ix, long iy) const;
  std::uint64_t seed_;
};

/// frame_a is the texture. frame_b moves each block's content by its delta,
/// then views the scene through camera_h, then adds Gaussian noise. Background
/// uncovered by a block is drawn from a second, independent texture.
ScenePair generate_pair(const SceneSpec& spec);

struct TruthScore {
  std::optional<double> precision;  // unset when nothing survived
  double recall = 0.0;
  int true_positives = 0;
  int surviving = 0;
  int block_resident = 0;  // tracked vectors whose origin is in a block
  std::vector<std::optional<double>> block_delta_error;  // mean px per block
};

/// A surviving vector is a true positive when its origin lies in a block
/// and its residual is within `tol` of the expected residual. Recall is over
/// the block-resident vectors of `tracked` (the unfiltered field).
TruthScore score_against_truth(const MotionField& filtered,
                               const MotionField& tracked,
                               const GroundTruth& truth, double tol);

/// Seeded hand-held camera motion about the frame centre: translation up to
/// `max_shift` px, rotation up to 0.5 deg, scale within 1%, small
/// perspective terms.
Homography random_camera_motion(std::uint64_t seed, int width, int height,
                                double max_shift = 6.0);

/// Scene used by the acceptance runs: random camera motion and, when
/// `with_block` is set, one block covering 5-15% of the frame moving
/// 5-15 px in a mostly downward direction.
SceneSpec make_demo_scene(std::uint64_t seed, bool with_block, int width = 641,
                          int height = 361);

}  // namespace motrace
