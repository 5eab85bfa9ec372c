#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "motrace/image.hpp"
#include "motrace/klt.hpp"

namespace motrace {

/// 3x3 projective transform acting on column vectors:
///   [x2 y2 w]^T = H [x1 y1 1]^T,  H = [[a b c] [d e f] [g h 1]].
/// Always stored with H(2,2) == 1 and |det| > 1e-12.
class Homography {
 public:
  Homography();  // identity
  explicit Homography(const Eigen::Matrix3d& m);

  static Homography from_row_major(std::span<const double> values);
  static Homography translation(double tx, double ty);

  const Eigen::Matrix3d& matrix() const { return m_; }
  std::array<double, 9> row_major() const;
  Homography inverse() const;
  /// (this * other): apply `other` first.
  Homography compose(const Homography& other) const;

  friend bool operator==(const Homography&, const Homography&) = default;

 private:
  Eigen::Matrix3d m_;
};

Point2 apply_homography(const Homography& h, Point2 p);

/// ||H - G||_F / ||G||_F.
double relative_frobenius_error(const Homography& estimate,
                                const Homography& truth);

/// Mean of the forward and backward transfer distances, px. +inf if either
/// point maps to infinity.
double symmetric_transfer_error(const Homography& h, Point2 p1, Point2 p2);

struct RobustFitParams {
  double inlier_threshold = 1.0;  // px, symmetric transfer error
  int max_iterations = 2000;
  double confidence = 0.995;
  int min_inliers = 10;

  void validate() const;
};

/// Least-squares homography from >= 4 correspondences via the DLT on
/// Hartley-normalized coordinates. Throws DegenerateConfiguration when the
/// solution is not invertible.
Homography fit_homography_dlt(std::span<const Point2> from,
                              std::span<const Point2> to);

struct HomographyFit {
  Homography h;
  std::vector<bool> inlier_mask;  // one entry per input pair
  int inlier_count = 0;
  int iterations = 0;
};

/// RANSAC over the tracked pairs: 4-point normalized-DLT hypotheses,
/// symmetric-transfer-error consensus with an adaptive iteration bound,
/// then an iterated least-squares refit on the inliers. Sampling is
/// driven by mt19937_64(seed) so results are reproducible.
HomographyFit estimate_homography(std::span<const MatchedPair> pairs,
                                  const RobustFitParams& params,
                                  std::uint64_t seed);

/// Inverse mapping: out(u, v) = img(H(u, v)); fill outside the source.
ImageGray warp_image(const ImageGray& img, const Homography& h, double fill);

/// Same as warp_image, also reporting which pixels had a source sample.
ImageGray warp_image(const ImageGray& img, const Homography& h, double fill,
                     ImageGray* valid_mask);

struct StabilizedPair {
  ImageGray reference;  // frame A
  ImageGray adjusted;   // frame B resampled into A's coordinates
  Homography h;         // A -> B
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
  ImageGray valid;      // 1 where `adjusted` has source data, else 0
};

StabilizedPair stabilize_pair(const ImageGray& a, const ImageGray& b,
                              std::span<const MatchedPair> pairs,
                              const RobustFitParams& params, std::uint64_t seed);

}  // namespace motrace
