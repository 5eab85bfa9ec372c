#include "motrace/homography.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "motrace/error.hpp"

namespace motrace {

namespace {

constexpr double kDegenerateEps = 1e-12;

struct Normalizer {
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
};

// Centroid to the origin, mean distance sqrt(2).
Normalizer hartley(std::span<const Point2> pts) {
  double cx = 0.0, cy = 0.0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= pts.size();
  cy /= pts.size();
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= pts.size();
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Normalizer n;
  n.t << s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0;
  return n;
}

// True when some 3 of the 4 points are (nearly) collinear. The triangle
// area is compared against the squared extent so the test is scale-free.
bool has_collinear_triple(const std::array<Point2, 4>& p) {
  double extent2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      extent2 = std::max(extent2, std::pow((p[i] - p[j]).norm(), 2));
    }
  }
  if (extent2 <= 0.0) return true;
  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    const Point2 u = p[t[1]] - p[t[0]];
    const Point2 v = p[t[2]] - p[t[0]];
    const double twice_area = std::abs(u.x * v.y - u.y * v.x);
    if (twice_area < 1e-3 * extent2) return true;
  }
  return false;
}

struct Consensus {
  int count = 0;
  double cost = std::numeric_limits<double>::infinity();
};

// Inlier count with a truncated-error cost as tie-break. Swapping this
// function is the hook for other robust scoring rules.
Consensus score_hypothesis(const Homography& h, std::span<const Point2> from,
                           std::span<const Point2> to, double threshold,
                           std::vector<bool>* mask = nullptr) {
  Consensus c{0, 0.0};
  if (mask) mask->assign(from.size(), false);
  for (std::size_t i = 0; i < from.size(); ++i) {
    const double e = symmetric_transfer_error(h, from[i], to[i]);
    if (e <= threshold) {
      ++c.count;
      c.cost += e;
      if (mask) (*mask)[i] = true;
    } else {
      c.cost += threshold;
    }
  }
  return c;
}

bool better(const Consensus& a, const Consensus& b) {
  return a.count > b.count || (a.count == b.count && a.cost < b.cost);
}

}  // namespace

Homography::Homography() : m_(Eigen::Matrix3d::Identity()) {}

Homography::Homography(const Eigen::Matrix3d& m) {
  if (!m.allFinite() || std::abs(m(2, 2)) < kDegenerateEps) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "homography cannot be normalized (H33 ~ 0)");
  }
  m_ = m / m(2, 2);
  if (!(std::abs(m_.determinant()) > kDegenerateEps)) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography is singular");
  }
}

Homography Homography::from_row_major(std::span<const double> values) {
  if (values.size() != 9) {
    throw Error(ErrorCode::ParseError, "homography needs 9 values");
  }
  Eigen::Matrix3d m;
  m << values[0], values[1], values[2], values[3], values[4], values[5],
      values[6], values[7], values[8];
  return Homography(m);
}

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

std::array<double, 9> Homography::row_major() const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 3 + c] = m_(r, c);
  }
  return out;
}

Homography Homography::inverse() const { return Homography(m_.inverse()); }

Homography Homography::compose(const Homography& other) const {
  return Homography(m_ * other.m_);
}

Point2 apply_homography(const Homography& h, Point2 p) {
  const auto& m = h.matrix();
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (!(std::abs(w) > kDegenerateEps)) {
    throw Error(ErrorCode::DegeneratePoint,
                "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") maps to infinity");
  }
  return {(m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w,
          (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w};
}

double relative_frobenius_error(const Homography& estimate,
                                const Homography& truth) {
  return (estimate.matrix() - truth.matrix()).norm() / truth.matrix().norm();
}

double symmetric_transfer_error(const Homography& h, Point2 p1, Point2 p2) {
  const auto& m = h.matrix();
  const double w = m(2, 0) * p1.x + m(2, 1) * p1.y + m(2, 2);
  if (!(std::abs(w) > kDegenerateEps)) return std::numeric_limits<double>::infinity();
  const Point2 fwd{(m(0, 0) * p1.x + m(0, 1) * p1.y + m(0, 2)) / w,
                   (m(1, 0) * p1.x + m(1, 1) * p1.y + m(1, 2)) / w};
  const Eigen::Matrix3d inv = m.inverse();
  const double wi = inv(2, 0) * p2.x + inv(2, 1) * p2.y + inv(2, 2);
  if (!(std::abs(wi) > kDegenerateEps)) return std::numeric_limits<double>::infinity();
  const Point2 bwd{(inv(0, 0) * p2.x + inv(0, 1) * p2.y + inv(0, 2)) / wi,
                   (inv(1, 0) * p2.x + inv(1, 1) * p2.y + inv(1, 2)) / wi};
  return 0.5 * ((fwd - p2).norm() + (bwd - p1).norm());
}

void RobustFitParams::validate() const {
  if (!(inlier_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "inlier_threshold must be > 0");
  }
  if (max_iterations < 1) {
    throw Error(ErrorCode::InvalidParams, "max_iterations must be >= 1");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "confidence must be in (0, 1)");
  }
  if (min_inliers < 4) {
    throw Error(ErrorCode::InvalidParams, "min_inliers must be >= 4");
  }
}

Homography fit_homography_dlt(std::span<const Point2> from,
                              std::span<const Point2> to) {
  if (from.size() != to.size() || from.size() < 4) {
    throw Error(ErrorCode::InsufficientPairs,
                "DLT needs at least 4 correspondences");
  }
  const Normalizer n1 = hartley(from);
  const Normalizer n2 = hartley(to);

  // Accumulate A^T A directly; A has two rows per correspondence.
  Eigen::Matrix<double, 9, 9> ata = Eigen::Matrix<double, 9, 9>::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    const Eigen::Vector3d p = n1.t * Eigen::Vector3d(from[i].x, from[i].y, 1.0);
    const Eigen::Vector3d q = n2.t * Eigen::Vector3d(to[i].x, to[i].y, 1.0);
    Eigen::Matrix<double, 9, 1> r1, r2;
    r1 << -p.x(), -p.y(), -1.0, 0.0, 0.0, 0.0, q.x() * p.x(), q.x() * p.y(), q.x();
    r2 << 0.0, 0.0, 0.0, -p.x(), -p.y(), -1.0, q.y() * p.x(), q.y() * p.y(), q.y();
    ata.noalias() += r1 * r1.transpose();
    ata.noalias() += r2 * r2.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> solver(ata);
  const Eigen::Matrix<double, 9, 1> h = solver.eigenvectors().col(0);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography(n2.t.inverse() * hn * n1.t);
}

HomographyFit estimate_homography(std::span<const MatchedPair> pairs,
                                  const RobustFitParams& params,
                                  std::uint64_t seed) {
  params.validate();
  std::vector<std::size_t> index;
  std::vector<Point2> from, to;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].status != TrackStatus::Tracked) continue;
    index.push_back(i);
    from.push_back(pairs[i].p1);
    to.push_back(pairs[i].p2);
  }
  const std::size_t n = from.size();
  if (n < 4) {
    throw Error(ErrorCode::InsufficientPairs,
                std::to_string(n) + " tracked pairs, need at least 4");
  }

  std::mt19937_64 rng(seed);
  std::optional<Homography> best;
  Consensus best_score;
  best_score.count = -1;
  long needed = params.max_iterations;
  int it = 0;
  for (; it < needed; ++it) {
    std::array<std::size_t, 4> pick{};
    for (int k = 0; k < 4; ++k) {
      bool fresh = false;
      while (!fresh) {
        pick[k] = static_cast<std::size_t>(rng() % n);
        fresh = std::find(pick.begin(), pick.begin() + k, pick[k]) ==
                pick.begin() + k;
      }
    }
    std::array<Point2, 4> s1, s2;
    for (int k = 0; k < 4; ++k) {
      s1[k] = from[pick[k]];
      s2[k] = to[pick[k]];
    }
    if (has_collinear_triple(s1) || has_collinear_triple(s2)) continue;

    Homography h;
    try {
      h = fit_homography_dlt(s1, s2);
    } catch (const Error&) {
      continue;
    }
    const Consensus c =
        score_hypothesis(h, from, to, params.inlier_threshold);
    if (!best || better(c, best_score)) {
      best = h;
      best_score = c;
      const double w = static_cast<double>(c.count) / n;
      const double miss = 1.0 - std::pow(w, 4);
      if (miss <= 0.0) {
        needed = it + 1;
      } else if (miss < 1.0) {
        const double k = std::log(1.0 - params.confidence) / std::log(miss);
        needed = std::min<long>(params.max_iterations,
                                static_cast<long>(std::ceil(k)));
      }
    }
  }
  if (!best) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "no non-degenerate 4-point sample among " + std::to_string(n) +
                    " pairs");
  }

  // Least-squares refits on the consensus set until it stops changing. The
  // 4-point model is always replaced; among the refits the lowest truncated
  // cost wins, since a fit biased by a partial first consensus set can admit
  // one stray outlier more than the correct fit does.
  std::vector<bool> mask;
  score_hypothesis(*best, from, to, params.inlier_threshold, &mask);
  Homography h = *best;
  Consensus current;
  std::vector<bool> best_mask;
  for (int round = 0; round < 10; ++round) {
    std::vector<Point2> in1, in2;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) {
        in1.push_back(from[i]);
        in2.push_back(to[i]);
      }
    }
    if (in1.size() < 4) break;
    Homography refit;
    try {
      refit = fit_homography_dlt(in1, in2);
    } catch (const Error&) {
      break;
    }
    std::vector<bool> refit_mask;
    const Consensus c =
        score_hypothesis(refit, from, to, params.inlier_threshold, &refit_mask);
    if (round == 0 || c.cost < current.cost) {
      h = refit;
      current = c;
      best_mask = refit_mask;
    }
    if (refit_mask == mask) break;
    mask = std::move(refit_mask);
  }
  if (best_mask.empty()) {
    current = score_hypothesis(h, from, to, params.inlier_threshold, &best_mask);
  }
  mask = std::move(best_mask);

  if (current.count < params.min_inliers) {
    throw Error(ErrorCode::NoConsensus,
                std::to_string(current.count) + " inliers of " +
                    std::to_string(n) + " tracked pairs, need " +
                    std::to_string(params.min_inliers));
  }

  HomographyFit fit;
  fit.h = h;
  fit.inlier_mask.assign(pairs.size(), false);
  for (std::size_t i = 0; i < n; ++i) fit.inlier_mask[index[i]] = mask[i];
  fit.inlier_count = current.count;
  fit.iterations = it;
  return fit;
}

ImageGray warp_image(const ImageGray& img, const Homography& h, double fill) {
  return warp_image(img, h, fill, nullptr);
}

ImageGray warp_image(const ImageGray& img, const Homography& h, double fill,
                     ImageGray* valid_mask) {
  ImageGray out(img.width(), img.height(), fill);
  if (valid_mask) *valid_mask = ImageGray(img.width(), img.height(), 0.0);
  const double max_x = img.width() - 1;
  const double max_y = img.height() - 1;
  const auto& m = h.matrix();
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      const double w = m(2, 0) * u + m(2, 1) * v + m(2, 2);
      if (!(std::abs(w) > kDegenerateEps)) continue;
      const double x = (m(0, 0) * u + m(0, 1) * v + m(0, 2)) / w;
      const double y = (m(1, 0) * u + m(1, 1) * v + m(1, 2)) / w;
      if (!(x >= 0.0 && y >= 0.0 && x <= max_x && y <= max_y)) continue;
      out(u, v) = detail::sample_unchecked(img, x, y);
      if (valid_mask) (*valid_mask)(u, v) = 1.0;
    }
  }
  return out;
}

StabilizedPair stabilize_pair(const ImageGray& a, const ImageGray& b,
                              std::span<const MatchedPair> pairs,
                              const RobustFitParams& params, std::uint64_t seed) {
  if (!a.same_size(b)) {
    throw Error(ErrorCode::DimensionMismatch, "frames differ in size");
  }
  HomographyFit fit = estimate_homography(pairs, params, seed);
  StabilizedPair out;
  out.reference = a;
  out.adjusted = warp_image(b, fit.h, 0.0, &out.valid);
  out.h = fit.h;
  out.inlier_mask = std::move(fit.inlier_mask);
  out.inlier_count = fit.inlier_count;
  return out;
}

}  // namespace motrace
