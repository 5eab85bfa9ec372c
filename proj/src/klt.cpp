#include "motrace/klt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>

#include "motrace/error.hpp"

namespace motrace {

namespace {

struct LevelData {
  const ImageGray* image;
  Gradient grad;
};

std::vector<LevelData> prepare_source(const Pyramid& pyr, int levels) {
  std::vector<LevelData> out;
  out.reserve(levels);
  for (int l = 0; l < levels; ++l) {
    out.push_back({&pyr.levels[l], gradient(pyr.levels[l])});
  }
  return out;
}

void check_pyramids(const Pyramid& a, const Pyramid& b, int levels) {
  if (a.size() < levels || b.size() < levels) {
    throw Error(ErrorCode::PyramidMismatch,
                "pyramids have fewer than " + std::to_string(levels) + " levels");
  }
  if (a.size() != b.size()) {
    throw Error(ErrorCode::PyramidMismatch, "pyramid level counts differ");
  }
  if (!a.levels[0].same_size(b.levels[0])) {
    throw Error(ErrorCode::PyramidMismatch, "pyramid base sizes differ");
  }
}

bool window_fits(const RealField& img, Point2 c, int radius) {
  return c.x - radius >= 0.0 && c.y - radius >= 0.0 &&
         c.x + radius <= img.width() - 1 && c.y + radius <= img.height() - 1;
}

// Tracks one point from `src` to `dst`; nullopt when lost.
std::optional<Point2> track_point(const std::vector<LevelData>& src,
                                  const Pyramid& dst, Point2 start,
                                  const TrackParams& p) {
  const int radius = p.window / 2;
  const int n = p.window * p.window;
  std::vector<double> ia(n), gx(n), gy(n);
  Point2 guess{0.0, 0.0};

  for (int level = p.pyramid_levels - 1; level >= 0; --level) {
    const double scale = 1.0 / static_cast<double>(1 << level);
    const Point2 pos = scale * start;
    const LevelData& ld = src[level];
    const ImageGray& img_b = dst.levels[level];
    const bool finest = level == 0;

    // Only the full-resolution window has to lie inside the image; coarse
    // levels replicate edges so points near the border still get the
    // coarse-to-fine initial guess.
    if (finest && !window_fits(*ld.image, pos, radius)) return std::nullopt;
    const auto sample = finest ? detail::sample_unchecked : detail::sample_clamped;

    double gxx = 0.0, gxy = 0.0, gyy = 0.0;
    int k = 0;
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx, ++k) {
        const double x = pos.x + dx;
        const double y = pos.y + dy;
        ia[k] = sample(*ld.image, x, y);
        gx[k] = sample(ld.grad.gx, x, y);
        gy[k] = sample(ld.grad.gy, x, y);
        gxx += gx[k] * gx[k];
        gxy += gx[k] * gy[k];
        gyy += gy[k] * gy[k];
      }
    }
    const double det = gxx * gyy - gxy * gxy;
    if (min_eigenvalue(gxx, gxy, gyy) / n < p.min_eig_threshold ||
        !(std::abs(det) > 0.0)) {
      if (finest) return std::nullopt;
      guess = 2.0 * guess;
      continue;
    }

    Point2 step{0.0, 0.0};
    for (int it = 0; it < p.max_iterations; ++it) {
      const Point2 q = pos + guess + step;
      if (finest && !window_fits(img_b, q, radius)) return std::nullopt;
      double ex = 0.0, ey = 0.0;
      k = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx, ++k) {
          const double diff =
              ia[k] - sample(img_b, q.x + dx, q.y + dy);
          ex += gx[k] * diff;
          ey += gy[k] * diff;
        }
      }
      const Point2 eta{(gyy * ex - gxy * ey) / det, (gxx * ey - gxy * ex) / det};
      step = step + eta;
      if (eta.norm() < p.epsilon) break;
    }

    guess = finest ? guess + step : 2.0 * (guess + step);
  }

  const Point2 end = start + guess;
  const ImageGray& base = dst.levels[0];
  if (!(end.x >= 0.0 && end.y >= 0.0 && end.x <= base.width() - 1 &&
        end.y <= base.height() - 1)) {
    return std::nullopt;
  }
  return end;
}

// Runs fn(i) for i in [0, count) over worker threads; each index is written
// by exactly one worker so output order is independent of scheduling.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, (count + 63) / 64);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace

std::string_view status_name(TrackStatus status) {
  switch (status) {
    case TrackStatus::Tracked: return "tracked";
    case TrackStatus::Lost: return "lost";
    case TrackStatus::RejectedFb: return "rejected_fb";
  }
  return "lost";
}

TrackStatus parse_status(std::string_view name) {
  if (name == "tracked") return TrackStatus::Tracked;
  if (name == "lost") return TrackStatus::Lost;
  if (name == "rejected_fb") return TrackStatus::RejectedFb;
  throw Error(ErrorCode::ParseError, "unknown track status '" + std::string(name) + "'");
}

void TrackParams::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw Error(ErrorCode::InvalidParams, "window must be odd and >= 3");
  }
  if (pyramid_levels < 1) {
    throw Error(ErrorCode::InvalidParams, "pyramid_levels must be >= 1");
  }
  if (max_iterations < 1) {
    throw Error(ErrorCode::InvalidParams, "max_iterations must be >= 1");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidParams, "epsilon must be > 0");
  if (!(fb_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "fb_threshold must be > 0");
  }
  if (!(min_eig_threshold >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "min_eig_threshold must be >= 0");
  }
}

std::vector<MatchedPair> track_features(const Pyramid& a, const Pyramid& b,
                                        std::span<const Feature> features,
                                        const TrackParams& params) {
  params.validate();
  check_pyramids(a, b, params.pyramid_levels);
  const auto src = prepare_source(a, params.pyramid_levels);
  std::vector<MatchedPair> out(features.size());
  parallel_for(features.size(), [&](std::size_t i) {
    const Point2 p1{features[i].x, features[i].y};
    MatchedPair& m = out[i];
    m.p1 = p1;
    m.p2 = p1;
    if (auto p2 = track_point(src, b, p1, params)) {
      m.p2 = *p2;
      m.status = TrackStatus::Tracked;
    } else {
      m.status = TrackStatus::Lost;
    }
  });
  return out;
}

std::vector<MatchedPair> forward_backward_filter(const Pyramid& a,
                                                 const Pyramid& b,
                                                 std::span<const MatchedPair> pairs,
                                                 const TrackParams& params) {
  params.validate();
  check_pyramids(a, b, params.pyramid_levels);
  std::vector<MatchedPair> out(pairs.begin(), pairs.end());
  if (pairs.empty()) return out;
  const auto src = prepare_source(b, params.pyramid_levels);
  parallel_for(out.size(), [&](std::size_t i) {
    MatchedPair& m = out[i];
    if (m.status != TrackStatus::Tracked) return;
    const auto back = track_point(src, a, m.p2, params);
    if (!back) {
      m.fb_error = std::numeric_limits<double>::infinity();
      m.status = TrackStatus::RejectedFb;
      return;
    }
    m.fb_error = (*back - m.p1).norm();
    if (m.fb_error > params.fb_threshold) m.status = TrackStatus::RejectedFb;
  });
  return out;
}

}  // namespace motrace
