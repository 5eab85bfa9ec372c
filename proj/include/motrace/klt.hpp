#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "motrace/features.hpp"
#include "motrace/image.hpp"

namespace motrace {

enum class TrackStatus { Tracked, Lost, RejectedFb };

std::string_view status_name(TrackStatus status);
TrackStatus parse_status(std::string_view name);

struct TrackParams {
  int window = 15;           // odd LK window side, px
  int pyramid_levels = 3;
  int max_iterations = 30;   // per level
  double epsilon = 0.01;     // px; stop when the update is shorter
  double fb_threshold = 1.0; // px
  double min_eig_threshold = 1e-4;  // lambda_min(G) / window^2 floor

  void validate() const;
};

struct MatchedPair {
  Point2 p1;               // frame A
  Point2 p2;               // frame B
  double fb_error = 0.0;   // px; +inf when the backward track was lost
  TrackStatus status = TrackStatus::Lost;
};

/// Coarse-to-fine Lucas-Kanade with the spatial gradient matrix taken from
/// frame A. A feature is lost when its full-resolution window leaves
/// either frame or G is too poorly conditioned there; coarser levels sample
/// with edge replication.
/// Output order matches `features`.
std::vector<MatchedPair> track_features(const Pyramid& a, const Pyramid& b,
                                        std::span<const Feature> features,
                                        const TrackParams& params);

/// Re-tracks every tracked p2 from B back to A. Pairs whose round trip
/// misses p1 by more than fb_threshold (or whose backward track is lost)
/// become RejectedFb.
std::vector<MatchedPair> forward_backward_filter(const Pyramid& a,
                                                 const Pyramid& b,
                                                 std::span<const MatchedPair> pairs,
                                                 const TrackParams& params);

}  // namespace motrace
