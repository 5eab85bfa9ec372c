#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motrace/homography.hpp"
#include "motrace/klt.hpp"

namespace motrace {

/// Decomposition of one feature's motion: raw = camera + residual, where
/// camera is the displacement H predicts at the origin.
struct MotionVector {
  Point2 origin;    // frame A, px
  Point2 raw;       // p2 - p1
  Point2 camera;    // H(p1) - p1
  Point2 residual;  // raw - camera
  double magnitude = 0.0;
};

struct MotionField {
  std::vector<MotionVector> vectors;
  int frame_a = 0;
  int frame_b = 0;
  std::optional<double> ts_applied;
};

struct ResidualResult {
  std::vector<MotionVector> vectors;
  int dropped = 0;  // pairs whose origin maps to infinity under H
};

/// One vector per tracked pair, input order preserved. Pairs with any
/// other status are skipped.
ResidualResult residual_displacements(std::span<const MatchedPair> pairs,
                                      const Homography& h);

/// Keeps vectors with magnitude >= ts.
MotionField filter_by_threshold(const MotionField& field, double ts);
MotionField filter_by_threshold(std::span<const MotionVector> vectors, double ts);

struct SweepEntry {
  double ts = 0.0;
  int surviving_count = 0;
  MotionField field;
};

struct ThresholdSweepResult {
  std::vector<SweepEntry> entries;
};

/// ts_values must be non-decreasing and non-negative.
ThresholdSweepResult threshold_sweep(const MotionField& field,
                                     std::span<const double> ts_values);

/// Longest run of consecutive sweep entries with the same non-empty
/// survivor set.
struct Plateau {
  double ts_low = 0.0;
  double ts_high = 0.0;
  int surviving_count = 0;
  int entries = 0;
};
std::optional<Plateau> find_plateau(const ThresholdSweepResult& sweep);

/// Parses "lo:step:hi" into an inclusive grid.
std::vector<double> parse_ts_grid(const std::string& spec);
std::vector<double> default_ts_grid();  // 0:0.5:10

struct FieldStatistics {
  int count = 0;
  // Unset for an empty field.
  std::optional<double> mean_magnitude;
  std::optional<double> median_magnitude;
  std::optional<double> max_magnitude;
  std::optional<double> mean_direction_deg;  // atan2 of the mean residual, image axes (y down)
};

FieldStatistics field_statistics(const MotionField& field);

}  // namespace motrace
