#include "motrace/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "motrace/error.hpp"

namespace motrace {

namespace {

void check_ts(double ts) {
  if (!(ts >= 0.0)) {
    throw Error(ErrorCode::NegativeThreshold,
                "threshold must be >= 0, got " + std::to_string(ts));
  }
}

}  // namespace

ResidualResult residual_displacements(std::span<const MatchedPair> pairs,
                                      const Homography& h) {
  ResidualResult out;
  out.vectors.reserve(pairs.size());
  for (const MatchedPair& m : pairs) {
    if (m.status != TrackStatus::Tracked) continue;
    Point2 predicted;
    try {
      predicted = apply_homography(h, m.p1);
    } catch (const Error&) {
      ++out.dropped;
      continue;
    }
    MotionVector v;
    v.origin = m.p1;
    v.raw = m.p2 - m.p1;
    v.camera = predicted - m.p1;
    v.residual = v.raw - v.camera;
    v.magnitude = v.residual.norm();
    out.vectors.push_back(v);
  }
  return out;
}

MotionField filter_by_threshold(std::span<const MotionVector> vectors, double ts) {
  check_ts(ts);
  MotionField out;
  out.ts_applied = ts;
  for (const auto& v : vectors) {
    if (v.magnitude >= ts) out.vectors.push_back(v);
  }
  return out;
}

MotionField filter_by_threshold(const MotionField& field, double ts) {
  MotionField out = filter_by_threshold(std::span(field.vectors), ts);
  out.frame_a = field.frame_a;
  out.frame_b = field.frame_b;
  return out;
}

ThresholdSweepResult threshold_sweep(const MotionField& field,
                                     std::span<const double> ts_values) {
  for (std::size_t i = 0; i < ts_values.size(); ++i) {
    check_ts(ts_values[i]);
    if (i > 0 && ts_values[i] < ts_values[i - 1]) {
      throw Error(ErrorCode::UnsortedThresholds,
                  "threshold grid must be ascending");
    }
  }
  ThresholdSweepResult out;
  out.entries.reserve(ts_values.size());
  for (double ts : ts_values) {
    MotionField f = filter_by_threshold(field, ts);
    const int count = static_cast<int>(f.vectors.size());
    out.entries.push_back({ts, count, std::move(f)});
  }
  return out;
}

std::optional<Plateau> find_plateau(const ThresholdSweepResult& sweep) {
  // Survivor sets are nested, so equal counts mean equal sets.
  std::optional<Plateau> best;
  std::size_t i = 0;
  const auto& e = sweep.entries;
  while (i < e.size()) {
    std::size_t j = i;
    while (j + 1 < e.size() && e[j + 1].surviving_count == e[i].surviving_count) ++j;
    const int run = static_cast<int>(j - i + 1);
    if (e[i].surviving_count > 0 && (!best || run > best->entries)) {
      best = Plateau{e[i].ts, e[j].ts, e[i].surviving_count, run};
    }
    i = j + 1;
  }
  return best;
}

std::vector<double> parse_ts_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) {
    throw Error(ErrorCode::ParseError, "ts grid must be lo:step:hi, got '" + spec + "'");
  }
  double lo = 0.0, step = 0.0, hi = 0.0;
  try {
    lo = std::stod(spec.substr(0, c1));
    step = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    hi = std::stod(spec.substr(c2 + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "ts grid must be lo:step:hi, got '" + spec + "'");
  }
  if (!(step > 0.0) || hi < lo) {
    throw Error(ErrorCode::ParseError, "ts grid needs step > 0 and hi >= lo");
  }
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) grid.push_back(lo + step * static_cast<double>(k));
  return grid;
}

std::vector<double> default_ts_grid() { return parse_ts_grid("0:0.5:10"); }

FieldStatistics field_statistics(const MotionField& field) {
  FieldStatistics s;
  s.count = static_cast<int>(field.vectors.size());
  if (s.count == 0) return s;
  std::vector<double> mags;
  mags.reserve(field.vectors.size());
  Point2 sum{0.0, 0.0};
  for (const auto& v : field.vectors) {
    mags.push_back(v.magnitude);
    sum = sum + v.residual;
  }
  std::sort(mags.begin(), mags.end());
  double total = 0.0;
  for (double m : mags) total += m;
  s.mean_magnitude = total / s.count;
  s.median_magnitude = s.count % 2 == 1
                           ? mags[s.count / 2]
                           : 0.5 * (mags[s.count / 2 - 1] + mags[s.count / 2]);
  s.max_magnitude = mags.back();
  s.mean_direction_deg = std::atan2(sum.y, sum.x) * 180.0 / std::numbers::pi;
  return s;
}

}  // namespace motrace
