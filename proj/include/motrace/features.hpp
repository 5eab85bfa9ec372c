#pragma once

#include <cmath>
#include <vector>

#include "motrace/image.hpp"

namespace motrace {

struct Feature {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;  // min eigenvalue of the structure tensor

  friend bool operator==(const Feature&, const Feature&) = default;
};

struct DetectorParams {
  int max_features = 2000;
  double quality_level = 0.01;  // fraction of the strongest response
  double min_distance = 3.0;    // px
  int block_size = 5;           // odd structure-tensor window side

  /// Throws InvalidParams.
  void validate() const;
};

/// Smaller eigenvalue of the symmetric 2x2 matrix [[a, b], [b, c]].
inline double min_eigenvalue(double a, double b, double c) {
  const double half_trace = 0.5 * (a + c);
  const double half_diff = 0.5 * (a - c);
  return half_trace - std::sqrt(half_diff * half_diff + b * b);
}

/// Shi-Tomasi response: lambda_min of the box-windowed structure tensor at
/// every pixel. Windows are truncated at the image border.
RealField corner_response(const ImageGray& img, int block_size);

/// Thresholds at quality_level * max response, sorts by descending score
/// (ties by y then x), then greedily enforces min_distance and truncates
/// to max_features. Feature positions are whole pixels.
std::vector<Feature> detect_features(const ImageGray& img,
                                     const DetectorParams& params);

/// side x side patch centred on the feature's nearest pixel.
ImageGray extract_patch(const ImageGray& img, const Feature& feature, int side);

}  // namespace motrace
