#include "motrace/features.hpp"

#include <algorithm>
#include <string>

#include "motrace/error.hpp"

namespace motrace {

namespace {

// Sum over the odd window of side `block` centred on each pixel, keeping
// only in-bounds samples.
RealField box_sum(const RealField& in, int block) {
  const int w = in.width();
  const int h = in.height();
  const int r = block / 2;
  RealField rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = std::max(x - r, 0); t <= std::min(x + r, w - 1); ++t) {
        acc += in(t, y);
      }
      rows(x, y) = acc;
    }
  }
  RealField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = std::max(y - r, 0); t <= std::min(y + r, h - 1); ++t) {
        acc += rows(x, t);
      }
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

void DetectorParams::validate() const {
  if (max_features < 1) {
    throw Error(ErrorCode::InvalidParams, "max_features must be >= 1");
  }
  if (!(quality_level > 0.0 && quality_level <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "quality_level must be in (0, 1]");
  }
  if (!(min_distance >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "min_distance must be >= 0");
  }
  if (block_size < 3 || block_size % 2 == 0) {
    throw Error(ErrorCode::InvalidParams, "block_size must be odd and >= 3");
  }
}

RealField corner_response(const ImageGray& img, int block_size) {
  if (block_size < 3 || block_size % 2 == 0) {
    throw Error(ErrorCode::InvalidParams, "block_size must be odd and >= 3");
  }
  if (img.width() < block_size || img.height() < block_size) {
    throw Error(ErrorCode::ImageTooSmall,
                "image smaller than block_size " + std::to_string(block_size));
  }
  const Gradient g = gradient(img);
  const int w = img.width();
  const int h = img.height();
  RealField xx(w, h), xy(w, h), yy(w, h);
  for (std::size_t i = 0; i < xx.values().size(); ++i) {
    const double gx = g.gx.values()[i];
    const double gy = g.gy.values()[i];
    xx.values()[i] = gx * gx;
    xy.values()[i] = gx * gy;
    yy.values()[i] = gy * gy;
  }
  const RealField sxx = box_sum(xx, block_size);
  const RealField sxy = box_sum(xy, block_size);
  const RealField syy = box_sum(yy, block_size);
  RealField response(w, h);
  for (std::size_t i = 0; i < response.values().size(); ++i) {
    response.values()[i] = std::max(
        0.0, min_eigenvalue(sxx.values()[i], sxy.values()[i], syy.values()[i]));
  }
  return response;
}

std::vector<Feature> detect_features(const ImageGray& img,
                                     const DetectorParams& params) {
  params.validate();
  const RealField response = corner_response(img, params.block_size);
  const auto values = response.values();
  const double max_response = *std::max_element(values.begin(), values.end());
  if (max_response <= 0.0) return {};

  const double floor_value = params.quality_level * max_response;
  std::vector<Feature> candidates;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double s = response(x, y);
      if (s >= floor_value && s > 0.0) candidates.push_back({double(x), double(y), s});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Feature& a, const Feature& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.y != b.y) return a.y < b.y;
              return a.x < b.x;
            });

  // Accepted features bucketed on a grid with cell side >= min_distance, so
  // conflicts can only come from the 3x3 neighbouring cells.
  const double cell = std::max(params.min_distance, 1.0);
  const int grid_w = static_cast<int>(img.width() / cell) + 1;
  const int grid_h = static_cast<int>(img.height() / cell) + 1;
  std::vector<std::vector<Feature>> grid(static_cast<std::size_t>(grid_w) * grid_h);
  const double min_d2 = params.min_distance * params.min_distance;

  std::vector<Feature> accepted;
  for (const Feature& f : candidates) {
    if (static_cast<int>(accepted.size()) >= params.max_features) break;
    const int cx = static_cast<int>(f.x / cell);
    const int cy = static_cast<int>(f.y / cell);
    bool clear = true;
    for (int gy = std::max(cy - 1, 0); clear && gy <= std::min(cy + 1, grid_h - 1); ++gy) {
      for (int gx = std::max(cx - 1, 0); clear && gx <= std::min(cx + 1, grid_w - 1); ++gx) {
        for (const Feature& other : grid[static_cast<std::size_t>(gy) * grid_w + gx]) {
          const double dx = other.x - f.x;
          const double dy = other.y - f.y;
          if (dx * dx + dy * dy < min_d2) {
            clear = false;
            break;
          }
        }
      }
    }
    if (!clear) continue;
    accepted.push_back(f);
    grid[static_cast<std::size_t>(cy) * grid_w + cx].push_back(f);
  }
  return accepted;
}

ImageGray extract_patch(const ImageGray& img, const Feature& feature, int side) {
  if (side < 1 || side % 2 == 0) {
    throw Error(ErrorCode::InvalidParams, "patch side must be odd and >= 1");
  }
  const int cx = static_cast<int>(std::lround(feature.x));
  const int cy = static_cast<int>(std::lround(feature.y));
  const int r = side / 2;
  if (cx - r < 0 || cy - r < 0 || cx + r >= img.width() || cy + r >= img.height()) {
    throw Error(ErrorCode::PatchOutOfBounds,
                "patch of side " + std::to_string(side) + " at (" +
                    std::to_string(cx) + ", " + std::to_string(cy) +
                    ") leaves the image");
  }
  return crop_roi(img, Roi{cx - r, cy - r, side, side});
}

}  // namespace motrace
