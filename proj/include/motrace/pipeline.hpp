#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motrace/features.hpp"
#include "motrace/homography.hpp"
#include "motrace/klt.hpp"
#include "motrace/motion.hpp"
#include "motrace/render.hpp"
#include "motrace/serialize.hpp"

namespace motrace {

inline constexpr double kDefaultFps = 29.97;

/// "frame_000042.png"
std::string frame_file_name(int index);

/// Seconds since the start of the clip: index / fps. Throws InvalidIndex
/// for index < 1 and InvalidParams for fps <= 0.
double frame_timestamp(int index, double fps);

/// Directory of frame_%06d.png files numbered contiguously from 1, all the
/// same size.
class FrameStore {
 public:
  /// Throws EmptyFrameStore, InconsistentDimensions or IoError.
  static FrameStore open(const std::filesystem::path& directory,
                         double fps = kDefaultFps);

  const std::filesystem::path& directory() const { return directory_; }
  int frame_count() const { return frame_count_; }
  double fps() const { return fps_; }
  int width() const { return width_; }
  int height() const { return height_; }

  std::filesystem::path frame_path(int index) const;  // throws InvalidIndex
  ImageRGB load(int index) const;

 private:
  std::filesystem::path directory_;
  int frame_count_ = 0;
  double fps_ = kDefaultFps;
  int width_ = 0;
  int height_ = 0;
};

/// Validates a directory of frames, or runs the external decoder named by
/// $VIDEO_DECODER (`$VIDEO_DECODER <in> <outdir> frame_%06d.png`) on a video
/// file and validates what it wrote.
FrameStore ingest_frames(const std::filesystem::path& source,
                         const std::filesystem::path& out_dir,
                         double fps = kDefaultFps);

struct AnalysisParams {
  std::optional<Roi> roi;  // whole frame when unset
  DetectorParams detector;
  TrackParams tracker;
  RobustFitParams robust_fit;
  bool forward_backward = true;
  double ts = 3.5;  // px
  ArrowStyle arrow;
  double brightness_gain = 1.8;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(Json& j, const AnalysisParams& p);
void from_json(const Json& j, AnalysisParams& p);
/// Strict parse of a config document; unknown keys are ignored, missing
/// keys keep defaults. Throws ParseError / InvalidParams.
AnalysisParams params_from_json(const Json& j);

/// Everything upstream of the ts filter for one frame pair. Depends only on
/// the frames and the non-presentation parameters, so it can be cached.
struct PairAnalysis {
  int frame_a = 0;
  int frame_b = 0;
  double time_a = 0.0;
  double time_b = 0.0;
  double fps = kDefaultFps;
  std::string frames_digest;  // sha256 of both frame files
  Roi roi;
  std::vector<Feature> features;
  std::vector<MatchedPair> pairs;
  StabilizedPair stabilized;
  MotionField field;  // unfiltered
  int dropped = 0;
};

PairAnalysis prepare_pair(const FrameStore& store, int i, int j,
                          const AnalysisParams& params);

/// Hex digest of the parameters that determine a PairAnalysis.
std::string upstream_key(const FrameStore& store, int i, int j,
                         const AnalysisParams& params);

struct PairCounts {
  int features = 0;
  int tracked = 0;
  int lost = 0;
  int rejected_fb = 0;
};

struct AnalysisResult {
  AnalysisParams params;
  int frame_a = 0;
  int frame_b = 0;
  double time_a = 0.0;
  double time_b = 0.0;
  double fps = kDefaultFps;
  Roi roi;
  PairCounts counts;
  Homography h;
  int inlier_count = 0;
  int dropped = 0;
  MotionField field;
  MotionField filtered;
  FieldStatistics statistics;
  std::optional<double> agreement;  // filtered field vs difference image
  std::string run_id;
  std::filesystem::path run_dir;    // empty when not persisted
  double duration_s = 0.0;
};

/// Deterministic record: wall-clock time and absolute paths are left out
/// so reruns produce identical bytes.
Json result_to_json(const AnalysisResult& r);

struct RenderedArtifacts {
  OverlayImage overlay;
  ImageGray difference;
};

/// The cheap downstream half: ts filter, statistics, overlay and difference
/// image. Never touches the filesystem.
AnalysisResult finish_analysis(const PairAnalysis& pa, const AnalysisParams& params,
                               RenderedArtifacts* artifacts = nullptr);

/// Writes result.json, overlay.png, overlay.json and difference.png into
/// out_root/<run_id>. The directory is built under a temporary name and
/// renamed into place; an existing run with the same id is kept.
std::filesystem::path persist_run(const std::filesystem::path& out_root,
                                  AnalysisResult& result,
                                  const RenderedArtifacts& artifacts);

/// crop -> gray -> detect on frame i -> track to j -> forward-backward
/// filter -> homography -> residuals -> ts filter -> render. Persists when
/// out_root is non-empty. Throws InvalidPair for i == j and
/// StabilizationFailed when no consensus homography exists.
AnalysisResult analyze_pair(const FrameStore& store, int i, int j,
                            const AnalysisParams& params,
                            const std::filesystem::path& out_root = {});

struct SweepRun {
  ThresholdSweepResult sweep;
  std::optional<Plateau> plateau;
  std::vector<OverlayImage> overlays;  // one per ts
  std::string run_id;
  std::filesystem::path run_dir;
};

SweepRun run_sweep_on(const PairAnalysis& pa, const AnalysisParams& params,
                      std::span<const double> ts_values);

/// Detection, tracking and the homography are computed once and reused for
/// every ts. Persists sweep.json plus one overlay per ts when out_root is
/// non-empty.
SweepRun run_sweep(const FrameStore& store, int i, int j,
                   const AnalysisParams& params, std::span<const double> ts_values,
                   const std::filesystem::path& out_root = {});

Json sweep_to_json(const SweepRun& run, const PairAnalysis& pa);

/// Writes sweep.json and overlay_ts_<ts>.png files into out_root/<run_id>.
std::filesystem::path persist_sweep(const std::filesystem::path& out_root,
                                    SweepRun& run, const PairAnalysis& pa);

/// Hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace motrace
