#include "motrace/pipeline.hpp"

#include <openssl/evp.h>
#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <regex>
#include <sstream>

#include "motrace/error.hpp"
#include "motrace/png_io.hpp"

extern char** environ;

namespace motrace {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

std::string unique_suffix() {
  std::random_device rd;
  std::ostringstream os;
  os << std::hex << rd() << rd();
  return os.str();
}

// Moves a fully written temporary directory into place. If another run
// already produced `target`, the temporary copy is discarded.
void publish_dir(const fs::path& tmp, const fs::path& target) {
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove_all(tmp);
    if (!fs::is_directory(target)) {
      throw Error(ErrorCode::IoError, "cannot create " + target.string(), ec.message());
    }
  }
}

std::string format_ts(double ts) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", ts);
  return buf;
}

Json upstream_json(int i, int j, const AnalysisParams& p) {
  return Json{{"frame_a", i},
              {"frame_b", j},
              {"roi", p.roi ? Json(*p.roi) : Json(nullptr)},
              {"detector", p.detector},
              {"tracker", p.tracker},
              {"robust_fit", p.robust_fit},
              {"forward_backward", p.forward_backward},
              {"seed", p.seed}};
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(kHex[md[k] >> 4]);
    out.push_back(kHex[md[k] & 0xf]);
  }
  return out;
}

std::string frame_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.png", index);
  return buf;
}

double frame_timestamp(int index, double fps) {
  if (index < 1) {
    throw Error(ErrorCode::InvalidIndex,
                "frame index must be >= 1, got " + std::to_string(index));
  }
  if (!(fps > 0.0)) throw Error(ErrorCode::InvalidParams, "fps must be > 0");
  return index / fps;
}

FrameStore FrameStore::open(const fs::path& directory, double fps) {
  if (!(fps > 0.0)) throw Error(ErrorCode::InvalidParams, "fps must be > 0");
  if (!fs::is_directory(directory)) {
    throw Error(ErrorCode::IoError, directory.string() + " is not a directory");
  }
  static const std::regex kPattern(R"(frame_(\d{6})\.png)");
  std::vector<int> indices;
  for (const auto& entry : fs::directory_iterator(directory)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, m, kPattern)) {
      indices.push_back(std::stoi(m[1].str()));
    }
  }
  if (indices.empty()) {
    throw Error(ErrorCode::EmptyFrameStore,
                "no frame_%06d.png files in " + directory.string());
  }
  std::sort(indices.begin(), indices.end());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] != static_cast<int>(k) + 1) {
      throw Error(ErrorCode::InvalidIndex, "frames are not contiguous from 1",
                  "missing " + frame_file_name(static_cast<int>(k) + 1));
    }
  }

  FrameStore store;
  store.directory_ = directory;
  store.frame_count_ = static_cast<int>(indices.size());
  store.fps_ = fps;
  const PngSize first = read_png_size(directory / frame_file_name(1));
  for (int k = 2; k <= store.frame_count_; ++k) {
    const PngSize s = read_png_size(directory / frame_file_name(k));
    if (s.width != first.width || s.height != first.height) {
      throw Error(ErrorCode::InconsistentDimensions, "frames differ in size",
                  frame_file_name(k) + " is " + std::to_string(s.width) + "x" +
                      std::to_string(s.height) + ", frame 1 is " +
                      std::to_string(first.width) + "x" +
                      std::to_string(first.height));
    }
  }
  store.width_ = first.width;
  store.height_ = first.height;
  return store;
}

fs::path FrameStore::frame_path(int index) const {
  if (index < 1 || index > frame_count_) {
    throw Error(ErrorCode::InvalidIndex,
                "frame " + std::to_string(index) + " not in [1, " +
                    std::to_string(frame_count_) + "]");
  }
  return directory_ / frame_file_name(index);
}

ImageRGB FrameStore::load(int index) const { return read_png(frame_path(index)); }

FrameStore ingest_frames(const fs::path& source, const fs::path& out_dir,
                         double fps) {
  if (fs::is_directory(source)) return FrameStore::open(source, fps);
  if (!fs::is_regular_file(source)) {
    throw Error(ErrorCode::IoError, "cannot read " + source.string());
  }
  const char* decoder = std::getenv("VIDEO_DECODER");
  if (!decoder || !*decoder) {
    throw Error(ErrorCode::DecoderUnavailable, "VIDEO_DECODER is not set");
  }
  fs::create_directories(out_dir);

  std::string in_arg = source.string();
  std::string out_arg = out_dir.string();
  std::string pattern = "frame_%06d.png";
  std::string prog = decoder;
  char* argv[] = {prog.data(), in_arg.data(), out_arg.data(), pattern.data(), nullptr};
  pid_t pid = 0;
  if (posix_spawnp(&pid, decoder, nullptr, nullptr, argv, environ) != 0) {
    throw Error(ErrorCode::DecoderUnavailable,
                std::string("cannot start decoder '") + decoder + "'");
  }
  int status = 0;
  if (waitpid(pid, &status, 0) < 0 || !WIFEXITED(status)) {
    throw Error(ErrorCode::DecoderUnavailable, "decoder did not exit normally");
  }
  if (WEXITSTATUS(status) == 127) {
    throw Error(ErrorCode::DecoderUnavailable,
                std::string("decoder '") + decoder + "' not found");
  }
  if (WEXITSTATUS(status) != 0) {
    throw Error(ErrorCode::IoError,
                "decoder exited with status " + std::to_string(WEXITSTATUS(status)));
  }
  return FrameStore::open(out_dir, fps);
}

void AnalysisParams::validate() const {
  if (roi && (roi->width <= 0 || roi->height <= 0)) {
    throw Error(ErrorCode::InvalidParams, "roi must have positive extent");
  }
  detector.validate();
  tracker.validate();
  robust_fit.validate();
  arrow.validate();
  if (!(ts >= 0.0)) throw Error(ErrorCode::NegativeThreshold, "ts must be >= 0");
  if (!(brightness_gain > 0.0)) {
    throw Error(ErrorCode::InvalidGain, "brightness_gain must be > 0");
  }
}

void to_json(Json& j, const AnalysisParams& p) {
  j = Json{{"roi", p.roi ? Json(*p.roi) : Json(nullptr)},
           {"detector", p.detector},
           {"tracker", p.tracker},
           {"robust_fit", p.robust_fit},
           {"forward_backward", p.forward_backward},
           {"ts", p.ts},
           {"arrow", p.arrow},
           {"brightness_gain", p.brightness_gain},
           {"seed", p.seed}};
}

void from_json(const Json& j, AnalysisParams& p) {
  p = AnalysisParams{};
  if (auto it = j.find("roi"); it != j.end() && !it->is_null()) p.roi = it->get<Roi>();
  if (auto it = j.find("detector"); it != j.end()) it->get_to(p.detector);
  if (auto it = j.find("tracker"); it != j.end()) it->get_to(p.tracker);
  if (auto it = j.find("robust_fit"); it != j.end()) it->get_to(p.robust_fit);
  if (auto it = j.find("forward_backward"); it != j.end()) it->get_to(p.forward_backward);
  if (auto it = j.find("ts"); it != j.end()) it->get_to(p.ts);
  if (auto it = j.find("arrow"); it != j.end()) it->get_to(p.arrow);
  if (auto it = j.find("brightness_gain"); it != j.end()) it->get_to(p.brightness_gain);
  if (auto it = j.find("seed"); it != j.end()) it->get_to(p.seed);
}

AnalysisParams params_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "params must be an object");
  AnalysisParams p;
  try {
    p = j.get<AnalysisParams>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  p.validate();
  return p;
}

std::string upstream_key(const FrameStore& store, int i, int j,
                         const AnalysisParams& params) {
  Json key = upstream_json(std::min(i, j), std::max(i, j), params);
  key["frames_dir"] = fs::absolute(store.directory()).lexically_normal().string();
  return sha256_hex(key.dump());
}

PairAnalysis prepare_pair(const FrameStore& store, int i, int j,
                          const AnalysisParams& params) {
  params.validate();
  if (i == j) {
    throw Error(ErrorCode::InvalidPair, "frame pair must differ (got " +
                                            std::to_string(i) + " twice)");
  }
  PairAnalysis pa;
  pa.frame_a = std::min(i, j);
  pa.frame_b = std::max(i, j);
  pa.fps = store.fps();
  pa.time_a = frame_timestamp(pa.frame_a, store.fps());
  pa.time_b = frame_timestamp(pa.frame_b, store.fps());

  const fs::path path_a = store.frame_path(pa.frame_a);
  const fs::path path_b = store.frame_path(pa.frame_b);
  const std::string bytes_a = read_file(path_a);
  const std::string bytes_b = read_file(path_b);
  pa.frames_digest = sha256_hex(sha256_hex(bytes_a) + sha256_hex(bytes_b));

  const ImageRGB rgb_a = decode_png({bytes_a.begin(), bytes_a.end()});
  const ImageRGB rgb_b = decode_png({bytes_b.begin(), bytes_b.end()});
  pa.roi = params.roi.value_or(Roi{0, 0, rgb_a.width(), rgb_a.height()});
  const ImageGray gray_a = to_grayscale(crop_roi(rgb_a, pa.roi));
  const ImageGray gray_b = to_grayscale(crop_roi(rgb_b, pa.roi));

  pa.features = detect_features(gray_a, params.detector);
  const Pyramid pyr_a = build_pyramid(gray_a, params.tracker.pyramid_levels);
  const Pyramid pyr_b = build_pyramid(gray_b, params.tracker.pyramid_levels);
  pa.pairs = track_features(pyr_a, pyr_b, pa.features, params.tracker);
  if (params.forward_backward) {
    pa.pairs = forward_backward_filter(pyr_a, pyr_b, pa.pairs, params.tracker);
  }

  try {
    pa.stabilized = stabilize_pair(gray_a, gray_b, pa.pairs, params.robust_fit, params.seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoConsensus || e.code() == ErrorCode::InsufficientPairs ||
        e.code() == ErrorCode::DegenerateConfiguration) {
      const auto tracked = std::count_if(pa.pairs.begin(), pa.pairs.end(), [](const auto& m) {
        return m.status == TrackStatus::Tracked;
      });
      throw Error(ErrorCode::StabilizationFailed, e.what(),
                  std::to_string(pa.features.size()) + " features, " +
                      std::to_string(tracked) + " tracked pairs");
    }
    throw;
  }

  ResidualResult rr = residual_displacements(pa.pairs, pa.stabilized.h);
  pa.field.vectors = std::move(rr.vectors);
  pa.field.frame_a = pa.frame_a;
  pa.field.frame_b = pa.frame_b;
  pa.dropped = rr.dropped;
  return pa;
}

AnalysisResult finish_analysis(const PairAnalysis& pa, const AnalysisParams& params,
                               RenderedArtifacts* artifacts) {
  params.validate();
  AnalysisResult r;
  r.params = params;
  r.frame_a = pa.frame_a;
  r.frame_b = pa.frame_b;
  r.time_a = pa.time_a;
  r.time_b = pa.time_b;
  r.fps = pa.fps;
  r.roi = pa.roi;
  r.counts.features = static_cast<int>(pa.features.size());
  for (const auto& m : pa.pairs) {
    switch (m.status) {
      case TrackStatus::Tracked: ++r.counts.tracked; break;
      case TrackStatus::Lost: ++r.counts.lost; break;
      case TrackStatus::RejectedFb: ++r.counts.rejected_fb; break;
    }
  }
  r.h = pa.stabilized.h;
  r.inlier_count = pa.stabilized.inlier_count;
  r.dropped = pa.dropped;
  r.field = pa.field;
  r.filtered = filter_by_threshold(pa.field, params.ts);
  r.statistics = field_statistics(r.filtered);

  // Compare only where the stabilized frame has source data.
  ImageGray reference = pa.stabilized.reference;
  const auto valid = pa.stabilized.valid.values();
  for (std::size_t k = 0; k < valid.size(); ++k) {
    if (valid[k] == 0.0) reference.values()[k] = 0.0;
  }
  ImageGray difference = render_difference(reference, pa.stabilized.adjusted);
  r.agreement = spatial_agreement(r.filtered, difference, 0.05, params.tracker.window / 2);

  Json id = upstream_json(pa.frame_a, pa.frame_b, params);
  id["params"] = params;
  id["frames_digest"] = pa.frames_digest;
  r.run_id = sha256_hex(id.dump()).substr(0, 16);

  if (artifacts) {
    artifacts->overlay =
        render_arrows(pa.stabilized.reference, r.filtered, params.arrow, params.brightness_gain);
    artifacts->difference = std::move(difference);
  }
  return r;
}

Json result_to_json(const AnalysisResult& r) {
  return Json{
      {"run_id", r.run_id},
      {"params", r.params},
      {"frames",
       {{"a", {{"index", r.frame_a}, {"time_s", r.time_a}}},
        {"b", {{"index", r.frame_b}, {"time_s", r.time_b}}},
        {"fps", r.fps}}},
      {"roi", r.roi},
      {"counts",
       {{"features", r.counts.features},
        {"tracked", r.counts.tracked},
        {"lost", r.counts.lost},
        {"rejected_fb", r.counts.rejected_fb}}},
      {"homography", r.h},
      {"inlier_count", r.inlier_count},
      {"dropped", r.dropped},
      {"statistics", r.statistics},
      {"agreement", optional_number(r.agreement)},
      {"field", r.field},
      {"filtered", r.filtered},
      {"artifacts",
       {{"overlay", "overlay.png"},
        {"overlay_provenance", "overlay.json"},
        {"difference", "difference.png"}}}};
}

fs::path persist_run(const fs::path& out_root, AnalysisResult& result,
                     const RenderedArtifacts& artifacts) {
  fs::create_directories(out_root);
  const fs::path target = out_root / result.run_id;
  if (!fs::is_directory(target)) {
    const fs::path tmp = out_root / (".tmp-" + result.run_id + "-" + unique_suffix());
    fs::create_directories(tmp);
    write_text(tmp / "result.json", result_to_json(result).dump(2) + "\n");
    write_png(tmp / "overlay.png", artifacts.overlay.image);
    write_text(tmp / "overlay.json", Json(artifacts.overlay.provenance).dump(2) + "\n");
    write_png(tmp / "difference.png", artifacts.difference);
    publish_dir(tmp, target);
  }
  result.run_dir = target;
  return target;
}

AnalysisResult analyze_pair(const FrameStore& store, int i, int j,
                            const AnalysisParams& params, const fs::path& out_root) {
  const auto start = std::chrono::steady_clock::now();
  const PairAnalysis pa = prepare_pair(store, i, j, params);
  RenderedArtifacts artifacts;
  AnalysisResult r = finish_analysis(pa, params, &artifacts);
  if (!out_root.empty()) persist_run(out_root, r, artifacts);
  r.duration_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SweepRun run_sweep_on(const PairAnalysis& pa, const AnalysisParams& params,
                      std::span<const double> ts_values) {
  params.validate();
  SweepRun run;
  run.sweep = threshold_sweep(pa.field, ts_values);
  run.plateau = find_plateau(run.sweep);
  for (const auto& e : run.sweep.entries) {
    run.overlays.push_back(
        render_arrows(pa.stabilized.reference, e.field, params.arrow, params.brightness_gain));
  }
  Json id = upstream_json(pa.frame_a, pa.frame_b, params);
  id["params"] = params;
  id["frames_digest"] = pa.frames_digest;
  id["ts_values"] = std::vector<double>(ts_values.begin(), ts_values.end());
  run.run_id = "sweep-" + sha256_hex(id.dump()).substr(0, 16);
  return run;
}

Json sweep_to_json(const SweepRun& run, const PairAnalysis& pa) {
  Json overlays = Json::array();
  for (const auto& e : run.sweep.entries) {
    overlays.push_back("overlay_ts_" + format_ts(e.ts) + ".png");
  }
  return Json{{"run_id", run.run_id},
              {"frames",
               {{"a", {{"index", pa.frame_a}, {"time_s", pa.time_a}}},
                {"b", {{"index", pa.frame_b}, {"time_s", pa.time_b}}},
                {"fps", pa.fps}}},
              {"roi", pa.roi},
              {"homography", pa.stabilized.h},
              {"sweep", run.sweep},
              {"plateau", run.plateau ? Json(*run.plateau) : Json(nullptr)},
              {"overlays", std::move(overlays)}};
}

fs::path persist_sweep(const fs::path& out_root, SweepRun& run, const PairAnalysis& pa) {
  fs::create_directories(out_root);
  const fs::path target = out_root / run.run_id;
  if (!fs::is_directory(target)) {
    const fs::path tmp = out_root / (".tmp-" + run.run_id + "-" + unique_suffix());
    fs::create_directories(tmp);
    write_text(tmp / "sweep.json", sweep_to_json(run, pa).dump(2) + "\n");
    for (std::size_t k = 0; k < run.overlays.size(); ++k) {
      write_png(tmp / ("overlay_ts_" + format_ts(run.sweep.entries[k].ts) + ".png"),
                run.overlays[k].image);
    }
    publish_dir(tmp, target);
  }
  run.run_dir = target;
  return target;
}

SweepRun run_sweep(const FrameStore& store, int i, int j, const AnalysisParams& params,
                   std::span<const double> ts_values, const fs::path& out_root) {
  const PairAnalysis pa = prepare_pair(store, i, j, params);
  SweepRun run = run_sweep_on(pa, params, ts_values);
  if (!out_root.empty()) persist_sweep(out_root, run, pa);
  return run;
}

}  // namespace motrace
