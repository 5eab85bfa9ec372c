// motrace: frame-pair motion analysis from the command line.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 analysis failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "motrace/error.hpp"
#include "motrace/pipeline.hpp"
#include "motrace/png_io.hpp"
#include "motrace/service.hpp"
#include "motrace/synthetic.hpp"

namespace fs = std::filesystem;
using namespace motrace;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitAnalysis = 4;

struct PairOptions {
  std::string frames;
  std::vector<int> pair;
  std::string roi;
  std::string config;
  std::string out;
  double fps = kDefaultFps;
  std::optional<double> ts;
  std::optional<double> scale;
  std::optional<std::uint64_t> seed;
  bool no_fb = false;
};

void add_pair_options(CLI::App* cmd, PairOptions& o) {
  cmd->add_option("--frames", o.frames, "Directory of frame_%06d.png files")->required();
  cmd->add_option("--pair", o.pair, "Frame indices I J (1-based)")->required()->expected(2);
  cmd->add_option("--roi", o.roi, "Region of interest X,Y,W,H (default: whole frame)");
  cmd->add_option("--config", o.config, "JSON file with analysis parameters");
  cmd->add_option("--ts", o.ts, "Cutoff threshold in px");
  cmd->add_option("--scale", o.scale, "Arrow length multiplier");
  cmd->add_option("--seed", o.seed, "RANSAC seed");
  cmd->add_option("--fps", o.fps, "Frame rate for the timeline")->capture_default_str();
  cmd->add_flag("--no-fb", o.no_fb, "Disable forward-backward filtering");
  cmd->add_option("--out", o.out, "Output root for run directories")->required();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Roi parse_roi_arg(const std::string& text) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--roi", "expected X,Y,W,H");
    }
  }
  if (v.size() != 4) throw CLI::ValidationError("--roi", "expected X,Y,W,H");
  return {v[0], v[1], v[2], v[3]};
}

AnalysisParams build_params(const PairOptions& o) {
  AnalysisParams p;
  if (!o.config.empty()) p = params_from_json(parse_json(slurp(o.config)));
  if (!o.roi.empty()) p.roi = parse_roi_arg(o.roi);
  if (o.ts) p.ts = *o.ts;
  if (o.scale) p.arrow.scale = *o.scale;
  if (o.seed) p.seed = *o.seed;
  if (o.no_fb) p.forward_backward = false;
  p.validate();
  return p;
}

int run_analyze(const PairOptions& o) {
  const AnalysisParams params = build_params(o);
  const FrameStore store = FrameStore::open(o.frames, o.fps);
  const AnalysisResult r = analyze_pair(store, o.pair[0], o.pair[1], params, o.out);
  std::cout << Json{{"run_id", r.run_id},
                    {"run_dir", r.run_dir.string()},
                    {"tracked", r.counts.tracked},
                    {"inliers", r.inlier_count},
                    {"vectors", r.field.vectors.size()},
                    {"surviving", r.filtered.vectors.size()},
                    {"ts", params.ts},
                    {"duration_s", r.duration_s}}
                   .dump(2)
            << "\n";
  return 0;
}

int run_sweep_cmd(const PairOptions& o, const std::string& grid) {
  const AnalysisParams params = build_params(o);
  const FrameStore store = FrameStore::open(o.frames, o.fps);
  const std::vector<double> ts = parse_ts_grid(grid);
  const SweepRun run = run_sweep(store, o.pair[0], o.pair[1], params, ts, o.out);
  Json counts = Json::array();
  for (const auto& e : run.sweep.entries) {
    counts.push_back(Json{{"ts", e.ts}, {"surviving_count", e.surviving_count}});
  }
  std::cout << Json{{"run_id", run.run_id},
                    {"run_dir", run.run_dir.string()},
                    {"counts", counts},
                    {"plateau", run.plateau ? Json(*run.plateau) : Json(nullptr)}}
                   .dump(2)
            << "\n";
  return 0;
}

int run_synth(const std::string& spec_path, std::optional<std::uint64_t> demo_seed,
              bool demo_block, const std::string& out) {
  SceneSpec spec;
  if (!spec_path.empty()) {
    try {
      spec = parse_json(slurp(spec_path)).get<SceneSpec>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
  } else if (demo_seed) {
    spec = make_demo_scene(*demo_seed, demo_block);
  } else {
    throw CLI::ValidationError("synth", "either --spec or --demo-seed is required");
  }
  const ScenePair scene = generate_pair(spec);
  fs::create_directories(out);
  write_png(fs::path(out) / frame_file_name(1), scene.frame_a);
  write_png(fs::path(out) / frame_file_name(2), scene.frame_b);
  std::ofstream(fs::path(out) / "scene.json") << Json(spec).dump(2) << "\n";
  std::ofstream(fs::path(out) / "truth.json") << truth_to_json(scene.truth, spec).dump(2)
                                              << "\n";
  std::cout << Json{{"frames_dir", out}, {"frame_count", 2}}.dump(2) << "\n";
  return 0;
}

int run_ingest(const std::string& source, const std::string& out, double fps) {
  const FrameStore store = ingest_frames(source, out, fps);
  std::cout << Json{{"frames_dir", store.directory().string()},
                    {"frame_count", store.frame_count()},
                    {"width", store.width()},
                    {"height", store.height()},
                    {"fps", store.fps()}}
                   .dump(2)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-pair motion analysis: stabilize, track and flag moving structure"};
  app.require_subcommand(1);

  PairOptions analyze_opts;
  auto* analyze = app.add_subcommand("analyze", "Analyze one frame pair");
  add_pair_options(analyze, analyze_opts);

  PairOptions sweep_opts;
  std::string ts_grid = "0:0.5:10";
  auto* sweep = app.add_subcommand("sweep", "Survivor counts over a grid of cutoff thresholds");
  add_pair_options(sweep, sweep_opts);
  sweep->add_option("--ts-grid", ts_grid, "lo:step:hi")->capture_default_str();

  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> demo_seed;
  bool demo_block = false;
  auto* synth = app.add_subcommand("synth", "Render a synthetic frame pair with ground truth");
  synth->add_option("--spec", synth_spec, "Scene JSON");
  synth->add_option("--demo-seed", demo_seed, "Generate the seeded demo scene instead");
  synth->add_flag("--block", demo_block, "Demo scene includes a moving block");
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string ingest_video, ingest_frames_dir, ingest_out;
  double ingest_fps = kDefaultFps;
  auto* ingest = app.add_subcommand("ingest", "Extract or validate a frame sequence");
  auto* video_opt = ingest->add_option("--video", ingest_video,
                                       "Video file, decoded by $VIDEO_DECODER");
  ingest->add_option("--frames", ingest_frames_dir, "Existing frame directory to validate")
      ->excludes(video_opt);
  ingest->add_option("--out", ingest_out, "Frame output directory");
  ingest->add_option("--fps", ingest_fps, "Frame rate")->capture_default_str();

  std::string host = "127.0.0.1", artifacts = "artifacts";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the HTTP analysis service");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--artifacts", artifacts, "Run directory root")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*analyze) return run_analyze(analyze_opts);
    if (*sweep) return run_sweep_cmd(sweep_opts, ts_grid);
    if (*synth) return run_synth(synth_spec, demo_seed, demo_block, synth_out);
    if (*ingest) {
      if (!ingest_video.empty()) {
        if (ingest_out.empty()) throw CLI::ValidationError("--out", "required with --video");
        return run_ingest(ingest_video, ingest_out, ingest_fps);
      }
      if (ingest_frames_dir.empty()) {
        throw CLI::ValidationError("ingest", "--video or --frames is required");
      }
      return run_ingest(ingest_frames_dir, ingest_out, ingest_fps);
    }
    if (*serve) {
      std::cerr << "serving on http://" << host << ":" << port << "\n";
      run_server(host, port, artifacts);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what();
    if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
    std::cerr << "\n";
    return is_data_error(e.code()) ? kExitData : kExitAnalysis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
