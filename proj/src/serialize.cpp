#include "motrace/serialize.hpp"

#include <cmath>

#include "motrace/error.hpp"

namespace motrace {

namespace {

template <class T>
void get_if_present(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

}  // namespace

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : Json(nullptr);
}

void to_json(Json& j, const Point2& p) { j = Json{{"x", p.x}, {"y", p.y}}; }
void from_json(const Json& j, Point2& p) {
  j.at("x").get_to(p.x);
  j.at("y").get_to(p.y);
}

void to_json(Json& j, const Roi& r) {
  j = Json{{"x0", r.x0}, {"y0", r.y0}, {"width", r.width}, {"height", r.height}};
}
void from_json(const Json& j, Roi& r) {
  j.at("x0").get_to(r.x0);
  j.at("y0").get_to(r.y0);
  j.at("width").get_to(r.width);
  j.at("height").get_to(r.height);
}

void to_json(Json& j, const Rgb& c) { j = Json::array({c.r, c.g, c.b}); }
void from_json(const Json& j, Rgb& c) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::ParseError, "color must be [r, g, b]");
  }
  c = {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

void to_json(Json& j, const Feature& f) {
  j = Json{{"x", f.x}, {"y", f.y}, {"score", f.score}};
}
void from_json(const Json& j, Feature& f) {
  j.at("x").get_to(f.x);
  j.at("y").get_to(f.y);
  j.at("score").get_to(f.score);
}

void to_json(Json& j, const MatchedPair& m) {
  j = Json{{"p1", m.p1},
           {"p2", m.p2},
           {"fb_error", number_or_null(m.fb_error)},
           {"status", status_name(m.status)}};
}
void from_json(const Json& j, MatchedPair& m) {
  j.at("p1").get_to(m.p1);
  j.at("p2").get_to(m.p2);
  const Json& fb = j.at("fb_error");
  m.fb_error = fb.is_null() ? std::numeric_limits<double>::infinity() : fb.get<double>();
  m.status = parse_status(j.at("status").get<std::string>());
}

void to_json(Json& j, const Homography& h) {
  j = Json{{"matrix", h.row_major()}, {"convention", "column-vector"}};
}
void from_json(const Json& j, Homography& h) {
  if (auto it = j.find("convention");
      it != j.end() && it->get<std::string>() != "column-vector") {
    throw Error(ErrorCode::ParseError, "unsupported homography convention");
  }
  const auto values = j.at("matrix").get<std::vector<double>>();
  h = Homography::from_row_major(values);
}

void to_json(Json& j, const MotionVector& v) {
  j = Json{{"origin", v.origin},
           {"raw", v.raw},
           {"camera", v.camera},
           {"residual", v.residual},
           {"magnitude", v.magnitude}};
}
void from_json(const Json& j, MotionVector& v) {
  j.at("origin").get_to(v.origin);
  j.at("raw").get_to(v.raw);
  j.at("camera").get_to(v.camera);
  j.at("residual").get_to(v.residual);
  j.at("magnitude").get_to(v.magnitude);
}

void to_json(Json& j, const MotionField& f) {
  j = Json{{"frame_a", f.frame_a},
           {"frame_b", f.frame_b},
           {"ts", optional_number(f.ts_applied)},
           {"vectors", f.vectors}};
}
void from_json(const Json& j, MotionField& f) {
  j.at("frame_a").get_to(f.frame_a);
  j.at("frame_b").get_to(f.frame_b);
  const Json& ts = j.at("ts");
  f.ts_applied = ts.is_null() ? std::nullopt : std::optional<double>(ts.get<double>());
  j.at("vectors").get_to(f.vectors);
}

void to_json(Json& j, const ThresholdSweepResult& s) {
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    entries.push_back(
        Json{{"ts", e.ts}, {"surviving_count", e.surviving_count}, {"field", e.field}});
  }
  j = Json{{"entries", std::move(entries)}};
}

void to_json(Json& j, const FieldStatistics& s) {
  j = Json{{"count", s.count},
           {"mean_magnitude", optional_number(s.mean_magnitude)},
           {"median_magnitude", optional_number(s.median_magnitude)},
           {"max_magnitude", optional_number(s.max_magnitude)},
           {"mean_direction_deg", optional_number(s.mean_direction_deg)}};
}

void to_json(Json& j, const Plateau& p) {
  j = Json{{"ts_low", p.ts_low},
           {"ts_high", p.ts_high},
           {"surviving_count", p.surviving_count},
           {"entries", p.entries}};
}

void to_json(Json& j, const DetectorParams& p) {
  j = Json{{"max_features", p.max_features},
           {"quality_level", p.quality_level},
           {"min_distance", p.min_distance},
           {"block_size", p.block_size}};
}
void from_json(const Json& j, DetectorParams& p) {
  get_if_present(j, "max_features", p.max_features);
  get_if_present(j, "quality_level", p.quality_level);
  get_if_present(j, "min_distance", p.min_distance);
  get_if_present(j, "block_size", p.block_size);
}

void to_json(Json& j, const TrackParams& p) {
  j = Json{{"window", p.window},
           {"pyramid_levels", p.pyramid_levels},
           {"max_iterations", p.max_iterations},
           {"epsilon", p.epsilon},
           {"fb_threshold", p.fb_threshold},
           {"min_eig_threshold", p.min_eig_threshold}};
}
void from_json(const Json& j, TrackParams& p) {
  get_if_present(j, "window", p.window);
  get_if_present(j, "pyramid_levels", p.pyramid_levels);
  get_if_present(j, "max_iterations", p.max_iterations);
  get_if_present(j, "epsilon", p.epsilon);
  get_if_present(j, "fb_threshold", p.fb_threshold);
  get_if_present(j, "min_eig_threshold", p.min_eig_threshold);
}

void to_json(Json& j, const RobustFitParams& p) {
  j = Json{{"inlier_threshold", p.inlier_threshold},
           {"max_iterations", p.max_iterations},
           {"confidence", p.confidence},
           {"min_inliers", p.min_inliers}};
}
void from_json(const Json& j, RobustFitParams& p) {
  get_if_present(j, "inlier_threshold", p.inlier_threshold);
  get_if_present(j, "max_iterations", p.max_iterations);
  get_if_present(j, "confidence", p.confidence);
  get_if_present(j, "min_inliers", p.min_inliers);
}

void to_json(Json& j, const ArrowStyle& s) {
  j = Json{{"scale", s.scale},
           {"color", s.color},
           {"head_length", s.head_length},
           {"line_width", s.line_width}};
}
void from_json(const Json& j, ArrowStyle& s) {
  get_if_present(j, "scale", s.scale);
  get_if_present(j, "color", s.color);
  get_if_present(j, "head_length", s.head_length);
  get_if_present(j, "line_width", s.line_width);
}

void to_json(Json& j, const OverlayProvenance& p) {
  j = Json{{"frame_a", p.frame_a},
           {"frame_b", p.frame_b},
           {"ts", optional_number(p.ts)},
           {"scale", p.scale},
           {"brightness_gain", p.brightness_gain}};
}

void to_json(Json& j, const MovingBlock& b) {
  j = Json{{"rect", b.rect}, {"delta", b.delta}};
}
void from_json(const Json& j, MovingBlock& b) {
  j.at("rect").get_to(b.rect);
  j.at("delta").get_to(b.delta);
}

void to_json(Json& j, const SceneSpec& s) {
  j = Json{{"width", s.width},
           {"height", s.height},
           {"texture_seed", s.texture_seed},
           {"camera_h", s.camera_h},
           {"blocks", s.blocks},
           {"noise_sigma", s.noise_sigma},
           {"jitter_sigma", s.jitter_sigma}};
}
void from_json(const Json& j, SceneSpec& s) {
  s = SceneSpec{};
  get_if_present(j, "width", s.width);
  get_if_present(j, "height", s.height);
  get_if_present(j, "texture_seed", s.texture_seed);
  get_if_present(j, "camera_h", s.camera_h);
  get_if_present(j, "blocks", s.blocks);
  get_if_present(j, "noise_sigma", s.noise_sigma);
  get_if_present(j, "jitter_sigma", s.jitter_sigma);
}

Json truth_to_json(const GroundTruth& t, const SceneSpec& spec) {
  Json blocks = Json::array();
  for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
    blocks.push_back(Json{{"label", k + 1},
                          {"rect", spec.blocks[k].rect},
                          {"delta", t.block_deltas[k]}});
  }
  return Json{{"width", t.width},
              {"height", t.height},
              {"camera_h", t.camera_h},
              {"blocks", std::move(blocks)}};
}

void to_json(Json& j, const TruthScore& s) {
  Json errs = Json::array();
  for (const auto& e : s.block_delta_error) errs.push_back(optional_number(e));
  j = Json{{"precision", optional_number(s.precision)},
           {"recall", s.recall},
           {"true_positives", s.true_positives},
           {"surviving", s.surviving},
           {"block_resident", s.block_resident},
           {"block_delta_error", std::move(errs)}};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace motrace
