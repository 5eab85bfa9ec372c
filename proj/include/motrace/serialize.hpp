#pragma once

// JSON wire formats shared by the CLI, the HTTP service and run records.

#include <json.hpp>

#include "motrace/features.hpp"
#include "motrace/homography.hpp"
#include "motrace/klt.hpp"
#include "motrace/motion.hpp"
#include "motrace/render.hpp"
#include "motrace/synthetic.hpp"

namespace motrace {

using Json = nlohmann::json;

/// Finite doubles as numbers, NaN/inf as null.
Json number_or_null(double v);
Json optional_number(const std::optional<double>& v);

void to_json(Json& j, const Point2& p);
void from_json(const Json& j, Point2& p);
void to_json(Json& j, const Roi& r);
void from_json(const Json& j, Roi& r);
void to_json(Json& j, const Rgb& c);
void from_json(const Json& j, Rgb& c);

void to_json(Json& j, const Feature& f);
void from_json(const Json& j, Feature& f);
void to_json(Json& j, const MatchedPair& m);
void from_json(const Json& j, MatchedPair& m);

/// {"matrix": [9 row-major values], "convention": "column-vector"}
void to_json(Json& j, const Homography& h);
void from_json(const Json& j, Homography& h);

void to_json(Json& j, const MotionVector& v);
void from_json(const Json& j, MotionVector& v);
void to_json(Json& j, const MotionField& f);
void from_json(const Json& j, MotionField& f);
void to_json(Json& j, const ThresholdSweepResult& s);
void to_json(Json& j, const FieldStatistics& s);
void to_json(Json& j, const Plateau& p);

void to_json(Json& j, const DetectorParams& p);
void from_json(const Json& j, DetectorParams& p);
void to_json(Json& j, const TrackParams& p);
void from_json(const Json& j, TrackParams& p);
void to_json(Json& j, const RobustFitParams& p);
void from_json(const Json& j, RobustFitParams& p);
void to_json(Json& j, const ArrowStyle& s);
void from_json(const Json& j, ArrowStyle& s);
void to_json(Json& j, const OverlayProvenance& p);

void to_json(Json& j, const MovingBlock& b);
void from_json(const Json& j, MovingBlock& b);
void to_json(Json& j, const SceneSpec& s);
void from_json(const Json& j, SceneSpec& s);
/// Labels are not stored; they are implied by the block rectangles.
Json truth_to_json(const GroundTruth& t, const SceneSpec& spec);
void to_json(Json& j, const TruthScore& s);

/// Parses text, mapping syntax and schema errors to ParseError.
Json parse_json(const std::string& text);

}  // namespace motrace
