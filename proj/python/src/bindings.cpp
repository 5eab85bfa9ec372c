#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "motrace/error.hpp"
#include "motrace/features.hpp"
#include "motrace/homography.hpp"
#include "motrace/klt.hpp"
#include "motrace/motion.hpp"
#include "motrace/pipeline.hpp"
#include "motrace/png_io.hpp"
#include "motrace/serialize.hpp"
#include "motrace/synthetic.hpp"

namespace py = pybind11;
using namespace motrace;

namespace {

using GrayArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using PointArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Structured values cross the boundary as plain dicts, through the same
// JSON encoding the CLI and the service write.
py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json from_python(const py::handle& obj) {
  if (obj.is_none()) return Json::object();
  return parse_json(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

ImageGray to_image(const GrayArray& arr) {
  if (arr.ndim() != 2) throw py::value_error("expected a 2-D grayscale array");
  const auto h = static_cast<int>(arr.shape(0)), w = static_cast<int>(arr.shape(1));
  return ImageGray(w, h, std::vector<double>(arr.data(), arr.data() + arr.size()));
}

GrayArray to_array(const RealField& img) {
  GrayArray out({img.height(), img.width()});
  std::copy(img.values().begin(), img.values().end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> to_array(const ImageRGB& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width(), 3});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

std::vector<Point2> to_points(const PointArray& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 2) throw py::value_error("expected an (N, 2) array");
  std::vector<Point2> pts(arr.shape(0));
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = {arr.at(k, 0), arr.at(k, 1)};
  return pts;
}

PointArray from_points(const std::vector<Point2>& pts) {
  PointArray out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    v(k, 0) = pts[k].x;
    v(k, 1) = pts[k].y;
  }
  return out;
}

Homography to_homography(const PointArray& arr) {
  if (arr.ndim() != 2 || arr.shape(0) != 3 || arr.shape(1) != 3) {
    throw py::value_error("expected a 3x3 matrix");
  }
  return Homography::from_row_major(std::span<const double>(arr.data(), 9));
}

PointArray to_matrix(const Homography& h) {
  PointArray out({3, 3});
  const auto values = h.row_major();
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

template <typename T>
T params_from(const py::handle& obj) {
  return from_python(obj).get<T>();
}

Pyramid pyramid_of(const GrayArray& img, const TrackParams& p) {
  return build_pyramid(to_image(img), p.pyramid_levels);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frame-pair motion analysis: features, tracking, stabilization, residual motion.";

  static auto* error_type = new py::exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type->ptr())(e.what());
      exc.attr("code") = std::string(code_name(e.code()));
      exc.attr("detail") = e.detail();
      PyErr_SetObject(error_type->ptr(), exc.ptr());
    } catch (const Json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.attr("DEFAULT_FPS") = kDefaultFps;

  m.def("default_params", [] { return to_python(Json(AnalysisParams{})); },
        "Default analysis parameters as a dict.");

  m.def("frame_timestamp", &frame_timestamp, py::arg("index"), py::arg("fps") = kDefaultFps);
  m.def("frame_file_name", &frame_file_name, py::arg("index"));

  m.def(
      "read_frame",
      [](const std::filesystem::path& path) { return to_array(to_grayscale(read_png(path))); },
      py::arg("path"), "Grayscale float64 array in [0, 1] from an 8-bit PNG.");
  m.def(
      "write_frame",
      [](const std::filesystem::path& path, const GrayArray& img) { write_png(path, to_image(img)); },
      py::arg("path"), py::arg("image"));

  m.def(
      "detect_features",
      [](const GrayArray& img, const py::object& params) {
        const auto features = detect_features(to_image(img), params_from<DetectorParams>(params));
        PointArray out({static_cast<py::ssize_t>(features.size()), py::ssize_t{3}});
        auto v = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < features.size(); ++k) {
          v(k, 0) = features[k].x;
          v(k, 1) = features[k].y;
          v(k, 2) = features[k].score;
        }
        return out;
      },
      py::arg("image"), py::arg("params") = py::none(),
      "Shi-Tomasi corners as an (N, 3) array of x, y, score.");

  m.def(
      "track_features",
      [](const GrayArray& a, const GrayArray& b, const PointArray& points, const py::object& params,
         bool forward_backward) {
        const auto tp = params_from<TrackParams>(params);
        const Pyramid pa = pyramid_of(a, tp), pb = pyramid_of(b, tp);
        std::vector<Feature> features;
        for (const Point2& p : to_points(points)) features.push_back({p.x, p.y, 0.0});
        auto pairs = track_features(pa, pb, features, tp);
        if (forward_backward) pairs = forward_backward_filter(pa, pb, pairs, tp);
        std::vector<Point2> p2;
        py::array_t<double> fb(static_cast<py::ssize_t>(pairs.size()));
        py::list status;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          p2.push_back(pairs[k].p2);
          fb.mutable_at(k) = pairs[k].fb_error;
          status.append(std::string(status_name(pairs[k].status)));
        }
        py::dict out;
        out["p2"] = from_points(p2);
        out["fb_error"] = fb;
        out["status"] = status;
        return out;
      },
      py::arg("frame_a"), py::arg("frame_b"), py::arg("points"), py::arg("params") = py::none(),
      py::arg("forward_backward") = true);

  m.def(
      "estimate_homography",
      [](const PointArray& p1, const PointArray& p2, const py::object& params, std::uint64_t seed) {
        const auto a = to_points(p1), b = to_points(p2);
        if (a.size() != b.size()) throw py::value_error("p1 and p2 differ in length");
        std::vector<MatchedPair> pairs(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
          pairs[k] = {a[k], b[k], 0.0, TrackStatus::Tracked};
        }
        const HomographyFit fit =
            estimate_homography(pairs, params_from<RobustFitParams>(params), seed);
        py::dict out;
        out["h"] = to_matrix(fit.h);
        out["inliers"] = py::array(py::cast(std::vector<bool>(fit.inlier_mask)));
        out["inlier_count"] = fit.inlier_count;
        out["iterations"] = fit.iterations;
        return out;
      },
      py::arg("p1"), py::arg("p2"), py::arg("params") = py::none(), py::arg("seed") = 0);

  m.def(
      "apply_homography",
      [](const PointArray& h, const PointArray& points) {
        const Homography hh = to_homography(h);
        auto pts = to_points(points);
        for (auto& p : pts) p = apply_homography(hh, p);
        return from_points(pts);
      },
      py::arg("h"), py::arg("points"));

  m.def(
      "warp_image",
      [](const GrayArray& img, const PointArray& h, double fill) {
        return to_array(warp_image(to_image(img), to_homography(h), fill));
      },
      py::arg("image"), py::arg("h"), py::arg("fill") = 0.0);

  m.def(
      "filter_by_threshold",
      [](const py::object& field, double ts) {
        return to_python(Json(filter_by_threshold(params_from<MotionField>(field), ts)));
      },
      py::arg("field"), py::arg("ts"));

  m.def(
      "threshold_sweep",
      [](const py::object& field, const py::object& grid) {
        const std::vector<double> values = py::isinstance<py::str>(grid)
                                               ? parse_ts_grid(grid.cast<std::string>())
                                               : grid.cast<std::vector<double>>();
        return to_python(Json(threshold_sweep(params_from<MotionField>(field), values)));
      },
      py::arg("field"), py::arg("ts_grid"));

  m.def(
      "make_demo_scene",
      [](std::uint64_t seed, bool with_block) { return to_python(Json(make_demo_scene(seed, with_block))); },
      py::arg("seed"), py::arg("with_block") = true);

  m.def(
      "generate_pair",
      [](const py::object& scene) {
        const auto spec = params_from<SceneSpec>(scene);
        const ScenePair pair = generate_pair(spec);
        return py::make_tuple(to_array(pair.frame_a), to_array(pair.frame_b),
                              to_python(truth_to_json(pair.truth, spec)));
      },
      py::arg("scene"), "(frame_a, frame_b, truth) for a scene dict.");

  m.def(
      "analyze_pair",
      [](const std::filesystem::path& frames, int i, int j, const py::object& params,
         const std::optional<std::filesystem::path>& out_dir, double fps) {
        const FrameStore store = FrameStore::open(frames, fps);
        const AnalysisParams ap = params_from_json(from_python(params));
        AnalysisResult r;
        {
          py::gil_scoped_release release;
          r = analyze_pair(store, i, j, ap, out_dir.value_or(std::filesystem::path{}));
        }
        py::dict out = to_python(result_to_json(r));
        out["run_dir"] = r.run_dir.empty() ? py::object(py::none()) : py::str(r.run_dir.string());
        out["duration_s"] = r.duration_s;
        return out;
      },
      py::arg("frames_dir"), py::arg("i"), py::arg("j"), py::arg("params") = py::none(),
      py::arg("out_dir") = py::none(), py::arg("fps") = kDefaultFps,
      "Full frame-pair analysis; the dict matches result.json plus run_dir and duration_s.");
}
