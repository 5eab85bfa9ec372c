#include "motrace/service.hpp"

#include <httplib.h>

#include <fstream>
#include <iterator>
#include <random>
#include <regex>
#include <sstream>

#include "motrace/error.hpp"
#include "motrace/png_io.hpp"

namespace motrace {

namespace fs = std::filesystem;

namespace {

ServiceResponse json_response(int status, const Json& body) {
  return {status, body.dump(), "application/json"};
}

ServiceResponse error_response(const Error& e) {
  return json_response(http_status(e.code()), Json{{"code", code_name(e.code())},
                                                   {"message", e.what()},
                                                   {"detail", e.detail()}});
}

template <class Fn>
ServiceResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(ErrorCode::ParseError, e.what()));
  } catch (const std::exception& e) {
    return json_response(500, Json{{"code", "Internal"}, {"message", e.what()}, {"detail", ""}});
  }
}

std::string new_session_id() {
  std::random_device rd;
  std::ostringstream os;
  os << std::hex << rd() << rd();
  return os.str();
}

int parse_int(const std::string& text, ErrorCode code, const std::string& what) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(code, what + " must be an integer, got '" + text + "'");
  }
  return value;
}

Roi parse_roi(const std::string& text) {
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    parts.push_back(parse_int(item, ErrorCode::ParseError, "roi component"));
  }
  if (parts.size() != 4) throw Error(ErrorCode::ParseError, "roi must be x,y,w,h");
  return Roi{parts[0], parts[1], parts[2], parts[3]};
}

std::pair<int, int> parse_pair(const Json& body) {
  const Json& pair = body.at("pair");
  if (!pair.is_array() || pair.size() != 2) {
    throw Error(ErrorCode::ParseError, "pair must be [i, j]");
  }
  return {pair[0].get<int>(), pair[1].get<int>()};
}

AnalysisParams parse_params(const Json& body) {
  auto it = body.find("params");
  return it == body.end() ? AnalysisParams{} : params_from_json(*it);
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::ParseError:
    case ErrorCode::InvalidParams:
      return 400;
    case ErrorCode::IoError:
      return 500;
    default:
      return 422;
  }
}

AnalysisService::AnalysisService(fs::path artifacts_root)
    : artifacts_root_(std::move(artifacts_root)) {
  fs::create_directories(artifacts_root_);
}

std::shared_ptr<AnalysisService::Session> AnalysisService::find_session(
    const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  }
  return it->second;
}

std::shared_ptr<const PairAnalysis> AnalysisService::pair_analysis(
    Session& s, int i, int j, const AnalysisParams& params, bool* hit) {
  const std::string key = upstream_key(s.store, i, j, params);
  {
    std::lock_guard lock(s.cache_mutex);
    if (auto it = s.cache.find(key); it != s.cache.end()) {
      ++cache_hits_;
      *hit = true;
      return it->second;
    }
  }
  // Computed outside the lock; a concurrent identical request produces the
  // same value, so whichever insert lands first is kept.
  auto computed = std::make_shared<const PairAnalysis>(prepare_pair(s.store, i, j, params));
  ++cache_misses_;
  *hit = false;
  std::lock_guard lock(s.cache_mutex);
  return s.cache.emplace(key, std::move(computed)).first->second;
}

ServiceResponse AnalysisService::create_session(const std::string& body) {
  return guarded([&] {
    const Json req = parse_json(body);
    const std::string dir = req.at("frames_dir").get<std::string>();
    const double fps = req.value("fps", kDefaultFps);
    auto session = std::make_shared<Session>();
    try {
      session->store = FrameStore::open(dir, fps);
    } catch (const Error& e) {
      throw Error(ErrorCode::BadFrameStore, "cannot open frame store " + dir,
                  std::string(code_name(e.code())) + ": " + e.what() +
                      (e.detail().empty() ? "" : " (" + e.detail() + ")"));
    }
    session->id = new_session_id();
    const Json out{{"id", session->id},
                   {"frame_count", session->store.frame_count()},
                   {"width", session->store.width()},
                   {"height", session->store.height()},
                   {"fps", session->store.fps()}};
    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(session->id, std::move(session));
    return json_response(201, out);
  });
}

ServiceResponse AnalysisService::get_session(const std::string& id) {
  return guarded([&] {
    auto s = find_session(id);
    std::size_t cached = 0;
    {
      std::lock_guard lock(s->cache_mutex);
      cached = s->cache.size();
    }
    return json_response(200, Json{{"id", s->id},
                                   {"frames_dir", s->store.directory().string()},
                                   {"frame_count", s->store.frame_count()},
                                   {"width", s->store.width()},
                                   {"height", s->store.height()},
                                   {"fps", s->store.fps()},
                                   {"cached_analyses", cached}});
  });
}

ServiceResponse AnalysisService::get_frame(const std::string& id, const std::string& index,
                                           const std::optional<std::string>& roi,
                                           const std::optional<std::string>& gain) {
  return guarded([&] {
    auto s = find_session(id);
    const int k = parse_int(index, ErrorCode::InvalidIndex, "frame index");
    ImageRGB img = s->store.load(k);
    if (roi && !roi->empty()) img = crop_roi(img, parse_roi(*roi));
    if (gain && !gain->empty()) {
      double g = 0.0;
      try {
        g = std::stod(*gain);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "gain must be a number");
      }
      img = adjust_brightness(img, g);
    }
    const auto png = encode_png(img);
    return ServiceResponse{200, std::string(png.begin(), png.end()), "image/png"};
  });
}

ServiceResponse AnalysisService::analyze(const std::string& id, const std::string& body) {
  return guarded([&] {
    auto s = find_session(id);
    const Json req = parse_json(body);
    const auto [i, j] = parse_pair(req);
    const AnalysisParams params = parse_params(req);
    bool hit = false;
    const auto pa = pair_analysis(*s, i, j, params, &hit);
    RenderedArtifacts artifacts;
    AnalysisResult result = finish_analysis(*pa, params, &artifacts);
    persist_run(artifacts_root_, result, artifacts);
    const std::string base = "/artifacts/" + result.run_id + "/";
    return json_response(200, Json{{"result", result_to_json(result)},
                                   {"cache_hit", hit},
                                   {"artifacts",
                                    {{"overlay", base + "overlay.png"},
                                     {"overlay_provenance", base + "overlay.json"},
                                     {"difference", base + "difference.png"},
                                     {"result", base + "result.json"}}}});
  });
}

ServiceResponse AnalysisService::sweep(const std::string& id, const std::string& body) {
  return guarded([&] {
    auto s = find_session(id);
    const Json req = parse_json(body);
    const auto [i, j] = parse_pair(req);
    const AnalysisParams params = parse_params(req);
    std::vector<double> grid = default_ts_grid();
    if (auto it = req.find("ts_grid"); it != req.end()) {
      grid = it->is_string() ? parse_ts_grid(it->get<std::string>())
                             : it->get<std::vector<double>>();
    }
    bool hit = false;
    const auto pa = pair_analysis(*s, i, j, params, &hit);
    SweepRun run = run_sweep_on(*pa, params, grid);
    persist_sweep(artifacts_root_, run, *pa);
    Json out = sweep_to_json(run, *pa);
    for (auto& name : out["overlays"]) {
      name = "/artifacts/" + run.run_id + "/" + name.get<std::string>();
    }
    out["cache_hit"] = hit;
    return json_response(200, out);
  });
}

ServiceResponse AnalysisService::get_artifact(const std::string& run, const std::string& name) {
  return guarded([&] {
    static const std::regex kRun(R"([A-Za-z0-9-]+)");
    static const std::regex kName(R"([A-Za-z0-9_][A-Za-z0-9_.-]*)");
    if (!std::regex_match(run, kRun) || !std::regex_match(name, kName)) {
      throw Error(ErrorCode::NotFound, "no such artifact");
    }
    const fs::path path = artifacts_root_ / run / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "no artifact " + run + "/" + name);
    std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const std::string type =
        path.extension() == ".png" ? "image/png" : "application/json";
    return ServiceResponse{200, std::move(bytes), type};
  });
}

void AnalysisService::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto query = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
  };

  server.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, create_session(req.body));
  });
  server.Get(R"(/sessions/([^/]+))",
             [this, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, get_session(req.matches[1]));
             });
  server.Get(R"(/sessions/([^/]+)/frames/([^/]+))",
             [this, reply, query](const httplib::Request& req, httplib::Response& res) {
               reply(res, get_frame(req.matches[1], req.matches[2], query(req, "roi"),
                                    query(req, "gain")));
             });
  server.Post(R"(/sessions/([^/]+)/analyze)",
              [this, reply](const httplib::Request& req, httplib::Response& res) {
                reply(res, analyze(req.matches[1], req.body));
              });
  server.Post(R"(/sessions/([^/]+)/sweep)",
              [this, reply](const httplib::Request& req, httplib::Response& res) {
                reply(res, sweep(req.matches[1], req.body));
              });
  server.Get(R"(/artifacts/([^/]+)/([^/]+))",
             [this, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, get_artifact(req.matches[1], req.matches[2]));
             });
}

void run_server(const std::string& host, int port, const fs::path& artifacts_root) {
  AnalysisService service(artifacts_root);
  httplib::Server server;
  service.mount(server);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace motrace
