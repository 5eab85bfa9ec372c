#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "motrace/error.hpp"
#include "motrace/pipeline.hpp"

namespace httplib {
class Server;
}

namespace motrace {

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Session-oriented JSON API over the pipeline. Every handler is callable
/// directly (for tests) and through `mount` on an httplib server.
///
///   POST /sessions                    {"frames_dir", "fps"?}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/frames/{k}    ?roi=x,y,w,h&gain=g   -> PNG
///   POST /sessions/{id}/analyze       {"pair": [i, j], "params": {...}}
///   POST /sessions/{id}/sweep         {"pair", "params", "ts_grid"}
///   GET  /artifacts/{run}/{name}
///
/// Errors are {"code", "message", "detail"} with stable code strings.
class AnalysisService {
 public:
  explicit AnalysisService(std::filesystem::path artifacts_root);

  ServiceResponse create_session(const std::string& body);
  ServiceResponse get_session(const std::string& id);
  ServiceResponse get_frame(const std::string& id, const std::string& index,
                            const std::optional<std::string>& roi,
                            const std::optional<std::string>& gain);
  ServiceResponse analyze(const std::string& id, const std::string& body);
  ServiceResponse sweep(const std::string& id, const std::string& body);
  ServiceResponse get_artifact(const std::string& run, const std::string& name);

  void mount(httplib::Server& server);

  std::size_t cache_hits() const { return cache_hits_; }
  std::size_t cache_misses() const { return cache_misses_; }

 private:
  struct Session {
    std::string id;
    FrameStore store;
    std::mutex cache_mutex;
    std::map<std::string, std::shared_ptr<const PairAnalysis>> cache;
  };

  std::shared_ptr<Session> find_session(const std::string& id) const;
  std::shared_ptr<const PairAnalysis> pair_analysis(Session& s, int i, int j,
                                                    const AnalysisParams& params,
                                                    bool* hit);

  std::filesystem::path artifacts_root_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> cache_misses_{0};
};

/// Maps an error code onto an HTTP status.
int http_status(ErrorCode code);

/// Blocks serving on host:port until the process is stopped.
void run_server(const std::string& host, int port,
                const std::filesystem::path& artifacts_root);

}  // namespace motrace
