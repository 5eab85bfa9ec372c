#include <gtest/gtest.h>

#include <thread>

#include "motrace/error.hpp"
#include "motrace/png_io.hpp"
#include "motrace/service.hpp"
#include "motrace/synthetic.hpp"
#include "test_support.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include <httplib.h>

using namespace motrace;
using motrace::testing::TempDir;
namespace fs = std::filesystem;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tmp_ = new TempDir;
    motrace::testing::write_scene(make_demo_scene(4, true), *tmp_ / "block");
    service_ = new AnalysisService(*tmp_ / "artifacts");
    server_ = new httplib::Server;
    service_->mount(*server_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    thread_ = new std::thread([] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }
  static void TearDownTestSuite() {
    server_->stop();
    thread_->join();
    delete thread_;
    delete server_;
    delete service_;
    delete tmp_;
  }

  static httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }

  static Json post(const std::string& path, const Json& body, int expect_status) {
    auto res = client().Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect_status) << res->body;
    return Json::parse(res->body);
  }

  static std::string open_block_session() {
    const Json s = post("/sessions", {{"frames_dir", (*tmp_ / "block").string()}}, 201);
    return s.at("id").get<std::string>();
  }

  static TempDir* tmp_;
  static AnalysisService* service_;
  static httplib::Server* server_;
  static std::thread* thread_;
  static int port_;
};

TempDir* ServiceTest::tmp_ = nullptr;
AnalysisService* ServiceTest::service_ = nullptr;
httplib::Server* ServiceTest::server_ = nullptr;
std::thread* ServiceTest::thread_ = nullptr;
int ServiceTest::port_ = 0;

}  // namespace

TEST(HttpStatus, CodeMapping) {
  EXPECT_EQ(http_status(ErrorCode::UnknownSession), 404);
  EXPECT_EQ(http_status(ErrorCode::NotFound), 404);
  EXPECT_EQ(http_status(ErrorCode::ParseError), 400);
  EXPECT_EQ(http_status(ErrorCode::InvalidPair), 422);
  EXPECT_EQ(http_status(ErrorCode::BadFrameStore), 422);
  EXPECT_EQ(http_status(ErrorCode::StabilizationFailed), 422);
  EXPECT_EQ(http_status(ErrorCode::IoError), 500);
}

TEST_F(ServiceTest, CreateAndDescribeSession) {
  const Json created =
      post("/sessions", {{"frames_dir", (*tmp_ / "block").string()}, {"fps", 25.0}}, 201);
  EXPECT_EQ(created.at("frame_count"), 2);
  EXPECT_EQ(created.at("width"), 641);
  EXPECT_EQ(created.at("height"), 361);
  EXPECT_EQ(created.at("fps"), 25.0);
  auto res = client().Get("/sessions/" + created.at("id").get<std::string>());
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const Json s = Json::parse(res->body);
  EXPECT_EQ(s.at("frame_count"), 2);
  EXPECT_EQ(s.at("cached_analyses"), 0);
}

TEST_F(ServiceTest, BadFrameStores) {
  TempDir empty;
  Json err = post("/sessions", {{"frames_dir", empty.path().string()}}, 422);
  EXPECT_EQ(err.at("code"), "BadFrameStore");
  EXPECT_NE(err.at("detail").get<std::string>().find("EmptyFrameStore"), std::string::npos);

  write_png(empty / frame_file_name(1), ImageGray(20, 10));
  write_png(empty / frame_file_name(2), ImageGray(21, 10));
  err = post("/sessions", {{"frames_dir", empty.path().string()}}, 422);
  EXPECT_EQ(err.at("code"), "BadFrameStore");
  EXPECT_NE(err.at("detail").get<std::string>().find("InconsistentDimensions"),
            std::string::npos);

  err = post("/sessions", {{"fps", 30}}, 400);
  EXPECT_EQ(err.at("code"), "ParseError");
  auto res = client().Post("/sessions", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ServiceTest, UnknownSession) {
  auto res = client().Get("/sessions/doesnotexist");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(Json::parse(res->body).at("code"), "UnknownSession");
  const Json err = post("/sessions/doesnotexist/analyze", {{"pair", {1, 2}}}, 404);
  EXPECT_EQ(err.at("code"), "UnknownSession");
}

TEST_F(ServiceTest, FramesWithRoiAndGain) {
  const std::string id = open_block_session();
  auto res = client().Get("/sessions/" + id + "/frames/1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  const ImageRGB full = decode_png({res->body.begin(), res->body.end()});
  EXPECT_EQ(full.width(), 641);

  res = client().Get("/sessions/" + id + "/frames/1?roi=10,20,100,50&gain=1.5");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const ImageRGB part = decode_png({res->body.begin(), res->body.end()});
  EXPECT_EQ(part.width(), 100);
  EXPECT_EQ(part, adjust_brightness(crop_roi(full, Roi{10, 20, 100, 50}), 1.5));

  res = client().Get("/sessions/" + id + "/frames/0");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(Json::parse(res->body).at("code"), "InvalidIndex");
  res = client().Get("/sessions/" + id + "/frames/abc");
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body).at("code"), "InvalidIndex");
  res = client().Get("/sessions/" + id + "/frames/1?roi=600,300,100,100");
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body).at("code"), "RoiOutOfBounds");
}

TEST_F(ServiceTest, AnalyzeCachesUpstreamWorkAcrossTsChanges) {
  const std::string id = open_block_session();
  const Json first = post("/sessions/" + id + "/analyze", {{"pair", {1, 2}}}, 200);
  EXPECT_FALSE(first.at("cache_hit").get<bool>());
  const Json second = post("/sessions/" + id + "/analyze",
                           {{"pair", {1, 2}}, {"params", {{"ts", 1.0}}}}, 200);
  EXPECT_TRUE(second.at("cache_hit").get<bool>());
  EXPECT_EQ(second.at("result").at("field"), first.at("result").at("field"));
  EXPECT_GE(second.at("result").at("filtered").at("vectors").size(),
            first.at("result").at("filtered").at("vectors").size());
  EXPECT_NE(second.at("result").at("run_id"), first.at("result").at("run_id"));

  const Json third = post("/sessions/" + id + "/analyze",
                          {{"pair", {1, 2}}, {"params", {{"seed", 5}}}}, 200);
  EXPECT_FALSE(third.at("cache_hit").get<bool>());

  auto res = client().Get("/sessions/" + id);
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body).at("cached_analyses"), 2);
}

TEST_F(ServiceTest, AnalyzeMatchesLibraryAndServesArtifacts) {
  const std::string id = open_block_session();
  const Json resp = post("/sessions/" + id + "/analyze", {{"pair", {1, 2}}}, 200);
  const FrameStore store = FrameStore::open(*tmp_ / "block");
  const AnalysisResult direct = analyze_pair(store, 1, 2, AnalysisParams{});
  EXPECT_EQ(resp.at("result"), result_to_json(direct));

  for (const char* key : {"overlay", "difference"}) {
    auto res = client().Get(resp.at("artifacts").at(key).get<std::string>());
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(decode_png({res->body.begin(), res->body.end()}).width(), 641);
  }
  auto res = client().Get(resp.at("artifacts").at("result").get<std::string>());
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body), resp.at("result"));
  res = client().Get(resp.at("artifacts").at("overlay_provenance").get<std::string>());
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body).at("brightness_gain"), 1.8);

  res = client().Get("/artifacts/nope/overlay.png");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = client().Get("/artifacts/" + direct.run_id + "/..");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServiceTest, AnalyzeErrors) {
  const std::string id = open_block_session();
  Json err = post("/sessions/" + id + "/analyze", {{"pair", {2, 2}}}, 422);
  EXPECT_EQ(err.at("code"), "InvalidPair");
  err = post("/sessions/" + id + "/analyze", {{"pair", {0, 2}}}, 422);
  EXPECT_EQ(err.at("code"), "InvalidIndex");
  err = post("/sessions/" + id + "/analyze", {{"pair", {1}}}, 400);
  EXPECT_EQ(err.at("code"), "ParseError");
  err = post("/sessions/" + id + "/analyze", {{"pair", {1, 2}}, {"params", {{"ts", -2}}}}, 422);
  EXPECT_EQ(err.at("code"), "NegativeThreshold");
  EXPECT_TRUE(err.contains("message"));
  EXPECT_TRUE(err.contains("detail"));
}

TEST_F(ServiceTest, SweepReportsCountsAndOverlays) {
  const std::string id = open_block_session();
  const Json resp = post("/sessions/" + id + "/sweep",
                         {{"pair", {1, 2}}, {"ts_grid", "0:1:6"}}, 200);
  const auto& entries = resp.at("sweep").at("entries");
  ASSERT_EQ(entries.size(), 7u);
  for (std::size_t k = 1; k < entries.size(); ++k) {
    EXPECT_LE(entries[k].at("surviving_count"), entries[k - 1].at("surviving_count"));
  }
  ASSERT_EQ(resp.at("overlays").size(), 7u);
  auto res = client().Get(resp.at("overlays")[3].get<std::string>());
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  const Json again = post("/sessions/" + id + "/sweep",
                          {{"pair", {1, 2}}, {"ts_grid", {0.0, 3.5}}}, 200);
  EXPECT_TRUE(again.at("cache_hit").get<bool>());
  EXPECT_EQ(again.at("sweep").at("entries")[0].at("surviving_count"),
            entries[0].at("surviving_count"));

  const Json err = post("/sessions/" + id + "/sweep",
                        {{"pair", {1, 2}}, {"ts_grid", {3.0, 1.0}}}, 422);
  EXPECT_EQ(err.at("code"), "UnsortedThresholds");
}
