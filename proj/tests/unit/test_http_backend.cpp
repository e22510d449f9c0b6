#include <atomic>
#include <thread>

#include <gtest/gtest.h>

#include "hpcgen/backend/http_backend.hpp"
#include "hpcgen/backend/mock_backend.hpp"
#include "hpcgen/backend/mock_server.hpp"
#include "hpcgen/backend/wire.hpp"
#include "hpcgen/error.hpp"

// After Eigen: resolv.h (via httplib) defines a _res macro.
#include <httplib.h>

using namespace hpcgen;
using nlohmann::json;

namespace {

GenerationRequest request(const std::string& prompt, std::uint64_t seed, int size = 64) {
  GenerationRequest r;
  r.prompt = prompt;
  r.seed = seed;
  r.width = r.height = size;
  return r;
}

HttpBackendOptions fast_options(int attempts = 3) {
  HttpBackendOptions o;
  o.retry.attempts = attempts;
  o.retry.base_delay = std::chrono::milliseconds(5);
  o.timeout = std::chrono::seconds(10);
  o.expected_body_joints = 2;
  return o;
}

// Fails the first `failures` txt2img calls with a generic error (HTTP 500).
class FlakyBackend final : public Backend {
 public:
  explicit FlakyBackend(int failures) : failures_(failures) {}
  ImageBuffer txt2img(const GenerationRequest& req) override {
    ++calls;
    if (calls.load() <= failures_) throw std::runtime_error("temporarily out of memory");
    return inner_.txt2img(req);
  }
  Latents encode_latents(const ImageBuffer& i) override { return inner_.encode_latents(i); }
  ImageBuffer depth2img(const Latents& z, const DepthMap& d, const GenerationRequest& r) override {
    return inner_.depth2img(z, d, r);
  }
  HmrResult hmr(const ImageBuffer& i) override { return inner_.hmr(i); }
  SegmentationResult segment(const ImageBuffer& i) override { return inner_.segment(i); }
  std::string model_id() const override { return "flaky"; }

  std::atomic<int> calls{0};

 private:
  int failures_;
  MockBackend inner_;
};

// Raw HTTP server answering every POST with a fixed body.
class CannedServer {
 public:
  explicit CannedServer(std::function<std::string(const json&)> reply) {
    server_.Post(R"(/v1/.*)", [reply](const httplib::Request& req, httplib::Response& res) {
      res.set_content(reply(json::parse(req.body)), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~CannedServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

class HttpRoundTrip : public ::testing::Test {
 protected:
  void SetUp() override {
    mock = std::make_shared<MockBackend>();
    server = std::make_unique<BackendServer>(mock);
    port = server->start();
    client = std::make_unique<HttpBackend>("http://127.0.0.1:" + std::to_string(port), fast_options());
  }
  void TearDown() override { server->stop(); }

  std::shared_ptr<MockBackend> mock;
  std::unique_ptr<BackendServer> server;
  std::unique_ptr<HttpBackend> client;
  int port = 0;
};

TEST_F(HttpRoundTrip, EveryEndpointMatchesInProcess) {
  const GenerationRequest req = request("a photo of an athlete doing yoga", 11);
  const ImageBuffer img = client->txt2img(req);
  EXPECT_EQ(img, mock->txt2img(req));

  const Latents z = client->encode_latents(img);
  EXPECT_EQ(z, mock->encode_latents(img));

  DepthMap d(z.width, z.height);
  d.at(3, 4) = 0.5f;
  EXPECT_EQ(client->depth2img(z, d, req), mock->depth2img(z, d, req));

  const HmrResult h = client->hmr(img), hm = mock->hmr(img);
  ASSERT_EQ(h.people.size(), hm.people.size());
  for (std::size_t i = 0; i < h.people.size(); ++i) {
    EXPECT_EQ(h.people[i].theta.body_pose, hm.people[i].theta.body_pose);
    EXPECT_EQ(h.people[i].theta.global_orient, hm.people[i].theta.global_orient);
    EXPECT_EQ(h.people[i].beta.betas, hm.people[i].beta.betas);
    EXPECT_EQ(h.people[i].camera.scale, hm.people[i].camera.scale);
  }

  const SegmentationResult s = client->segment(img), sm = mock->segment(img);
  ASSERT_EQ(s.instances.size(), sm.instances.size());
  for (std::size_t i = 0; i < s.instances.size(); ++i) EXPECT_EQ(s.instances[i].mask, sm.instances[i].mask);

  EXPECT_EQ(client->model_id(), "hpcgen-mock-1");
  const json health = client->health();
  EXPECT_EQ(health["status"], "ok");
  EXPECT_EQ(health["api_version"], "1");
}

TEST_F(HttpRoundTrip, ClientErrorsAreNotRetried) {
  GenerationRequest bad = request("a", 1);
  bad.strength = 0.0;
  // Client-side validation would catch this; go through the raw handler.
  json body = {{"api_version", "1"}};
  wire::put_generation_request(body, bad);
  EXPECT_EQ(server->handle("/v1/txt2img", body.dump()).first, 400);
  EXPECT_EQ(server->handle("/v1/txt2img", "{not json").first, 400);
  EXPECT_EQ(server->handle("/v1/nope", R"({"api_version":"1"})").first, 404);
  json old = body;
  old["api_version"] = "0";
  old["strength"] = 0.5;
  const auto [status, reply] = server->handle("/v1/txt2img", old.dump());
  EXPECT_EQ(status, 400);
  EXPECT_NE(reply.find("api_version"), std::string::npos);

  EXPECT_THROW(client->depth2img(Latents(4, 8, 8), DepthMap(4, 4), request("a", 1)), ShapeError);
}

TEST_F(HttpRoundTrip, ConcurrentRequests) {
  std::vector<std::jthread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      const GenerationRequest req = request("p" + std::to_string(t), static_cast<std::uint64_t>(t));
      for (int i = 0; i < 3; ++i) {
        if (!(client->txt2img(req) == mock->txt2img(req))) ++mismatches;
      }
    });
  }
  threads.clear();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST(HttpBackend, ServerErrorsRetriedThenSucceed) {
  auto flaky = std::make_shared<FlakyBackend>(2);
  BackendServer server(flaky);
  const int port = server.start();
  HttpBackend client("http://127.0.0.1:" + std::to_string(port), fast_options(3));
  EXPECT_NO_THROW(client.txt2img(request("a", 1)));
  EXPECT_EQ(flaky->calls.load(), 3);
}

TEST(HttpBackend, RetriesExhausted) {
  auto flaky = std::make_shared<FlakyBackend>(100);
  BackendServer server(flaky);
  const int port = server.start();
  HttpBackend client("http://127.0.0.1:" + std::to_string(port), fast_options(3));
  try {
    client.txt2img(request("a", 1));
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("3 attempts"), std::string::npos) << e.what();
  }
  EXPECT_EQ(flaky->calls.load(), 3);
}

TEST(HttpBackend, UnreachableIsBackendError) {
  int port = 0;
  {
    BackendServer s(std::make_shared<MockBackend>());
    port = s.start();
  }
  HttpBackend client("http://127.0.0.1:" + std::to_string(port), fast_options(2));
  EXPECT_THROW(client.txt2img(request("a", 1)), BackendError);
}

TEST(HttpBackend, VersionMismatchIsProtocolError) {
  CannedServer s([](const json& req) {
    json r = wire::response_envelope("m", 0, req.value("request_id", ""));
    r["api_version"] = "2";
    return r.dump();
  });
  HttpBackend client(s.url(), fast_options());
  EXPECT_THROW(client.txt2img(request("a", 1)), ProtocolError);
}

TEST(HttpBackend, RequestIdMismatchIsProtocolError) {
  CannedServer s([](const json&) {
    json r = wire::response_envelope("m", 0, "someone-else");
    r["image"] = wire::image_to_json(ImageBuffer(2, 2));
    return r.dump();
  });
  HttpBackend client(s.url(), fast_options());
  EXPECT_THROW(client.txt2img(request("a", 1)), ProtocolError);
}

TEST(HttpBackend, MalformedPayloadIsProtocolError) {
  CannedServer s([](const json& req) {
    json r = wire::response_envelope("m", 0, req.value("request_id", ""));
    r["people"] = json::array({{{"theta", {0.1, 0.2}}, {"beta", {0.0}}, {"confidence", 0.5},
                                {"camera", {{"scale", 1}, {"tx", 0}, {"ty", 0}, {"width", 8}, {"height", 8}}}}});
    return r.dump();
  });
  HttpBackend client(s.url(), fast_options());
  EXPECT_THROW(client.hmr(ImageBuffer(8, 8)), ProtocolError);
}

TEST(HttpBackend, BodyOnlyThetaNormalized) {
  CannedServer s([](const json& req) {
    json r = wire::response_envelope("m", 0, req.value("request_id", ""));
    r["people"] = json::array({{{"theta", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}}, {"theta_convention", "body"},
                                {"beta", {0.0}}, {"confidence", 0.5},
                                {"camera", {{"scale", 1}, {"tx", 0}, {"ty", 0}, {"width", 8}, {"height", 8}}}}});
    return r.dump();
  });
  HttpBackend client(s.url(), fast_options());
  const HmrResult h = client.hmr(ImageBuffer(8, 8));
  ASSERT_EQ(h.people.size(), 1u);
  EXPECT_EQ(h.people[0].theta.global_orient, Eigen::Vector3d::Zero());
  EXPECT_EQ(h.people[0].theta.body_pose(1, 2), 0.6);
}

TEST(HttpBackend, EmptyUrlRejected) { EXPECT_THROW(HttpBackend(""), ValidationError); }
