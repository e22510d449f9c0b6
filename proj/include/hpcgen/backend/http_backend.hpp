#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "hpcgen/backend/backend.hpp"

namespace hpcgen {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{1000};  // doubled after each failure
};

struct HttpBackendOptions {
  RetryPolicy retry;
  std::chrono::seconds timeout{300};
  int max_in_flight = 4;
  // Body joints expected from /v1/hmr when a response does not declare its
  // theta convention (0 = require the declaration).
  int expected_body_joints = 0;
};

/** Client for the backend wire protocol (POST /v1/{txt2img, encode,
 *  depth2img, hmr, segment}). Transport failures and 5xx answers are
 *  retried with exponential backoff; 4xx answers and protocol violations
 *  (version mismatch, malformed payloads, request-id mismatch) fail
 *  immediately. */
class HttpBackend final : public Backend {
 public:
  // base_url like "http://127.0.0.1:8080" (https when built with TLS).
  explicit HttpBackend(std::string base_url, HttpBackendOptions options = {});
  ~HttpBackend() override;

  ImageBuffer txt2img(const GenerationRequest& req) override;
  Latents encode_latents(const ImageBuffer& image) override;
  ImageBuffer depth2img(const Latents& z, const DepthMap& depth, const GenerationRequest& req) override;
  HmrResult hmr(const ImageBuffer& image) override;
  SegmentationResult segment(const ImageBuffer& image) override;
  std::string model_id() const override;

  // GET /v1/health
  nlohmann::json health();

 private:
  nlohmann::json post(const std::string& endpoint, nlohmann::json body);
  std::string next_request_id();

  std::string base_url_;
  HttpBackendOptions options_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::uint64_t> request_counter_{0};
  mutable std::mutex model_id_mutex_;
  std::string model_id_;
};

// Environment variable consulted when no backend URL is given.
inline constexpr const char* kBackendUrlEnv = "HPC_BACKEND_URL";

}  // namespace hpcgen
