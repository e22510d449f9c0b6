#include "hpcgen/backend/http_backend.hpp"

#include <thread>

#include <httplib.h>

#include "hpcgen/backend/wire.hpp"
#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~InFlightSlot() { s_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

HttpBackend::HttpBackend(std::string base_url, HttpBackendOptions options)
    : base_url_(std::move(base_url)), options_(options), in_flight_(std::max(1, options.max_in_flight)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.empty()) throw ValidationError("backend URL must not be empty");
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::next_request_id() { return "req-" + std::to_string(request_counter_.fetch_add(1) + 1); }

nlohmann::json HttpBackend::post(const std::string& endpoint, nlohmann::json body) {
  const std::string request_id = next_request_id();
  body["api_version"] = wire::kApiVersion;
  body["request_id"] = request_id;
  const std::string text = body.dump();

  InFlightSlot slot(in_flight_);
  auto delay = options_.retry.base_delay;
  std::string last_error;
  const int attempts = std::max(1, options_.retry.attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    const auto res = client.Post(endpoint, text, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    } else if (res->status != 200) {
      throw BackendError(endpoint + " rejected the request (HTTP " + std::to_string(res->status) + "): " + res->body);
    } else {
      nlohmann::json reply;
      try {
        reply = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(endpoint + ": response is not JSON: " + e.what());
      }
      wire::check_api_version(reply);
      if (reply.value("request_id", std::string()) != request_id) {
        throw ProtocolError(endpoint + ": response request_id does not match " + request_id);
      }
      if (reply.contains("model_id") && reply["model_id"].is_string()) {
        std::lock_guard lock(model_id_mutex_);
        model_id_ = reply["model_id"].get<std::string>();
      }
      return reply;
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw BackendError(endpoint + " failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

ImageBuffer HttpBackend::txt2img(const GenerationRequest& req) {
  req.validate();
  nlohmann::json body = nlohmann::json::object();
  wire::put_generation_request(body, req);
  return wire::image_from_json(post("/v1/txt2img", std::move(body)).at("image"));
}

Latents HttpBackend::encode_latents(const ImageBuffer& image) {
  nlohmann::json body = {{"image", wire::image_to_json(image)}, {"seed", 0}};
  return wire::latents_from_json(post("/v1/encode", std::move(body)).at("latents"));
}

ImageBuffer HttpBackend::depth2img(const Latents& z, const DepthMap& depth, const GenerationRequest& req) {
  req.validate();
  if (depth.width != z.width || depth.height != z.height) {
    throw ShapeError("depth2img: depth size does not match latent spatial size");
  }
  nlohmann::json body = {{"latents", wire::latents_to_json(z)}, {"depth", wire::depth_to_json(depth)}};
  wire::put_generation_request(body, req);
  const nlohmann::json reply = post("/v1/depth2img", std::move(body));
  if (reply.contains("latent_checksum") && reply["latent_checksum"] != z.checksum()) {
    throw ProtocolError("depth2img: backend echoed latent checksum " + reply["latent_checksum"].dump() +
                        ", sent " + z.checksum());
  }
  return wire::image_from_json(reply.at("image"));
}

HmrResult HttpBackend::hmr(const ImageBuffer& image) {
  nlohmann::json body = {{"image", wire::image_to_json(image)}, {"seed", 0}};
  return wire::hmr_result_from_json(post("/v1/hmr", std::move(body)), options_.expected_body_joints);
}

SegmentationResult HttpBackend::segment(const ImageBuffer& image) {
  nlohmann::json body = {{"image", wire::image_to_json(image)}, {"seed", 0}};
  return wire::segmentation_from_json(post("/v1/segment", std::move(body)));
}

std::string HttpBackend::model_id() const {
  std::lock_guard lock(model_id_mutex_);
  return model_id_.empty() ? base_url_ : model_id_;
}

nlohmann::json HttpBackend::health() {
  httplib::Client client(base_url_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  const auto res = client.Get("/v1/health");
  if (!res) throw BackendError("health check failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("health check returned HTTP " + std::to_string(res->status));
  try {
    auto reply = nlohmann::json::parse(res->body);
    wire::check_api_version(reply);
    return reply;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("health: response is not JSON: ") + e.what());
  }
}

}  // namespace hpcgen
