#include "hpcgen/backend/mock_server.hpp"

#include <httplib.h>

#include "hpcgen/backend/wire.hpp"
#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

std::string error_body(const std::string& message) {
  return nlohmann::json{{"api_version", wire::kApiVersion}, {"error", message}}.dump();
}

}  // namespace

BackendServer::BackendServer(std::shared_ptr<Backend> backend)
    : backend_(std::move(backend)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

BackendServer::~BackendServer() { stop(); }

std::pair<int, std::string> BackendServer::handle(const std::string& endpoint, const std::string& body) const {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return {400, error_body(std::string("request is not JSON: ") + e.what())};
  }
  try {
    wire::check_api_version(req);
    const std::string request_id = req.value("request_id", std::string());
    nlohmann::json reply;
    if (endpoint == "/v1/txt2img") {
      const GenerationRequest gen = wire::generation_request_from_json(req);
      reply = wire::response_envelope(backend_->model_id(), gen.seed, request_id);
      reply["image"] = wire::image_to_json(backend_->txt2img(gen));
    } else if (endpoint == "/v1/encode") {
      reply = wire::response_envelope(backend_->model_id(), req.value("seed", std::uint64_t{0}), request_id);
      reply["latents"] = wire::latents_to_json(backend_->encode_latents(wire::image_from_json(req.at("image"))));
    } else if (endpoint == "/v1/depth2img") {
      const GenerationRequest gen = wire::generation_request_from_json(req);
      const Latents z = wire::latents_from_json(req.at("latents"));
      const DepthMap depth = wire::depth_from_json(req.at("depth"));
      reply = wire::response_envelope(backend_->model_id(), gen.seed, request_id);
      reply["image"] = wire::image_to_json(backend_->depth2img(z, depth, gen));
      reply["latent_checksum"] = z.checksum();
    } else if (endpoint == "/v1/hmr") {
      reply = wire::response_envelope(backend_->model_id(), req.value("seed", std::uint64_t{0}), request_id);
      reply.update(wire::hmr_result_to_json(backend_->hmr(wire::image_from_json(req.at("image")))));
    } else if (endpoint == "/v1/segment") {
      reply = wire::response_envelope(backend_->model_id(), req.value("seed", std::uint64_t{0}), request_id);
      reply.update(wire::segmentation_to_json(backend_->segment(wire::image_from_json(req.at("image")))));
    } else {
      return {404, error_body("unknown endpoint " + endpoint)};
    }
    return {200, reply.dump()};
  } catch (const ProtocolError& e) {
    return {400, error_body(e.what())};
  } catch (const ValidationError& e) {
    return {400, error_body(e.what())};
  } catch (const ShapeError& e) {
    return {400, error_body(e.what())};
  } catch (const nlohmann::json::exception& e) {
    return {400, error_body(e.what())};
  } catch (const std::exception& e) {
    return {500, error_body(e.what())};
  }
}

void BackendServer::install_routes() {
  server_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    const nlohmann::json body = {{"api_version", wire::kApiVersion}, {"model_id", backend_->model_id()}, {"status", "ok"}};
    res.set_content(body.dump(), "application/json");
  });
  for (const char* endpoint : {"/v1/txt2img", "/v1/encode", "/v1/depth2img", "/v1/hmr", "/v1/segment"}) {
    const std::string path = endpoint;
    server_->Post(path, [this, path](const httplib::Request& req, httplib::Response& res) {
      auto [status, body] = handle(path, req.body);
      res.status = status;
      res.set_content(body, "application/json");
    });
  }
}

int BackendServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw BackendError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void BackendServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw BackendError("cannot listen on " + host + ":" + std::to_string(port));
}

void BackendServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace hpcgen
