#pragma once

#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "hpcgen/backend/backend.hpp"

namespace httplib {
class Server;
}

namespace hpcgen {

/** Serves any Backend (normally MockBackend) over the wire protocol.
 *  Request validation failures answer 400, backend failures 500, unknown
 *  paths 404. */
class BackendServer {
 public:
  explicit BackendServer(std::shared_ptr<Backend> backend);
  ~BackendServer();
  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  // Bind (port 0 picks a free port) and serve on a background thread.
  // Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Bind and serve on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  // Dispatch one request body to an endpoint without HTTP; returns
  // (status, response body). Used by the HTTP handlers and by tests.
  std::pair<int, std::string> handle(const std::string& endpoint, const std::string& body) const;

 private:
  void install_routes();

  std::shared_ptr<Backend> backend_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace hpcgen
