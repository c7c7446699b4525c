#pragma once

#include <memory>
#include <string>

#include "tracetable/service.hpp"

namespace tracetable {

/// JSON-over-HTTP front end for a Service. The service must outlive the server.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port. Throws Error on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  /// Blocks until listen() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tracetable
