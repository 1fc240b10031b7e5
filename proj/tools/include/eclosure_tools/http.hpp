#pragma once

#include <memory>
#include <string>

#include "eclosure_tools/service.hpp"

namespace eclosure::tools {

// JSON-over-HTTP routes for a SessionService:
//   POST /sessions, GET /sessions, GET /sessions/{id},
//   POST /sessions/{id}/{membership,switch-loss,alpha,finalize},
//   GET /sessions/{id}/audit, GET /sessions/{id}/bound?set=1,2
class HttpFrontend {
 public:
  explicit HttpFrontend(SessionService& service);
  ~HttpFrontend();

  // Port 0 binds an ephemeral port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace eclosure::tools
