#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cohref/session.hpp"

namespace httplib {
class Server;
}

namespace cohref {

// HTTP front end: POST /api takes one wire message and returns the reply;
// GET /health answers {"ok": true}. Optionally serves a static client.
class Service {
 public:
  explicit Service(SessionManager& manager,
                   std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Error on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  SessionManager& manager_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace cohref
