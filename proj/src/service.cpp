#include "cohref/service.hpp"

#include <httplib.h>

#include "cohref/errors.hpp"

namespace cohref {

Service::Service(SessionManager& manager, std::optional<std::filesystem::path> static_dir)
    : manager_(manager), server_(std::make_unique<httplib::Server>()) {
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server_->Options("/api", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"ok":true})", "application/json");
  });
  server_->Post("/api", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"ok", false}, {"error", std::string("invalid JSON: ") + e.what()}}.dump(),
                      "application/json");
      return;
    }
    const nlohmann::json reply = manager_.handle(msg);
    res.set_content(reply.dump(), "application/json");
  });
  if (static_dir) {
    if (!server_->set_mount_point("/", static_dir->string())) {
      throw Error("cannot serve static files from " + static_dir->string());
    }
  }
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p < 0) throw Error("cannot bind to " + host);
    return p;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error("cannot bind to " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

bool Service::running() const { return server_->is_running(); }

}  // namespace cohref
