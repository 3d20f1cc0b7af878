#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "cohref/service.hpp"
#include "fixtures.hpp"

using namespace cohref;

TEST_CASE("http front end") {
  ColorSemantics sem(fixtures::default_lexicon());
  Pcfg pcfg = default_pcfg(sem.lexicon());
  SessionManager mgr(sem, pcfg, [] { return std::make_unique<BaselinePolicy>(); },
                     {1, ContextMode::Mixed, std::nullopt});
  Service svc(mgr);
  const int port = svc.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread server([&] { svc.listen(); });
  for (int i = 0; i < 200 && !svc.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));

  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(nlohmann::json::parse(health->body)["ok"] == true);

  auto post = [&](const nlohmann::json& msg) {
    auto res = cli.Post("/api", msg.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    return nlohmann::json::parse(res->body);
  };
  auto created = post({{"type", "create"}});
  REQUIRE(created["ok"] == true);
  auto reply = post({{"type", "utterance"}, {"session", created["session"]}, {"payload", {{"text", "something red"}}}});
  CHECK(reply["ok"] == true);
  CHECK(reply["reply"].contains("text"));
  CHECK(post({{"type", "select"}, {"session", "nope"}})["ok"] == false);

  auto bad = cli.Post("/api", "{not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(nlohmann::json::parse(bad->body)["ok"] == false);

  svc.stop();
  server.join();
  CHECK_FALSE(svc.running());
}
