#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "travelagent/agent.hpp"
#include "travelagent/backend.hpp"
#include "travelagent/error.hpp"

using namespace ta;
using nlohmann::json;

namespace {

CompletionRequest request_for(Stage stage, int step, const std::string& user = "hello") {
  return {stage_header(stage, step) + "\nYou are a test.", user, 0.0, std::nullopt, 512};
}

std::string frame_prompt(const std::string& view, const RayFan& rays, std::optional<std::string> compass,
                         std::optional<std::string> warning, Stage stage = Stage::decide) {
  SensoryFrame f;
  f.view_text = view;
  f.rays = rays;
  f.discovery_text = "map";
  f.compass_text = std::move(compass);
  f.collision_warning = std::move(warning);
  AgentContext ctx;
  ctx.persona = {"a tester", {}};
  ctx.task = train_station_task();
  return build_prompt(stage, ctx, {}, f, 0, {"obs", "plan"}).user;
}

RayFan rays(std::optional<double> front, std::optional<double> left = std::nullopt,
            std::optional<double> right = std::nullopt, SemanticClass cls = SemanticClass::wall) {
  RayFan fan;
  if (front) fan[static_cast<std::size_t>(RayDirection::front)] = RayReading{cls, *front};
  if (left) fan[static_cast<std::size_t>(RayDirection::left)] = RayReading{SemanticClass::wall, *left};
  if (right) fan[static_cast<std::size_t>(RayDirection::right)] = RayReading{SemanticClass::wall, *right};
  return fan;
}

/// Local chat-completions server with a scripted sequence of status codes.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::mutex mu;
  std::vector<json> bodies;
  std::vector<std::string> auth;
  std::vector<int> statuses;  // consumed front to back; 200 afterwards
  std::atomic<int> calls{0};

  FakeServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu);
      bodies.push_back(json::parse(req.body));
      auth.push_back(req.get_header_value("Authorization"));
      const int n = calls++;
      const int status = n < static_cast<int>(statuses.size()) ? statuses[static_cast<std::size_t>(n)] : 200;
      res.status = status;
      if (status == 200)
        res.set_content(json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", "  reply text "}}}}})}}.dump(),
                        "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }
  HttpConfig config() const {
    HttpConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    c.model = "test-model";
    c.api_key_env = "TA_TEST_API_KEY";
    c.timeout = std::chrono::milliseconds(5000);
    c.backoff = {std::chrono::milliseconds(1), std::chrono::milliseconds(2), std::chrono::milliseconds(4)};
    return c;
  }
};

}  // namespace

TEST_CASE("completion requests are validated") {
  CHECK_THROWS_AS((CompletionRequest{"", "u"}.validate()), ConfigError);
  CHECK_THROWS_AS((CompletionRequest{"s", ""}.validate()), ConfigError);
  CHECK_THROWS_AS((CompletionRequest{"s", "u", -1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((CompletionRequest{"s", "u", 0.0, std::nullopt, 0}.validate()), ConfigError);
}

TEST_CASE("scripted backend: wildcard rule and lookup order") {
  auto b = ScriptedBackend::from_json(json::parse(R"({
    "table": [
      {"stage": "decide", "step": "*", "response": "ACTION: move forward\nLENGTH: 2"},
      {"stage": "decide", "step": 3, "response": "ACTION: finish"},
      {"stage": "*", "step": 1, "response": "any stage at step one"}
    ],
    "rules": [{"stage": "observe", "pattern": "Warning", "response": "careful"}]
  })"));
  CHECK(b->complete(request_for(Stage::decide, 0)) == "ACTION: move forward\nLENGTH: 2");
  CHECK(b->complete(request_for(Stage::decide, 3)) == "ACTION: finish");
  CHECK(b->complete(request_for(Stage::decide, 1)) == "ACTION: move forward\nLENGTH: 2");
  CHECK(b->complete(request_for(Stage::plan, 1)) == "any stage at step one");
  CHECK(b->complete(request_for(Stage::observe, 0, "Warning: wall")) == "careful");
  CHECK_THROWS_AS(b->complete(request_for(Stage::observe, 0, "calm")), ConfigError);
  CHECK(b->complete(request_for(Stage::decide, 0)) == b->complete(request_for(Stage::decide, 0)));
}

TEST_CASE("scripted backend rejects malformed scripts") {
  CHECK_THROWS_AS(ScriptedBackend::from_json(json::parse(R"({"tabel": []})")), ConfigError);
  CHECK_THROWS_AS(ScriptedBackend::from_json(json::parse(R"({"rules": [{"pattern": "(", "response": "x"}]})")),
                  ConfigError);
  CHECK_THROWS_AS(ScriptedBackend::from_json(json::parse(R"({"table": [{"stage": "dream", "response": "x"}]})")),
                  ConfigError);
}

TEST_CASE("heuristic: compass ahead with a clear front moves ten meters") {
  HeuristicBackend h;
  const auto d = h.decide(frame_prompt("It is open.", rays(std::nullopt), "target is ahead (3°), roughly 120 m away", {}));
  CHECK(d.rule == HeuristicRule::advance);
  CHECK(d.action_text == "ACTION: move forward\nLENGTH: 10");
  const auto near = h.decide(frame_prompt("It is open.", rays(7.5), "target is ahead (0°), roughly 50 m away", {}));
  CHECK(near.action_text == "ACTION: move forward\nLENGTH: 5.5");
}

TEST_CASE("heuristic: a collision warning turns toward the clearer side") {
  HeuristicBackend h;
  const auto d = h.decide(frame_prompt("A wall.", rays(1.0, 20.0, 3.0), "target is ahead (0°), roughly 80 m away",
                                       "Warning: wall 1.0 m ahead"));
  CHECK(d.rule == HeuristicRule::avoid);
  CHECK(d.action_text == "ACTION: turn left\nANGLE: 45");
  CHECK(parse_action(d.action_text).kind != ActionKind::move_forward);
  const auto r = h.decide(frame_prompt("A wall.", rays(1.0, 3.0, 20.0), std::nullopt, "Warning: wall 1.0 m ahead"));
  CHECK(r.action_text == "ACTION: turn right\nANGLE: 45");
}

TEST_CASE("heuristic: align, finish and search") {
  HeuristicBackend h;
  const auto left = h.decide(frame_prompt("x", rays(3.0), "target is left (-90°), roughly 40 m away", {}));
  CHECK(left.rule == HeuristicRule::align);
  CHECK(left.action_text == "ACTION: turn left\nANGLE: 45");
  const auto small = h.decide(frame_prompt("x", rays(3.0), "target is ahead-right (20°), roughly 40 m away", {}));
  CHECK(small.action_text == "ACTION: turn right\nANGLE: 20");

  const std::string view = "It is a summer morning. You see a bench ahead at about 4 m; a subway-entrance with "
                           "\"Subway sign\" ahead at about 8 m.";
  const auto fin = h.decide(frame_prompt(view, rays(4.0, {}, {}, SemanticClass::bench),
                                         "target is ahead (2°), roughly 10 m away", {}));
  CHECK(fin.rule == HeuristicRule::finish);
  CHECK(fin.action_text == "ACTION: finish");

  const auto lost = h.decide(frame_prompt("x", rays(3.0), "target is behind (170°), roughly 40 m away", {}));
  CHECK(lost.rule == HeuristicRule::search);
  CHECK(lost.action_text == "ACTION: search");
}

TEST_CASE("heuristic: stage outputs and missing sections") {
  HeuristicBackend h;
  const std::string user = frame_prompt("x", rays(3.0), "target is left (-90°), roughly 40 m away", {});
  const std::string plan = h.complete({stage_header(Stage::plan, 0), user});
  CHECK(plan.find("The compass says the target is left.") != std::string::npos);
  const std::string obs = h.complete({stage_header(Stage::observe, 0), user});
  CHECK(obs.find("In front of me there is a wall at 3 m.") == 0);
  CHECK(h.complete({stage_header(Stage::decide, 0), user}) == h.complete({stage_header(Stage::decide, 0), user}));
  CHECK_THROWS_AS(h.complete({stage_header(Stage::decide, 0), "no sections here"}), ConfigError);
  CHECK_THROWS_AS(h.complete({"untagged", user}), ConfigError);
}

TEST_CASE("http: wire format, bearer token and first-choice text") {
  FakeServer srv;
  ::setenv("TA_TEST_API_KEY", "sekret", 1);
  HttpBackend b(srv.config());
  CompletionRequest req{"system text", "user text", 0.25, 42, 64};
  CHECK(b.complete(req) == "  reply text ");
  REQUIRE(srv.bodies.size() == 1);
  const json& body = srv.bodies[0];
  CHECK(body == b.wire_message(req));
  CHECK(body["model"] == "test-model");
  CHECK(body["messages"][0] == json{{"role", "system"}, {"content", "system text"}});
  CHECK(body["messages"][1] == json{{"role", "user"}, {"content", "user text"}});
  CHECK(body["temperature"] == 0.25);
  CHECK(body["seed"] == 42);
  CHECK(body["max_tokens"] == 64);
  CHECK(srv.auth[0] == "Bearer sekret");
  ::unsetenv("TA_TEST_API_KEY");
  CHECK_FALSE(b.wire_message({"s", "u"}).contains("seed"));
}

TEST_CASE("http: 429 and 5xx are retried, other statuses are not") {
  {
    FakeServer srv;
    srv.statuses = {429, 503};
    HttpBackend b(srv.config());
    CHECK(b.complete({"s", "u"}) == "  reply text ");
    CHECK(srv.calls == 3);
  }
  {
    FakeServer srv;
    srv.statuses = {500, 502, 504};
    HttpBackend b(srv.config());
    try {
      b.complete({"s", "u"});
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.attempts() == 3);
      CHECK(e.retryable());
    }
    CHECK(srv.calls == 3);
  }
  {
    FakeServer srv;
    srv.statuses = {400};
    HttpBackend b(srv.config());
    try {
      b.complete({"s", "u"});
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.attempts() == 1);
      CHECK_FALSE(e.retryable());
    }
    CHECK(srv.calls == 1);
  }
}

TEST_CASE("http: unreachable endpoint fails after three attempts") {
  HttpConfig c;
  c.endpoint = "http://127.0.0.1:1/v1";
  c.timeout = std::chrono::milliseconds(300);
  c.backoff = {std::chrono::milliseconds(1), std::chrono::milliseconds(1)};
  HttpBackend b(c);
  try {
    b.complete({"s", "u"});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.attempts() == 3);
    CHECK(std::string(e.what()).find("transport error") != std::string::npos);
  }
}

TEST_CASE("http: concurrent callers are bounded by max_in_flight") {
  FakeServer srv;
  HttpConfig c = srv.config();
  c.max_in_flight = 2;
  HttpBackend b(c);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int k = 0; k < 6; ++k)
    threads.emplace_back([&] {
      if (b.complete({"s", "u"}) == "  reply text ") ++ok;
    });
  for (auto& t : threads) t.join();
  CHECK(ok == 6);
  CHECK(srv.calls == 6);
}

TEST_CASE("backend configuration parsing is strict and round-trips") {
  CHECK_THROWS_AS(parse_backend_config(json{{"kind", "heuristic"}, {"colour", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_backend_config(json{{"kind", "scripted"}}), ConfigError);
  CHECK_THROWS_AS(parse_backend_config(json{{"kind", "http"}}), ConfigError);
  CHECK_THROWS_AS(parse_backend_config(json{{"kind", "telepathy"}}), Error);
  const BackendConfig h = parse_backend_config(json{{"kind", "http"}, {"endpoint", "http://x/v1"}, {"model", "m"},
                                                    {"backoff_s", {0.5, 1, 2}}, {"timeout_s", 60}});
  CHECK(h.http.backoff.size() == 3);
  CHECK(h.http.timeout == std::chrono::milliseconds(60000));
  CHECK(backend_config_to_json(parse_backend_config(backend_config_to_json(h))) == backend_config_to_json(h));
  const BackendConfig s = parse_backend_config(json{{"kind", "scripted"}, {"script", "search_only"}});
  CHECK(make_backend(s)->kind() == BackendKind::scripted);
  CHECK(make_backend(BackendConfig{})->kind() == BackendKind::heuristic);
}
