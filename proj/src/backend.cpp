#include "travelagent/backend.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "travelagent/agent.hpp"
#include "travelagent/error.hpp"
#include "travelagent/resources.hpp"

namespace ta {

using nlohmann::json;

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::scripted: return "scripted";
    case BackendKind::heuristic: return "heuristic";
    case BackendKind::http: return "http";
  }
  return "heuristic";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "scripted") return BackendKind::scripted;
  if (s == "heuristic") return BackendKind::heuristic;
  if (s == "http") return BackendKind::http;
  throw ConfigError("unknown backend kind '" + std::string(s) + "'");
}

void CompletionRequest::validate() const {
  if (system.empty()) throw ConfigError("completion request has empty system text");
  if (user.empty()) throw ConfigError("completion request has empty user text");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_tokens < 1) throw ConfigError("max_tokens must be positive");
}

// --- scripted ------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<Entry> table, std::vector<Rule> rules)
    : table_(std::move(table)), rules_(std::move(rules)) {}

namespace {

std::optional<Stage> parse_stage_field(const json& j, const std::string& where) {
  if (!j.contains("stage")) return std::nullopt;
  const auto s = j.at("stage").get<std::string>();
  if (s == "*") return std::nullopt;
  auto st = parse_stage(s);
  if (!st) throw ConfigError(where + ": unknown stage '" + s + "'");
  return st;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [k, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(where + ": unknown key '" + k + "'");
}

}  // namespace

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& script) {
  if (!script.is_object()) throw ConfigError("script must be an object");
  reject_unknown(script, {"table", "rules"}, "script");
  std::vector<Entry> table;
  std::vector<Rule> rules;
  try {
    if (auto it = script.find("table"); it != script.end()) {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const json& e = (*it)[i];
        const std::string where = "script.table[" + std::to_string(i) + "]";
        reject_unknown(e, {"stage", "step", "response"}, where);
        Entry entry;
        entry.stage = parse_stage_field(e, where);
        if (e.contains("step") && !(e.at("step").is_string() && e.at("step").get<std::string>() == "*"))
          entry.step = e.at("step").get<int>();
        entry.response = e.at("response").get<std::string>();
        table.push_back(std::move(entry));
      }
    }
    if (auto it = script.find("rules"); it != script.end()) {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const json& r = (*it)[i];
        const std::string where = "script.rules[" + std::to_string(i) + "]";
        reject_unknown(r, {"stage", "pattern", "response"}, where);
        Rule rule;
        rule.stage = parse_stage_field(r, where);
        rule.pattern = r.at("pattern").get<std::string>();
        try {
          rule.regex = std::regex(rule.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
          throw ConfigError(where + ": bad pattern: " + e.what());
        }
        rule.response = r.at("response").get<std::string>();
        rules.push_back(std::move(rule));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed script: ") + e.what());
  }
  return std::make_unique<ScriptedBackend>(std::move(table), std::move(rules));
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  const auto tag = find_stage_tag(request.system);
  if (tag) {
    auto match = [&](bool stage_any, bool step_any) -> const Entry* {
      for (const auto& e : table_) {
        const bool stage_ok = stage_any ? !e.stage.has_value() : (e.stage && *e.stage == tag->stage);
        const bool step_ok = step_any ? !e.step.has_value() : (e.step && *e.step == tag->step_index);
        if (stage_ok && step_ok) return &e;
      }
      return nullptr;
    };
    for (auto [sa, pa] : {std::pair{false, false}, {false, true}, {true, false}, {true, true}})
      if (const Entry* e = match(sa, pa)) return e->response;
  }
  for (const auto& r : rules_) {
    if (r.stage && (!tag || *r.stage != tag->stage)) continue;
    if (std::regex_search(request.user, r.regex)) return r.response;
  }
  const std::string where =
      tag ? "stage " + std::string(to_string(tag->stage)) + ", step " + std::to_string(tag->step_index) : "untagged request";
  throw ConfigError("scripted backend has no rule for " + where);
}

// --- heuristic -----------------------------------------------------------------

namespace {

// Text of the section that starts with `heading`, up to the next heading.
std::optional<std::string> section(const std::string& text, std::string_view heading) {
  std::size_t pos = 0;
  while (true) {
    pos = text.find(heading, pos);
    if (pos == std::string::npos) return std::nullopt;
    if (pos == 0 || text[pos - 1] == '\n') break;
    pos += heading.size();
  }
  std::size_t start = text.find('\n', pos);
  if (start == std::string::npos) return std::string();
  ++start;
  std::size_t end = start;
  while (end < text.size()) {
    if (text[end] == '#' && (end == 0 || text[end - 1] == '\n')) break;
    const std::size_t nl = text.find('\n', end);
    end = nl == std::string::npos ? text.size() : nl + 1;
  }
  std::string body = text.substr(start, end - start);
  while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
  return body;
}

struct ParsedFrame {
  std::string view;
  std::map<std::string, std::optional<std::pair<std::string, double>>> rays;
  std::optional<std::string> band;
  std::optional<double> bearing;
  std::optional<std::string> warning;
  bool not_at_goal = false;

  double clearance(const std::string& dir) const {
    auto it = rays.find(dir);
    if (it == rays.end() || !it->second) return std::numeric_limits<double>::infinity();
    return it->second->second;
  }
};

ParsedFrame parse_frame(const std::string& user) {
  ParsedFrame f;
  auto view = section(user, sections::kView);
  auto rays = section(user, sections::kRays);
  if (!view || !rays) throw ConfigError("heuristic backend: prompt lacks the view or depth-ray sections");
  f.view = *view;
  static const std::regex ray_re(R"(^([a-z-]+): (?:clear|([a-z-]+) at ([0-9.]+) m)$)");
  std::istringstream in(*rays);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, ray_re)) continue;
    if (m[2].matched)
      f.rays[m[1].str()] = std::pair{m[2].str(), std::stod(m[3].str())};
    else
      f.rays[m[1].str()] = std::nullopt;
  }
  if (!f.rays.contains("front")) throw ConfigError("heuristic backend: depth rays lack a front reading");
  if (auto compass = section(user, sections::kCompass)) {
    static const std::regex compass_re(R"(target is ([a-z-]+) \((-?[0-9]+)°\))");
    std::smatch m;
    if (std::regex_search(*compass, m, compass_re)) {
      f.band = m[1].str();
      f.bearing = std::stod(m[2].str());
    }
  }
  if (auto warn = section(user, sections::kWarnings); warn && !warn->empty()) f.warning = *warn;
  if (auto notes = section(user, sections::kNotes)) f.not_at_goal = notes->find("not at your goal") != std::string::npos;
  return f;
}

bool contains_icase(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return false;
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  });
  return it != hay.end();
}

std::string reading_text(const ParsedFrame& f, const std::string& dir) {
  auto it = f.rays.find(dir);
  if (it == f.rays.end() || !it->second) return "clear";
  return "a " + it->second->first + " at " + format_number(it->second->second, 1) + " m";
}

}  // namespace

HeuristicDecision HeuristicBackend::decide(const std::string& user) const {
  const ParsedFrame f = parse_frame(user);
  const double front = f.clearance("front");
  const bool goal_in_view = contains_icase(f.view, config_.goal_keyword);

  HeuristicDecision d;
  const std::string compass_sentence =
      f.band ? "The compass says the target is " + *f.band + "." : std::string("I have no compass cue.");

  // Without a compass cue, "ahead" is read as "the way ahead is worth trying".
  const bool heading_ok = f.band ? *f.band == "ahead" : true;
  if (heading_ok && front >= 5.0) {
    const double len = std::min(front - 2.0, 10.0);
    d.rule = HeuristicRule::advance;
    d.action_text = "ACTION: move forward\nLENGTH: " + format_number(len, 1);
    d.plan_text = compass_sentence + " The way ahead is clear and good, so I will keep moving forward " +
                  format_number(len, 1) + " meters.";
  } else if (f.warning) {
    const bool go_left = f.clearance("left") >= f.clearance("right");
    d.rule = HeuristicRule::avoid;
    d.action_text = std::string("ACTION: turn ") + (go_left ? "left" : "right") + "\nANGLE: 45";
    d.plan_text = compass_sentence + " Something blocks my way, which is frustrating; I will turn " +
                  (go_left ? "left" : "right") + " toward the clearer side.";
  } else if (f.band && (*f.band == "left" || *f.band == "ahead-left" || *f.band == "right" ||
                        *f.band == "ahead-right")) {
    const bool left = *f.band == "left" || *f.band == "ahead-left";
    // Turn by at most 45 degrees, never past the target.
    const double angle = std::clamp(std::round(std::abs(f.bearing.value_or(45.0))), 1.0, 45.0);
    d.rule = HeuristicRule::align;
    d.action_text = std::string("ACTION: turn ") + (left ? "left" : "right") + "\nANGLE: " + format_number(angle, 0);
    d.plan_text = compass_sentence + " I will turn " + (left ? "left" : "right") + " to face my destination.";
  } else if (goal_in_view && front <= 10.0) {
    d.rule = HeuristicRule::finish;
    d.action_text = "ACTION: finish";
    d.plan_text = compass_sentence + " Great, I can see the " + config_.goal_keyword +
                  " sign right in front of me; I have found my goal and will finish here.";
  } else {
    d.rule = HeuristicRule::search;
    d.action_text = "ACTION: search";
    d.plan_text = compass_sentence + " I am not sure where to go and feel a bit lost; I will search around to reorient myself.";
  }

  d.observation_text = "In front of me there is " + reading_text(f, "front") + ". To my left there is " +
                       reading_text(f, "left") + " and to my right there is " + reading_text(f, "right") + ". ";
  if (goal_in_view) d.observation_text += "I can see the " + config_.goal_keyword + " sign. ";
  if (f.warning) d.observation_text += "There is an obstacle very close ahead. ";
  if (f.not_at_goal) d.observation_text += "This is not my goal yet. ";
  d.observation_text += compass_sentence;
  return d;
}

std::string HeuristicBackend::complete(const CompletionRequest& request) {
  const auto tag = find_stage_tag(request.system);
  if (!tag) throw ConfigError("heuristic backend: system prompt lacks a stage tag");
  const HeuristicDecision d = decide(request.user);
  switch (tag->stage) {
    case Stage::observe: return d.observation_text;
    case Stage::plan: return d.plan_text;
    case Stage::decide: return d.action_text;
  }
  return d.action_text;
}

// --- http ----------------------------------------------------------------------

struct HttpBackend::Impl {
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;
  std::string base;    // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url_re)) throw ConfigError("http backend: bad endpoint '" + config_.endpoint + "'");
  impl_->base = m[1].str();
  impl_->prefix = m[2].matched ? m[2].str() : "";
  while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
  if (config_.max_attempts < 1) throw ConfigError("http backend: max_attempts must be >= 1");
  if (config_.max_in_flight < 1) throw ConfigError("http backend: max_in_flight must be >= 1");
}

HttpBackend::~HttpBackend() = default;

json HttpBackend::wire_message(const CompletionRequest& request) const {
  json body = {{"model", config_.model},
               {"messages", json::array({{{"role", "system"}, {"content", request.system}},
                                         {{"role", "user"}, {"content", request.user}}})},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

std::string HttpBackend::complete(const CompletionRequest& request) {
  request.validate();
  {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return impl_->in_flight < config_.max_in_flight; });
    ++impl_->in_flight;
  }
  struct Release {
    Impl* impl;
    ~Release() {
      {
        std::lock_guard lock(impl->mu);
        --impl->in_flight;
      }
      impl->cv.notify_one();
    }
  } release{impl_.get()};

  const std::string body = wire_message(request).dump();
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client cli(impl_->base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(impl_->prefix + "/chat/completions", headers, body, "application/json");
    bool retryable = true;
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        const json reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw BackendError(std::string("http backend: malformed response: ") + e.what(), attempt, false);
      }
    } else {
      last_error = "HTTP status " + std::to_string(res->status);
      retryable = res->status == 429 || res->status >= 500;
    }
    if (!retryable) throw BackendError("http backend: " + last_error, attempt, false);
    if (attempt < config_.max_attempts) {
      const auto idx = static_cast<std::size_t>(attempt - 1);
      const auto wait = config_.backoff.empty() ? std::chrono::milliseconds(0)
                                                : config_.backoff[std::min(idx, config_.backoff.size() - 1)];
      std::this_thread::sleep_for(wait);
    }
  }
  throw BackendError("http backend: " + last_error + " after " + std::to_string(config_.max_attempts) + " attempts",
                     config_.max_attempts, true);
}

// --- configuration -------------------------------------------------------------

BackendConfig parse_backend_config(const json& j) {
  if (!j.is_object()) throw ConfigError("backend config must be an object");
  reject_unknown(j,
                 {"kind", "script", "goal_keyword", "endpoint", "model", "api_key_env", "timeout_s", "max_attempts",
                  "backoff_s", "max_in_flight", "temperature", "max_tokens"},
                 "backend");
  BackendConfig c;
  try {
    if (j.contains("kind")) c.kind = parse_backend_kind(j.at("kind").get<std::string>());
    if (j.contains("script")) {
      const json& s = j.at("script");
      if (s.is_object()) {
        c.script = s;
      } else {
        const std::string ref = s.get<std::string>();
        const std::string bundled = "scripts/" + ref + ".json";
        if (resources::contains(bundled)) {
          c.script = json::parse(resources::get(bundled));
        } else {
          std::ifstream in(ref);
          if (!in) throw ConfigError("cannot open script '" + ref + "'");
          c.script = json::parse(in);
        }
      }
    }
    if (j.contains("goal_keyword")) c.heuristic.goal_keyword = j.at("goal_keyword").get<std::string>();
    if (j.contains("endpoint")) c.http.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model")) c.http.model = j.at("model").get<std::string>();
    if (j.contains("api_key_env")) c.http.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("timeout_s"))
      c.http.timeout = std::chrono::milliseconds(static_cast<long>(j.at("timeout_s").get<double>() * 1000.0));
    if (j.contains("max_attempts")) c.http.max_attempts = j.at("max_attempts").get<int>();
    if (j.contains("backoff_s")) {
      c.http.backoff.clear();
      for (const auto& b : j.at("backoff_s"))
        c.http.backoff.emplace_back(static_cast<long>(b.get<double>() * 1000.0));
    }
    if (j.contains("max_in_flight")) c.http.max_in_flight = j.at("max_in_flight").get<int>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens")) c.max_tokens = j.at("max_tokens").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("backend config: ") + e.what());
  }
  if (c.temperature < 0.0) throw ConfigError("backend config: temperature must be >= 0");
  if (c.kind == BackendKind::scripted && c.script.is_null()) throw ConfigError("scripted backend needs a script");
  if (c.kind == BackendKind::http && c.http.endpoint.empty()) throw ConfigError("http backend needs an endpoint");
  return c;
}

json backend_config_to_json(const BackendConfig& c) {
  json j = {{"kind", to_string(c.kind)}, {"temperature", c.temperature}, {"max_tokens", c.max_tokens}};
  switch (c.kind) {
    case BackendKind::scripted: j["script"] = c.script; break;
    case BackendKind::heuristic: j["goal_keyword"] = c.heuristic.goal_keyword; break;
    case BackendKind::http: {
      j["endpoint"] = c.http.endpoint;
      j["model"] = c.http.model;
      j["api_key_env"] = c.http.api_key_env;
      j["timeout_s"] = static_cast<double>(c.http.timeout.count()) / 1000.0;
      j["max_attempts"] = c.http.max_attempts;
      json b = json::array();
      for (auto ms : c.http.backoff) b.push_back(static_cast<double>(ms.count()) / 1000.0);
      j["backoff_s"] = b;
      j["max_in_flight"] = c.http.max_in_flight;
      break;
    }
  }
  return j;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  switch (config.kind) {
    case BackendKind::scripted: return ScriptedBackend::from_json(config.script);
    case BackendKind::heuristic: return std::make_shared<HeuristicBackend>(config.heuristic);
    case BackendKind::http: return std::make_shared<HttpBackend>(config.http);
  }
  throw ConfigError("unknown backend kind");
}

}  // namespace ta
