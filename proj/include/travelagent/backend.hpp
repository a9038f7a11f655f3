#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "travelagent/stage.hpp"

namespace ta {

enum class BackendKind : std::uint8_t { scripted, heuristic, http };

std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

struct CompletionRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  int max_tokens = 512;

  /// Throws ConfigError when system or user text is empty, temperature < 0 or
  /// max_tokens < 1.
  void validate() const;
};

/// Completion provider. Implementations are safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// --- scripted ----------------------------------------------------------------

/// Canned responses keyed by (stage, step). Lookup order: exact (stage, step),
/// then (stage, any step), then (any stage, step), then regex rules over the
/// user text in declaration order. A miss is a ConfigError.
class ScriptedBackend final : public Backend {
 public:
  struct Entry {
    std::optional<Stage> stage;  // nullopt = any
    std::optional<int> step;     // nullopt = any
    std::string response;
  };
  struct Rule {
    std::optional<Stage> stage;
    std::string pattern;
    std::regex regex;
    std::string response;
  };

  ScriptedBackend(std::vector<Entry> table, std::vector<Rule> rules);

  /// {"table": [{"stage": "decide", "step": 0 | "*", "response": "..."}],
  ///  "rules": [{"stage": "*", "pattern": "Warning", "response": "..."}]}
  static std::unique_ptr<ScriptedBackend> from_json(const nlohmann::json& script);

  BackendKind kind() const override { return BackendKind::scripted; }
  std::string complete(const CompletionRequest& request) override;

 private:
  std::vector<Entry> table_;
  std::vector<Rule> rules_;
};

// --- heuristic ---------------------------------------------------------------

struct HeuristicConfig {
  /// Caption fragment that identifies the goal in the view text.
  std::string goal_keyword = "Subway";
};

/// Which decide rule fired; exposed for tests and plan-stage wording.
enum class HeuristicRule : std::uint8_t { advance, avoid, align, finish, search };

struct HeuristicDecision {
  HeuristicRule rule;
  std::string action_text;  // decide-stage grammar text
  std::string plan_text;
  std::string observation_text;
};

/// Rule-based agent used as a deterministic closed-loop stand-in for an LLM.
class HeuristicBackend final : public Backend {
 public:
  explicit HeuristicBackend(HeuristicConfig config = {}) : config_(std::move(config)) {}
  BackendKind kind() const override { return BackendKind::heuristic; }
  std::string complete(const CompletionRequest& request) override;

  /// Applies the policy to the sensory sections of a user prompt. Throws
  /// ConfigError when required frame sections are missing.
  HeuristicDecision decide(const std::string& user_text) const;

 private:
  HeuristicConfig config_;
};

// --- http ----------------------------------------------------------------------

struct HttpConfig {
  std::string endpoint;  // e.g. "http://localhost:8080/v1"; POSTs {endpoint}/chat/completions
  std::string model;
  std::string api_key_env = "TA_API_KEY";
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500), std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(2000)};
  int max_in_flight = 4;
};

/// Chat-completions client. Transport failures, timeouts, 429 and 5xx are
/// retried up to max_attempts with the configured backoff; other HTTP
/// statuses fail immediately.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);
  ~HttpBackend() override;
  BackendKind kind() const override { return BackendKind::http; }
  std::string complete(const CompletionRequest& request) override;

  /// Request body sent for `request`.
  nlohmann::json wire_message(const CompletionRequest& request) const;

 private:
  struct Impl;
  HttpConfig config_;
  std::unique_ptr<Impl> impl_;
};

// --- configuration -------------------------------------------------------------

struct BackendConfig {
  BackendKind kind = BackendKind::heuristic;
  nlohmann::json script;  // scripted only
  HeuristicConfig heuristic;
  HttpConfig http;
  double temperature = 0.0;
  int max_tokens = 512;
};

/// Strict parse: unknown keys are a ConfigError.
BackendConfig parse_backend_config(const nlohmann::json& j);
nlohmann::json backend_config_to_json(const BackendConfig& c);

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace ta
