#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "travelagent/backend.hpp"
#include "travelagent/scene.hpp"
#include "travelagent/sensors.hpp"
#include "travelagent/stage.hpp"

namespace ta {

struct Persona {
  std::string description;                       // e.g. "a 30-year-old female researcher"
  std::map<std::string, std::string> attributes;  // age, gender, mobility, ...
};

struct TaskSpec {
  std::string objective;
  std::vector<std::string> subtasks;
  int step_limit = 30;  // per phase
  bool compass_enabled = true;
  std::string goal_id;
};

/// Throws ValidationError if step_limit < 1 or the goal is not in the scene.
void validate_task(const TaskSpec& task, const Scene& scene);
void validate_persona(const Persona& persona);

struct MemoryStream {
  static constexpr std::size_t kDefaultBudget = 4000;
  static constexpr std::string_view kElidedHeader = "(earlier steps elided)";

  std::string text;
  std::size_t budget = kDefaultBudget;

  friend bool operator==(const MemoryStream&, const MemoryStream&) = default;
};

enum class ActionKind : std::uint8_t { move_forward, turn_left, turn_right, search, finish };

std::string_view to_string(ActionKind k);
std::optional<ActionKind> parse_action_kind(std::string_view s);

struct Action {
  static constexpr double kMinMove = 0.1;
  static constexpr double kMaxMove = 50.0;
  static constexpr double kMinTurn = 1.0;
  static constexpr double kMaxTurn = 180.0;
  static constexpr double kDefaultMove = 2.0;
  static constexpr double kDefaultTurn = 45.0;

  ActionKind kind = ActionKind::search;
  std::optional<double> magnitude;  // meters for moves, degrees for turns

  static Action move_forward(double meters);
  static Action turn_left(double degrees);
  static Action turn_right(double degrees);
  static Action search() { return {ActionKind::search, std::nullopt}; }
  static Action finish() { return {ActionKind::finish, std::nullopt}; }

  friend bool operator==(const Action&, const Action&) = default;
};

/// Canonical decide-stage text: "ACTION: move forward\nLENGTH: 2".
std::string render_action(const Action& action);

/// Parses decide-stage text. Lines are matched case-insensitively; the first
/// ACTION line wins; missing LENGTH/ANGLE fall back to 2 m / 45 degrees;
/// magnitudes are clamped into the Action ranges. Throws ParseError when there
/// is no ACTION line or its verb is unknown.
Action parse_action(std::string_view decision_raw);

/// Short past-tense phrase used in memory lines, e.g. "moved forward 2 m".
std::string action_phrase(const Action& action);

struct CotOutputs {
  std::string observation;
  std::string plan;
  std::string decision_raw;
  Action action;

  friend bool operator==(const CotOutputs&, const CotOutputs&) = default;
};

struct Prompt {
  std::string system;
  std::string user;
  friend bool operator==(const Prompt&, const Prompt&) = default;
};

/// Everything the prompt builder needs beyond the per-step frame.
struct AgentContext {
  Persona persona;
  TaskSpec task;              // objective of the current phase
  SceneMetadata metadata;     // setting noun and scenario description
  bool familiar = true;       // familiar vs unfamiliar initiation variant
};

struct PriorOutputs {
  std::string_view observation;
  std::string_view plan;
  std::string_view correction;  // appended to decide retries
};

/// Section headings of the user prompt. The heuristic backend parses them.
namespace sections {
inline constexpr std::string_view kMemory = "## Memory";
inline constexpr std::string_view kSensory = "## Sensory report";
inline constexpr std::string_view kView = "### View";
inline constexpr std::string_view kRays = "### Depth rays";
inline constexpr std::string_view kDiscovery = "### Discovery map";
inline constexpr std::string_view kCompass = "### Compass";
inline constexpr std::string_view kWarnings = "### Warnings";
inline constexpr std::string_view kNotes = "### Notes";
inline constexpr std::string_view kObservation = "## Your observation";
inline constexpr std::string_view kPlan = "## Your plan";
inline constexpr std::string_view kFormat = "## Response format";
inline constexpr std::string_view kCorrection = "## Correction";
}  // namespace sections

/// Verbatim ACTION/LENGTH/ANGLE grammar shown to the model in decide prompts.
std::string_view action_grammar_text();

Prompt build_prompt(Stage stage, const AgentContext& context, const MemoryStream& memory,
                    const SensoryFrame& frame, int step_index, const PriorOutputs& prior = {});

/// Runs one stage against a backend; returns whitespace-trimmed text. Backend
/// failures are rethrown as StageError naming the stage.
std::string run_stage(Backend& backend, Stage stage, const Prompt& prompt, double temperature = 0.0,
                      std::optional<std::int64_t> seed = std::nullopt, int max_tokens = 512);

/// Appends "step {k}: {action phrase}; noted: {first sentence of observation}"
/// and evicts the oldest lines behind a fixed header while over budget. The
/// newest line is never evicted (it is shortened if it alone exceeds the budget).
MemoryStream update_memory(const MemoryStream& memory, int step_index, const Action& action,
                           std::string_view observation, std::string_view plan);

/// First sentence of a text: up to and including the first '.', '!' or '?'
/// that ends the text or precedes whitespace; newlines folded to spaces.
std::string first_sentence(std::string_view text);

/// Bundled objective text for the "Train Station" experiment.
TaskSpec train_station_task();

/// Objective used after the primary task completes.
std::string subtask_objective(std::string_view subtask);

/// Corrective instruction appended to a decide prompt after a parse failure.
std::string decide_correction(std::string_view error);

/// Shortest decimal rendering with at most `max_decimals` decimals ("2", "1.5").
std::string format_number(double v, int max_decimals = 2);

}  // namespace ta
