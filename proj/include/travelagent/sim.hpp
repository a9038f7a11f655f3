#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "travelagent/agent.hpp"
#include "travelagent/backend.hpp"
#include "travelagent/scene.hpp"
#include "travelagent/sensors.hpp"

namespace ta {

enum class Phase : std::uint8_t { main, subtask };

std::string_view to_string(Phase p);
Phase parse_phase(std::string_view s);

enum class RunStatus : std::uint8_t { completed, completed_with_subtask, step_limit_exceeded, stuck, backend_failed };

std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view s);

/// True for completed and completed_with_subtask.
bool is_completed(RunStatus s);

/// Movement physics and termination thresholds.
inline constexpr double kCollisionBuffer = 0.3;   // meters kept clear of the obstacle ahead
inline constexpr double kGoalDilation = 3.0;      // finish counts within this distance of the goal polygon
inline constexpr int kStuckWindow = 8;            // consecutive steps
inline constexpr double kStuckDisplacement = 0.2; // meters traveled over the window
inline constexpr double kSearchTurn = 90.0;       // clockwise scan per search step
inline constexpr int kDecideAttempts = 3;         // first try plus two corrective retries
inline constexpr std::string_view kNotAtGoalNote = "you are not at your goal";

struct ScenarioSpec {
  std::string scene;             // bundled fixture id or scene file path
  std::string spawn = "default"; // spawn id within the scene
  Persona persona;
  TaskSpec task;
  std::string memory_seed;       // optional prior memory text
  std::uint64_t rng_seed = 0;
  BackendConfig backend;
  std::string label;             // scenario label, e.g. "winter"
  std::string sim_id;            // unique run name; used for trace file names
  /// Grouping fields reported in matrix summaries. Empty fields fall back to
  /// the scene metadata.
  std::string season;
  std::string location;
  std::string time;
};

struct StepRecord {
  int index = 0;
  Pose pose_before;
  Pose pose_after;
  SensoryFrame frame;
  CotOutputs outputs;
  bool collision_clamped = false;
  Phase phase = Phase::main;
  int parse_failures = 0;        // rejected decide outputs during this step
  bool parse_fallback = false;   // all decide attempts failed; action forced to search
  bool finish_at_goal = false;   // finish declared inside the dilated goal region
  std::string memory;            // memory text after this step's update
  double wall_time_ms = 0.0;

  bool is_search() const { return outputs.action.kind == ActionKind::search; }
  bool is_finish() const { return outputs.action.kind == ActionKind::finish; }

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SimulationResult {
  RunStatus status = RunStatus::step_limit_exceeded;
  std::vector<StepRecord> steps;
  std::optional<std::string> subtask;
  std::string label;
  std::string prompt_version{kPromptVersion};
  std::string sim_id;
  std::string scene;             // scene reference as given in the scenario
  std::string scene_name;        // Scene::name of the loaded scene
  std::string spawn;
  std::uint64_t rng_seed = 0;
  std::string persona;
  std::string season;
  std::string location;
  std::string time;
  std::optional<std::string> error;  // backend failure message

  friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

/// Equality that ignores wall_time_ms.
bool equal_ignoring_wall_time(const SimulationResult& a, const SimulationResult& b);

/// Mutable per-simulation state threaded through step().
struct SimState {
  Pose pose;
  DiscoveryMap map;
  MemoryStream memory;
  int step_index = 0;  // global across phases
  Phase phase = Phase::main;
  std::vector<std::string> pending_notes;  // injected into the next frame
};

/// Fixed inputs shared by all steps of one simulation.
struct StepContext {
  const Scene* scene = nullptr;
  AgentContext agent;
  std::optional<Vec2> compass_target;  // nullopt clears the compass
  const Goal* goal = nullptr;
  BackendConfig backend_config;
  std::uint64_t rng_seed = 0;
};

/// True when `p` lies inside the goal polygon or within kGoalDilation of it.
bool inside_dilated_goal(const Goal& goal, Vec2 p);

/// Moves up to `requested` meters along the heading, stopping kCollisionBuffer
/// short of the first obstacle. Returns the new pose and whether it clamped.
std::pair<Pose, bool> execute_move(const Scene& scene, const Pose& pose, double requested);

/// Applies a non-move action to a pose.
Pose execute_turn(const Pose& pose, const Action& action);

/// Runs sense, the three reasoning stages, and action execution for one step,
/// updating `state`. Backend failures propagate as StageError.
StepRecord step(const StepContext& ctx, Backend& backend, SimState& state);

/// Loads the scene and runs a full simulation.
SimulationResult run(const ScenarioSpec& spec);

/// Runs with an already loaded scene and backend (shared by the matrix runner).
SimulationResult run(const ScenarioSpec& spec, const Scene& scene, Backend& backend);

/// Draws the subtask index the run will use after completing its main task.
std::size_t draw_subtask(std::uint64_t rng_seed, std::size_t count);

// --- matrix ------------------------------------------------------------------

struct LabelSummary {
  std::size_t total = 0;
  std::size_t completed = 0;
  std::size_t steps = 0;
  std::map<std::string, std::size_t> by_status;
  friend bool operator==(const LabelSummary&, const LabelSummary&) = default;
};

struct MatrixSummary {
  std::size_t total = 0;
  std::size_t completed = 0;
  std::size_t total_steps = 0;
  double completion_rate = 0.0;
  std::map<std::string, LabelSummary> by_label;
  std::map<std::string, LabelSummary> by_persona;
  friend bool operator==(const MatrixSummary&, const MatrixSummary&) = default;
};

struct MatrixResult {
  std::vector<SimulationResult> results;  // in scenario order
  MatrixSummary summary;
};

/// Runs every scenario with up to `parallelism` concurrent simulations. Scenes and
/// backends are loaded once per distinct reference and shared. A scenario that
/// cannot be set up is recorded as backend_failed and never aborts the batch.
MatrixResult run_matrix(const std::vector<ScenarioSpec>& specs, int parallelism,
                        const std::function<void(std::size_t, const SimulationResult&)>& on_result = {});

MatrixSummary summarize(const std::vector<SimulationResult>& results);

nlohmann::json summary_to_json(const MatrixSummary& summary, const std::vector<SimulationResult>& results);

/// RFC-4180 CSV: label,season,location,time,persona,status,steps,completion.
std::string summary_csv(const std::vector<SimulationResult>& results);

/// Matrix document:
/// {"rows": [{"label", "scene", "season", "location", "time"}], "personas": [...],
///  "runs": 100, "base_seed": 1, "spawns": [...], "task": {...}, "backend": {...}}
struct MatrixConfig {
  struct Row {
    std::string label;
    std::string scene;
    std::string season;
    std::string location;
    std::string time;
  };
  std::vector<Row> rows;
  std::vector<Persona> personas;
  std::vector<std::string> spawns{"default"};
  int runs = 0;
  std::uint64_t base_seed = 0;
  TaskSpec task;
  BackendConfig backend;
};

MatrixConfig parse_matrix_config(const nlohmann::json& j);

/// Scenario i uses row i mod R, persona (i / R) mod P, spawn (i / (R P)) mod S and
/// seed base_seed + i.
std::vector<ScenarioSpec> expand_matrix(const MatrixConfig& config);

// --- configuration documents -----------------------------------------------------

nlohmann::json persona_to_json(const Persona& p);
Persona parse_persona(const nlohmann::json& j);
nlohmann::json task_to_json(const TaskSpec& t);
/// A string selects a bundled task ("train_station"); an object is parsed
/// strictly, with missing fields taken from the train-station task.
TaskSpec parse_task(const nlohmann::json& j);

/// Run document: ScenarioSpec fields plus "out" and "parallelism". Unknown
/// keys are a ConfigError.
struct RunConfig {
  ScenarioSpec spec;
  std::string out = "out";
  int parallelism = 1;
};

RunConfig parse_run_config(const nlohmann::json& j);

// --- traces ------------------------------------------------------------------

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr std::string_view kTraceExtension = ".talog";

std::string trace_to_string(const SimulationResult& result);
SimulationResult trace_from_string(std::string_view text);

void write_trace(const SimulationResult& result, const std::filesystem::path& path);
SimulationResult read_trace(const std::filesystem::path& path);

/// Trace text with every wall_time_ms value replaced by 0.
std::string canonical_trace(std::string_view text);

/// Lowercase hex SHA-256 of canonical_trace(text).
std::string trace_hash(std::string_view text);
std::string trace_file_hash(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace ta
