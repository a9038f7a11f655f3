#include "travelagent/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <regex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "travelagent/error.hpp"
#include "travelagent/resources.hpp"
#include "travelagent/rng.hpp"

namespace ta {

using nlohmann::json;

std::string_view to_string(Phase p) { return p == Phase::main ? "main" : "subtask"; }

Phase parse_phase(std::string_view s) {
  if (s == "main") return Phase::main;
  if (s == "subtask") return Phase::subtask;
  throw ParseError("unknown phase '" + std::string(s) + "'");
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::completed_with_subtask: return "completed_with_subtask";
    case RunStatus::step_limit_exceeded: return "step_limit_exceeded";
    case RunStatus::stuck: return "stuck";
    case RunStatus::backend_failed: return "backend_failed";
  }
  return "backend_failed";
}

RunStatus parse_run_status(std::string_view s) {
  for (auto st : {RunStatus::completed, RunStatus::completed_with_subtask, RunStatus::step_limit_exceeded,
                  RunStatus::stuck, RunStatus::backend_failed})
    if (to_string(st) == s) return st;
  throw ParseError("unknown run status '" + std::string(s) + "'");
}

bool is_completed(RunStatus s) { return s == RunStatus::completed || s == RunStatus::completed_with_subtask; }

bool equal_ignoring_wall_time(const SimulationResult& a, const SimulationResult& b) {
  if (a.steps.size() != b.steps.size()) return false;
  SimulationResult x = a;
  SimulationResult y = b;
  for (auto& s : x.steps) s.wall_time_ms = 0.0;
  for (auto& s : y.steps) s.wall_time_ms = 0.0;
  return x == y;
}

// --- physics -----------------------------------------------------------------

bool inside_dilated_goal(const Goal& goal, Vec2 p) {
  return point_in_polygon(p, goal.polygon) || distance_to_boundary(p, goal.polygon) <= kGoalDilation;
}

std::pair<Pose, bool> execute_move(const Scene& scene, const Pose& pose, double requested) {
  const Vec2 dir = heading_vector(pose.heading);
  const auto hit = raycast(scene, pose.position, dir, requested + 1.0);
  double travel = requested;
  bool clamped = false;
  if (hit && hit->distance - kCollisionBuffer < requested) {
    travel = std::max(0.0, hit->distance - kCollisionBuffer);
    clamped = true;
  }
  Pose out = pose;
  out.position = pose.position + dir * travel;
  return {out, clamped};
}

Pose execute_turn(const Pose& pose, const Action& action) {
  Pose out = pose;
  switch (action.kind) {
    case ActionKind::turn_left: out.heading = normalize_heading(pose.heading - action.magnitude.value_or(0.0)); break;
    case ActionKind::turn_right: out.heading = normalize_heading(pose.heading + action.magnitude.value_or(0.0)); break;
    case ActionKind::search: out.heading = normalize_heading(pose.heading + kSearchTurn); break;
    default: break;
  }
  return out;
}

std::size_t draw_subtask(std::uint64_t rng_seed, std::size_t count) {
  if (count == 0) throw Error("cannot draw from an empty subtask list");
  Lcg64 rng(rng_seed);
  return static_cast<std::size_t>(rng.below(count));
}

// --- step loop ---------------------------------------------------------------

StepRecord step(const StepContext& ctx, Backend& backend, SimState& state) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scene& scene = *ctx.scene;

  StepRecord rec;
  rec.index = state.step_index;
  rec.phase = state.phase;
  rec.pose_before = state.pose;

  SenseConfig sc;
  sc.compass_enabled = ctx.compass_target.has_value();
  sc.target = ctx.compass_target;
  rec.frame = sense(scene, state.pose, state.map, sc);
  for (auto& n : state.pending_notes) rec.frame.notes.push_back(std::move(n));
  state.pending_notes.clear();

  const auto seed = std::optional<std::int64_t>(static_cast<std::int64_t>(ctx.rng_seed));
  const double temp = ctx.backend_config.temperature;
  const int max_tokens = ctx.backend_config.max_tokens;
  const int idx = state.step_index;

  CotOutputs& out = rec.outputs;
  out.observation = run_stage(backend, Stage::observe,
                              build_prompt(Stage::observe, ctx.agent, state.memory, rec.frame, idx), temp, seed,
                              max_tokens);
  out.plan = run_stage(backend, Stage::plan,
                       build_prompt(Stage::plan, ctx.agent, state.memory, rec.frame, idx, {out.observation, {}, {}}),
                       temp, seed, max_tokens);

  std::string correction;
  bool parsed = false;
  for (int attempt = 0; attempt < kDecideAttempts && !parsed; ++attempt) {
    const PriorOutputs prior{out.observation, out.plan, correction};
    out.decision_raw = run_stage(backend, Stage::decide,
                                 build_prompt(Stage::decide, ctx.agent, state.memory, rec.frame, idx, prior), temp,
                                 seed, max_tokens);
    try {
      out.action = parse_action(out.decision_raw);
      parsed = true;
    } catch (const ParseError& e) {
      ++rec.parse_failures;
      correction = decide_correction(e.what());
    }
  }
  if (!parsed) {
    out.action = Action::search();
    rec.parse_fallback = true;
  }

  Pose after = state.pose;
  if (out.action.kind == ActionKind::move_forward) {
    auto [moved, clamped] = execute_move(scene, state.pose, out.action.magnitude.value_or(Action::kDefaultMove));
    after = moved;
    rec.collision_clamped = clamped;
  } else {
    after = execute_turn(state.pose, out.action);
  }
  rec.pose_after = after;
  if (out.action.kind == ActionKind::finish && ctx.goal)
    rec.finish_at_goal = inside_dilated_goal(*ctx.goal, after.position);

  state.map = update_discovery(state.map, state.pose, after);
  state.pose = after;
  state.memory = update_memory(state.memory, idx, out.action, out.observation, out.plan);
  rec.memory = state.memory.text;
  ++state.step_index;

  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

SimulationResult result_shell(const ScenarioSpec& spec) {
  SimulationResult r;
  r.label = spec.label;
  r.sim_id = spec.sim_id;
  r.scene = spec.scene;
  r.spawn = spec.spawn;
  r.rng_seed = spec.rng_seed;
  r.persona = spec.persona.description;
  r.season = spec.season;
  r.location = spec.location;
  r.time = spec.time;
  return r;
}

SimulationResult failed_result(const ScenarioSpec& spec, const std::string& message) {
  SimulationResult r = result_shell(spec);
  r.status = RunStatus::backend_failed;
  r.error = message;
  return r;
}

}  // namespace

SimulationResult run(const ScenarioSpec& spec) {
  const Scene scene = load_scene(spec.scene);
  auto backend = make_backend(spec.backend);
  return run(spec, scene, *backend);
}

SimulationResult run(const ScenarioSpec& spec, const Scene& scene, Backend& backend) {
  validate_persona(spec.persona);
  validate_task(spec.task, scene);
  const Spawn* spawn = scene.find_spawn(spec.spawn);
  if (!spawn) throw ValidationError(spec.spawn, "spawn not found in scene '" + scene.name + "'");
  const Goal* goal = scene.find_goal(spec.task.goal_id);

  SimulationResult result = result_shell(spec);
  result.scene_name = scene.name;
  if (result.season.empty()) result.season = scene.metadata.season;
  if (result.location.empty()) result.location = scene.metadata.locale;
  if (result.time.empty()) result.time = scene.metadata.time_of_day;

  StepContext ctx;
  ctx.scene = &scene;
  ctx.agent = AgentContext{spec.persona, spec.task, scene.metadata, spec.task.compass_enabled};
  if (spec.task.compass_enabled) ctx.compass_target = centroid(goal->polygon);
  ctx.goal = goal;
  ctx.backend_config = spec.backend;
  ctx.rng_seed = spec.rng_seed;

  SimState state;
  state.pose = spawn->pose;
  state.map = make_discovery_map(scene);
  state.map = update_discovery(state.map, state.pose, state.pose);
  state.memory.text = spec.memory_seed;
  if (state.memory.text.size() > state.memory.budget) state.memory.text.resize(state.memory.budget);

  std::deque<double> window;
  int phase_steps = 0;
  while (true) {
    if (phase_steps >= spec.task.step_limit) {
      result.status = state.phase == Phase::main ? RunStatus::step_limit_exceeded : RunStatus::completed;
      break;
    }
    StepRecord rec;
    try {
      rec = step(ctx, backend, state);
    } catch (const StageError& e) {
      result.status = RunStatus::backend_failed;
      result.error = e.what();
      break;
    }
    ++phase_steps;
    const double moved = distance(rec.pose_before.position, rec.pose_after.position);
    const bool finish = rec.is_finish();
    const bool at_goal = rec.finish_at_goal;
    const Phase phase = rec.phase;
    result.steps.push_back(std::move(rec));

    if (finish) {
      if (phase == Phase::subtask) {
        result.status = RunStatus::completed_with_subtask;
        break;
      }
      if (at_goal) {
        if (spec.task.subtasks.empty()) {
          result.status = RunStatus::completed;
          break;
        }
        const std::size_t pick = draw_subtask(spec.rng_seed, spec.task.subtasks.size());
        result.subtask = spec.task.subtasks[pick];
        state.phase = Phase::subtask;
        ctx.agent.task.objective = subtask_objective(*result.subtask);
        ctx.compass_target.reset();
        window.clear();
        phase_steps = 0;
        continue;
      }
      state.pending_notes.emplace_back(kNotAtGoalNote);
    }

    window.push_back(moved);
    if (window.size() > static_cast<std::size_t>(kStuckWindow)) window.pop_front();
    if (window.size() == static_cast<std::size_t>(kStuckWindow) &&
        std::accumulate(window.begin(), window.end(), 0.0) < kStuckDisplacement) {
      result.status = state.phase == Phase::main ? RunStatus::stuck : RunStatus::completed;
      break;
    }
  }
  return result;
}

// --- matrix ------------------------------------------------------------------

MatrixResult run_matrix(const std::vector<ScenarioSpec>& specs, int parallelism,
                        const std::function<void(std::size_t, const SimulationResult&)>& on_result) {
  if (specs.empty()) throw ConfigError("matrix has no specs");
  if (parallelism < 1) throw ConfigError("parallelism must be positive");

  std::map<std::string, std::shared_ptr<const Scene>> scenes;
  std::map<std::string, std::string> scene_errors;
  std::map<std::string, std::shared_ptr<Backend>> backends;
  std::map<std::string, std::string> backend_errors;
  std::vector<std::string> backend_keys(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (!scenes.contains(s.scene) && !scene_errors.contains(s.scene)) {
      try {
        scenes[s.scene] = std::make_shared<const Scene>(load_scene(s.scene));
      } catch (const std::exception& e) {
        scene_errors[s.scene] = e.what();
      }
    }
    backend_keys[i] = backend_config_to_json(s.backend).dump();
    if (!backends.contains(backend_keys[i]) && !backend_errors.contains(backend_keys[i])) {
      try {
        backends[backend_keys[i]] = make_backend(s.backend);
      } catch (const std::exception& e) {
        backend_errors[backend_keys[i]] = e.what();
      }
    }
  }

  MatrixResult out;
  out.results.resize(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex cb_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      const ScenarioSpec& s = specs[i];
      SimulationResult r;
      if (auto e = scene_errors.find(s.scene); e != scene_errors.end()) {
        r = failed_result(s, e->second);
      } else if (auto b = backend_errors.find(backend_keys[i]); b != backend_errors.end()) {
        r = failed_result(s, b->second);
      } else {
        try {
          r = run(s, *scenes.at(s.scene), *backends.at(backend_keys[i]));
        } catch (const std::exception& e) {
          r = failed_result(s, e.what());
        }
      }
      out.results[i] = std::move(r);
      if (on_result) {
        std::lock_guard lock(cb_mu);
        on_result(i, out.results[i]);
      }
    }
  };
  const int n = std::min<int>(parallelism, static_cast<int>(specs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  out.summary = summarize(out.results);
  return out;
}

MatrixSummary summarize(const std::vector<SimulationResult>& results) {
  MatrixSummary m;
  auto add = [](LabelSummary& l, const SimulationResult& r) {
    ++l.total;
    if (is_completed(r.status)) ++l.completed;
    l.steps += r.steps.size();
    ++l.by_status[std::string(to_string(r.status))];
  };
  for (const auto& r : results) {
    ++m.total;
    if (is_completed(r.status)) ++m.completed;
    m.total_steps += r.steps.size();
    add(m.by_label[r.label], r);
    add(m.by_persona[r.persona], r);
  }
  m.completion_rate = m.total ? static_cast<double>(m.completed) / static_cast<double>(m.total) : 0.0;
  return m;
}

namespace {

json label_summary_json(const LabelSummary& l) {
  return {{"total", l.total},
          {"completed", l.completed},
          {"completion_rate", l.total ? static_cast<double>(l.completed) / static_cast<double>(l.total) : 0.0},
          {"steps", l.steps},
          {"by_status", l.by_status}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json summary_to_json(const MatrixSummary& summary, const std::vector<SimulationResult>& results) {
  json j;
  j["total"] = summary.total;
  j["completed"] = summary.completed;
  j["completion_rate"] = summary.completion_rate;
  j["total_steps"] = summary.total_steps;
  json labels = json::object();
  for (const auto& [k, v] : summary.by_label) labels[k] = label_summary_json(v);
  j["by_label"] = labels;
  json personas = json::object();
  for (const auto& [k, v] : summary.by_persona) personas[k] = label_summary_json(v);
  j["by_persona"] = personas;
  json runs = json::array();
  for (const auto& r : results) {
    json e = {{"sim_id", r.sim_id}, {"label", r.label},   {"season", r.season},
              {"location", r.location}, {"time", r.time}, {"persona", r.persona},
              {"status", to_string(r.status)}, {"steps", r.steps.size()}, {"seed", r.rng_seed}};
    if (r.subtask) e["subtask"] = *r.subtask;
    if (r.error) e["error"] = *r.error;
    runs.push_back(std::move(e));
  }
  j["runs"] = runs;
  return j;
}

std::string summary_csv(const std::vector<SimulationResult>& results) {
  std::string out = "label,season,location,time,persona,status,steps,completion\r\n";
  for (const auto& r : results) {
    out += csv_field(r.label) + ',' + csv_field(r.season) + ',' + csv_field(r.location) + ',' + csv_field(r.time) +
           ',' + csv_field(r.persona) + ',' + std::string(to_string(r.status)) + ',' +
           std::to_string(r.steps.size()) + ',' + (is_completed(r.status) ? "1" : "0") + "\r\n";
  }
  return out;
}

// --- configuration documents -----------------------------------------------------

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(where + ": unknown key '" + k + "'");
}

template <typename F>
auto guarded(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

json persona_to_json(const Persona& p) {
  json j = {{"description", p.description}};
  if (!p.attributes.empty()) j["attributes"] = p.attributes;
  return j;
}

Persona parse_persona(const json& j) {
  return guarded("persona", [&] {
    Persona p;
    if (j.is_string()) {
      p.description = j.get<std::string>();
    } else {
      reject_unknown(j, {"description", "attributes"}, "persona");
      p.description = j.at("description").get<std::string>();
      if (j.contains("attributes")) p.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
    }
    validate_persona(p);
    return p;
  });
}

json task_to_json(const TaskSpec& t) {
  return {{"objective", t.objective},
          {"subtasks", t.subtasks},
          {"step_limit", t.step_limit},
          {"compass_enabled", t.compass_enabled},
          {"goal_id", t.goal_id}};
}

TaskSpec parse_task(const json& j) {
  return guarded("task", [&] {
    if (j.is_string()) {
      if (j.get<std::string>() != "train_station")
        throw ConfigError("task: unknown bundled task '" + j.get<std::string>() + "'");
      return train_station_task();
    }
    reject_unknown(j, {"objective", "subtasks", "step_limit", "compass_enabled", "goal_id"}, "task");
    TaskSpec t = train_station_task();
    if (j.contains("objective")) t.objective = j.at("objective").get<std::string>();
    if (j.contains("subtasks")) t.subtasks = j.at("subtasks").get<std::vector<std::string>>();
    if (j.contains("step_limit")) t.step_limit = j.at("step_limit").get<int>();
    if (j.contains("compass_enabled")) t.compass_enabled = j.at("compass_enabled").get<bool>();
    if (j.contains("goal_id")) t.goal_id = j.at("goal_id").get<std::string>();
    if (t.step_limit < 1) throw ConfigError("task: step_limit must be >= 1");
    return t;
  });
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j,
                 {"scene", "spawn", "persona", "task", "memory_seed", "seed", "backend", "label", "sim_id", "season",
                  "location", "time", "out", "parallelism"},
                 "run config");
  return guarded("run config", [&] {
    RunConfig c;
    ScenarioSpec& s = c.spec;
    s.scene = j.at("scene").get<std::string>();
    if (j.contains("spawn")) s.spawn = j.at("spawn").get<std::string>();
    s.persona = j.contains("persona") ? parse_persona(j.at("persona")) : Persona{"a 30-year-old female researcher", {}};
    s.task = j.contains("task") ? parse_task(j.at("task")) : train_station_task();
    if (j.contains("memory_seed")) s.memory_seed = j.at("memory_seed").get<std::string>();
    if (j.contains("seed")) s.rng_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("backend")) s.backend = parse_backend_config(j.at("backend"));
    s.label = j.value("label", s.scene);
    s.sim_id = j.value("sim_id", s.label + "-" + std::to_string(s.rng_seed));
    if (j.contains("season")) s.season = j.at("season").get<std::string>();
    if (j.contains("location")) s.location = j.at("location").get<std::string>();
    if (j.contains("time")) s.time = j.at("time").get<std::string>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("parallelism")) c.parallelism = j.at("parallelism").get<int>();
    if (c.parallelism < 1) throw ConfigError("run config: parallelism must be >= 1");
    return c;
  });
}

MatrixConfig parse_matrix_config(const json& j) {
  reject_unknown(j, {"rows", "personas", "spawns", "runs", "base_seed", "task", "backend"}, "matrix");
  return guarded("matrix", [&] {
    MatrixConfig m;
    for (const auto& r : j.at("rows")) {
      reject_unknown(r, {"label", "scene", "season", "location", "time"}, "matrix row");
      MatrixConfig::Row row;
      row.scene = r.at("scene").get<std::string>();
      row.label = r.value("label", row.scene);
      row.season = r.value("season", std::string());
      row.location = r.value("location", std::string());
      row.time = r.value("time", std::string());
      m.rows.push_back(std::move(row));
    }
    if (m.rows.empty()) throw ConfigError("matrix: rows must be non-empty");
    if (j.contains("personas"))
      for (const auto& p : j.at("personas")) m.personas.push_back(parse_persona(p));
    if (m.personas.empty()) m.personas.push_back(Persona{"a 30-year-old female researcher", {}});
    if (j.contains("spawns")) m.spawns = j.at("spawns").get<std::vector<std::string>>();
    if (m.spawns.empty()) throw ConfigError("matrix: spawns must be non-empty");
    m.runs = j.value("runs", static_cast<int>(m.rows.size() * m.personas.size() * m.spawns.size()));
    if (m.runs < 1) throw ConfigError("matrix: runs must be >= 1");
    m.base_seed = j.value("base_seed", std::uint64_t{0});
    m.task = j.contains("task") ? parse_task(j.at("task")) : train_station_task();
    if (j.contains("backend")) m.backend = parse_backend_config(j.at("backend"));
    return m;
  });
}

std::vector<ScenarioSpec> expand_matrix(const MatrixConfig& config) {
  if (config.rows.empty() || config.personas.empty() || config.spawns.empty() || config.runs < 1)
    throw ConfigError("matrix is empty");
  const std::size_t R = config.rows.size();
  const std::size_t P = config.personas.size();
  const std::size_t S = config.spawns.size();
  std::vector<ScenarioSpec> specs;
  for (std::size_t i = 0; i < static_cast<std::size_t>(config.runs); ++i) {
    const auto& row = config.rows[i % R];
    ScenarioSpec s;
    s.scene = row.scene;
    s.label = row.label;
    s.season = row.season;
    s.location = row.location;
    s.time = row.time;
    s.persona = config.personas[(i / R) % P];
    s.spawn = config.spawns[(i / (R * P)) % S];
    s.task = config.task;
    s.backend = config.backend;
    s.rng_seed = config.base_seed + i;
    char id[64];
    std::snprintf(id, sizeof id, "%03zu", i);
    s.sim_id = std::string(id) + "-" + row.label;
    specs.push_back(std::move(s));
  }
  return specs;
}

// --- traces ------------------------------------------------------------------

namespace {

json pose_json(const Pose& p) { return {{"x", p.position.x}, {"y", p.position.y}, {"heading", p.heading}}; }

Pose pose_from(const json& j) { return Pose{{j.at("x").get<double>(), j.at("y").get<double>()}, j.at("heading").get<double>()}; }

json frame_json(const SensoryFrame& f) {
  json rays = json::array();
  for (const auto& r : f.rays) {
    if (r)
      rays.push_back({{"class", to_string(r->cls)}, {"distance", r->distance}});
    else
      rays.push_back(nullptr);
  }
  json j = {{"view", f.view_text}, {"rays", rays}, {"discovery", f.discovery_text}, {"notes", f.notes}};
  j["compass"] = f.compass_text ? json(*f.compass_text) : json(nullptr);
  j["warning"] = f.collision_warning ? json(*f.collision_warning) : json(nullptr);
  return j;
}

SensoryFrame frame_from(const json& j) {
  SensoryFrame f;
  f.view_text = j.at("view").get<std::string>();
  const json& rays = j.at("rays");
  if (!rays.is_array() || rays.size() != f.rays.size()) throw ParseError("frame.rays must have 5 entries");
  for (std::size_t i = 0; i < f.rays.size(); ++i) {
    if (rays[i].is_null()) continue;
    f.rays[i] = RayReading{parse_semantic_class(rays[i].at("class").get<std::string>()),
                           rays[i].at("distance").get<double>()};
  }
  f.discovery_text = j.at("discovery").get<std::string>();
  if (!j.at("compass").is_null()) f.compass_text = j.at("compass").get<std::string>();
  if (!j.at("warning").is_null()) f.collision_warning = j.at("warning").get<std::string>();
  f.notes = j.at("notes").get<std::vector<std::string>>();
  return f;
}

json action_json(const Action& a) {
  json j = {{"kind", to_string(a.kind)}};
  j["magnitude"] = a.magnitude ? json(*a.magnitude) : json(nullptr);
  return j;
}

Action action_from(const json& j) {
  Action a;
  const auto kind = parse_action_kind(j.at("kind").get<std::string>());
  if (!kind) throw ParseError("unknown action kind '" + j.at("kind").get<std::string>() + "'");
  a.kind = *kind;
  if (!j.at("magnitude").is_null()) a.magnitude = j.at("magnitude").get<double>();
  const bool needs = a.kind == ActionKind::move_forward || a.kind == ActionKind::turn_left ||
                     a.kind == ActionKind::turn_right;
  if (needs != a.magnitude.has_value()) throw ParseError("action magnitude does not match its kind");
  return a;
}

json step_json(const StepRecord& s) {
  return {{"type", "step"},
          {"index", s.index},
          {"phase", to_string(s.phase)},
          {"pose_before", pose_json(s.pose_before)},
          {"pose_after", pose_json(s.pose_after)},
          {"frame", frame_json(s.frame)},
          {"observation", s.outputs.observation},
          {"plan", s.outputs.plan},
          {"decision_raw", s.outputs.decision_raw},
          {"action", action_json(s.outputs.action)},
          {"collision_clamped", s.collision_clamped},
          {"parse_failures", s.parse_failures},
          {"parse_fallback", s.parse_fallback},
          {"finish_at_goal", s.finish_at_goal},
          {"memory", s.memory},
          {"wall_time_ms", s.wall_time_ms}};
}

StepRecord step_from(const json& j) {
  if (j.at("type").get<std::string>() != "step") throw ParseError("expected a step record");
  StepRecord s;
  s.index = j.at("index").get<int>();
  s.phase = parse_phase(j.at("phase").get<std::string>());
  s.pose_before = pose_from(j.at("pose_before"));
  s.pose_after = pose_from(j.at("pose_after"));
  s.frame = frame_from(j.at("frame"));
  s.outputs.observation = j.at("observation").get<std::string>();
  s.outputs.plan = j.at("plan").get<std::string>();
  s.outputs.decision_raw = j.at("decision_raw").get<std::string>();
  s.outputs.action = action_from(j.at("action"));
  s.collision_clamped = j.at("collision_clamped").get<bool>();
  s.parse_failures = j.at("parse_failures").get<int>();
  s.parse_fallback = j.at("parse_fallback").get<bool>();
  s.finish_at_goal = j.at("finish_at_goal").get<bool>();
  s.memory = j.at("memory").get<std::string>();
  s.wall_time_ms = j.at("wall_time_ms").get<double>();
  return s;
}

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

}  // namespace

std::string trace_to_string(const SimulationResult& r) {
  json header = {{"type", "header"},
                 {"schema_version", kTraceSchemaVersion},
                 {"prompt_version", r.prompt_version},
                 {"sim_id", r.sim_id},
                 {"label", r.label},
                 {"scene", r.scene},
                 {"scene_name", r.scene_name},
                 {"spawn", r.spawn},
                 {"rng_seed", r.rng_seed},
                 {"persona", r.persona},
                 {"season", r.season},
                 {"location", r.location},
                 {"time", r.time},
                 {"status", to_string(r.status)},
                 {"subtask", opt_json(r.subtask)},
                 {"error", opt_json(r.error)},
                 {"step_count", r.steps.size()}};
  std::string out = header.dump(-1, ' ', false, json::error_handler_t::replace) + '\n';
  for (const auto& s : r.steps) out += step_json(s).dump(-1, ' ', false, json::error_handler_t::replace) + '\n';
  return out;
}

SimulationResult trace_from_string(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty()) throw TraceError(1, "empty trace");

  SimulationResult r;
  std::size_t expected_steps = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    try {
      if (lines[i].empty()) throw ParseError("empty line");
      const json j = json::parse(lines[i]);
      if (i == 0) {
        if (!j.is_object() || j.value("type", "") != "header") throw ParseError("first line must be a header record");
        const int version = j.at("schema_version").get<int>();
        if (version != kTraceSchemaVersion)
          throw ParseError("unsupported schema_version " + std::to_string(version) + " (expected " +
                           std::to_string(kTraceSchemaVersion) + ")");
        r.prompt_version = j.at("prompt_version").get<std::string>();
        r.sim_id = j.at("sim_id").get<std::string>();
        r.label = j.at("label").get<std::string>();
        r.scene = j.at("scene").get<std::string>();
        r.scene_name = j.at("scene_name").get<std::string>();
        r.spawn = j.at("spawn").get<std::string>();
        r.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        r.persona = j.at("persona").get<std::string>();
        r.season = j.at("season").get<std::string>();
        r.location = j.at("location").get<std::string>();
        r.time = j.at("time").get<std::string>();
        r.status = parse_run_status(j.at("status").get<std::string>());
        r.subtask = opt_from(j.at("subtask"));
        r.error = opt_from(j.at("error"));
        expected_steps = j.at("step_count").get<std::size_t>();
      } else {
        StepRecord s = step_from(j);
        if (s.index != static_cast<int>(r.steps.size()))
          throw ParseError("step index " + std::to_string(s.index) + " out of sequence (expected " +
                           std::to_string(r.steps.size()) + ")");
        r.steps.push_back(std::move(s));
      }
    } catch (const TraceError&) {
      throw;
    } catch (const std::exception& e) {
      throw TraceError(line_no, e.what());
    }
  }
  if (r.steps.size() != expected_steps)
    throw TraceError(lines.size() + 1, "header declares " + std::to_string(expected_steps) + " steps but " +
                                           std::to_string(r.steps.size()) + " were read");
  return r;
}

void write_trace(const SimulationResult& result, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const std::string text = trace_to_string(result);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError(0, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SimulationResult read_trace(const std::filesystem::path& path) { return trace_from_string(read_file(path)); }

std::string canonical_trace(std::string_view text) {
  static const std::regex wall(R"("wall_time_ms":[-+0-9.eE]+)");
  return std::regex_replace(std::string(text), wall, R"("wall_time_ms":0)");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string trace_hash(std::string_view text) { return sha256_hex(canonical_trace(text)); }

std::string trace_file_hash(const std::filesystem::path& path) { return trace_hash(read_file(path)); }

}  // namespace ta
