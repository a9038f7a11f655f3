#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "travelagent/error.hpp"
#include "travelagent/resources.hpp"
#include "travelagent/sim.hpp"

using namespace ta;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ScenarioSpec heuristic_spec(std::uint64_t seed = 7) {
  ScenarioSpec s;
  s.scene = "kendall_base";
  s.persona = {"a 30-year-old female researcher", {}};
  s.task = train_station_task();
  s.rng_seed = seed;
  s.label = "base";
  s.sim_id = "base-" + std::to_string(seed);
  return s;
}

ScenarioSpec scripted_spec(const json& script, int step_limit) {
  ScenarioSpec s = heuristic_spec(1);
  s.task.step_limit = step_limit;
  s.backend.kind = BackendKind::scripted;
  s.backend.script = script;
  return s;
}

json observe_plan(const std::string& decide) {
  return json{{"table", json::array({{{"stage", "observe"}, {"step", "*"}, {"response", "I look."}},
                                     {{"stage", "plan"}, {"step", "*"}, {"response", "I plan."}},
                                     {{"stage", "decide"}, {"step", "*"}, {"response", decide}}})}};
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ta_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("physics: move clamps at the collision buffer") {
  Scene s;
  s.walkable.push_back(testing::rect(0, 0, 100, 100));
  s.objects.push_back(SceneObject{"wall", SemanticClass::wall, testing::rect(40, 52, 60, 53), 3, std::nullopt});
  const Pose start{{50, 50}, 0};
  auto [after, clamped] = execute_move(s, start, 10.0);
  CHECK(clamped);
  CHECK(after.position.y - 50.0 == doctest::Approx(1.7));
  CHECK(after.heading == 0.0);
  auto [free_move, free_clamped] = execute_move(s, Pose{{10, 10}, 0}, 10.0);
  CHECK_FALSE(free_clamped);
  CHECK(free_move.position.y == doctest::Approx(20.0));
  auto [stuck, stuck_clamped] = execute_move(s, Pose{{50, 51.8}, 0}, 5.0);
  CHECK(stuck_clamped);
  CHECK(stuck.position.y == doctest::Approx(51.8));
}

TEST_CASE("physics: turns, search and finish") {
  CHECK(execute_turn({{0, 0}, 350}, Action::turn_right(45)).heading == doctest::Approx(35.0));
  CHECK(execute_turn({{0, 0}, 10}, Action::turn_left(45)).heading == doctest::Approx(325.0));
  CHECK(execute_turn({{0, 0}, 300}, Action::search()).heading == doctest::Approx(30.0));
  const Pose p{{3, 4}, 120};
  CHECK(execute_turn(p, Action::finish()) == p);
}

TEST_CASE("goal dilation is three meters") {
  const Goal g{"g", "goal", testing::rect(0, 0, 2, 2)};
  CHECK(inside_dilated_goal(g, {1, 1}));
  CHECK(inside_dilated_goal(g, {5, 1}));
  CHECK_FALSE(inside_dilated_goal(g, {5.01, 1}));
}

TEST_CASE("heuristic closed loop on kendall_base with seed 7") {
  const SimulationResult r = run(heuristic_spec(7));
  CHECK(is_completed(r.status));
  REQUIRE(r.subtask);
  const auto subtasks = train_station_task().subtasks;
  CHECK(std::find(subtasks.begin(), subtasks.end(), *r.subtask) != subtasks.end());
  CHECK(r.status == RunStatus::completed_with_subtask);
  const auto main_finish = std::find_if(r.steps.begin(), r.steps.end(), [](const StepRecord& s) { return s.is_finish(); });
  REQUIRE(main_finish != r.steps.end());
  CHECK(main_finish->finish_at_goal);
  CHECK(main_finish->phase == Phase::main);
  CHECK(std::any_of(r.steps.begin(), r.steps.end(), [](const StepRecord& s) { return s.phase == Phase::subtask; }));
  const Scene k = load_scene("kendall_base");
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    CHECK(r.steps[i].index == static_cast<int>(i));
    CHECK(contains_walkable(k, r.steps[i].pose_after.position));
    if (r.steps[i].phase == Phase::subtask) CHECK_FALSE(r.steps[i].frame.compass_text);
  }
  CHECK(r.prompt_version == kPromptVersion);
  CHECK(equal_ignoring_wall_time(r, run(heuristic_spec(7))));
}

TEST_CASE("subtask draw uses only the seed and the list") {
  const auto subtasks = train_station_task().subtasks;
  REQUIRE(subtasks.size() == 3);
  std::set<std::size_t> seen;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t k = draw_subtask(seed, subtasks.size());
    CHECK(k < 3);
    CHECK(k == draw_subtask(seed, subtasks.size()));
    seen.insert(k);
  }
  CHECK(seen.size() == 3);
  CHECK(Lcg64(0).next() == Lcg64(0).next());
  Lcg64 a(42);
  const std::uint64_t first = a.state();
  CHECK(first == (42ULL ^ 0x9E3779B97F4A7C15ULL) * Lcg64::kMultiplier + Lcg64::kIncrement);
}

TEST_CASE("empty subtask list ends the run at the first goal finish") {
  ScenarioSpec s = heuristic_spec();
  s.task.subtasks.clear();
  const SimulationResult r = run(s);
  CHECK(r.status == RunStatus::completed);
  CHECK_FALSE(r.subtask);
  CHECK(r.steps.back().is_finish());
}

TEST_CASE("scripted search with step_limit 1") {
  const SimulationResult r = run(scripted_spec(observe_plan("ACTION: search"), 1));
  CHECK(r.status == RunStatus::step_limit_exceeded);
  CHECK(r.steps.size() == 1);
  CHECK(r.steps[0].is_search());
  CHECK(r.steps[0].pose_after.heading == doctest::Approx(90.0));
}

TEST_CASE("repeated searching is declared stuck") {
  const SimulationResult r = run(scripted_spec(observe_plan("ACTION: search"), 30));
  CHECK(r.status == RunStatus::stuck);
  CHECK(r.steps.size() == static_cast<std::size_t>(kStuckWindow));
}

TEST_CASE("a wrong-place finish injects a corrective note") {
  const SimulationResult r = run(scripted_spec(observe_plan("ACTION: finish"), 3));
  REQUIRE(r.steps.size() == 3);
  CHECK(r.status == RunStatus::step_limit_exceeded);
  CHECK_FALSE(r.steps[0].finish_at_goal);
  CHECK(r.steps[0].frame.notes.empty());
  REQUIRE(r.steps[1].frame.notes.size() == 1);
  CHECK(r.steps[1].frame.notes[0] == kNotAtGoalNote);
}

TEST_CASE("decide parse failures retry with a correction and fall back to search") {
  json retry = observe_plan("unused");
  retry["table"].erase(2);
  retry["rules"] = json::array({{{"stage", "decide"}, {"pattern", "## Correction"}, {"response", "ACTION: turn left\nANGLE: 10"}},
                                {{"stage", "decide"}, {"pattern", "."}, {"response", "I will wander."}}});
  const SimulationResult ok = run(scripted_spec(retry, 1));
  REQUIRE(ok.steps.size() == 1);
  CHECK(ok.steps[0].parse_failures == 1);
  CHECK_FALSE(ok.steps[0].parse_fallback);
  CHECK(ok.steps[0].outputs.action == Action::turn_left(10));

  const SimulationResult bad = run(scripted_spec(observe_plan("I will wander."), 1));
  REQUIRE(bad.steps.size() == 1);
  CHECK(bad.steps[0].parse_failures == kDecideAttempts);
  CHECK(bad.steps[0].parse_fallback);
  CHECK(bad.steps[0].is_search());
}

TEST_CASE("a backend failure ends the run cleanly") {
  json script = observe_plan("ACTION: search");
  script["table"].erase(1);  // no plan entry: lookup miss
  const SimulationResult r = run(scripted_spec(script, 5));
  CHECK(r.status == RunStatus::backend_failed);
  CHECK(r.steps.empty());
  REQUIRE(r.error);
  CHECK(r.error->find("plan") != std::string::npos);

  ScenarioSpec http = heuristic_spec();
  http.backend.kind = BackendKind::http;
  http.backend.http.endpoint = "http://127.0.0.1:1";
  http.backend.http.max_attempts = 1;
  const SimulationResult h = run(http);
  CHECK(h.status == RunStatus::backend_failed);
}

TEST_CASE("without a compass the agent stays on walkable ground") {
  ScenarioSpec s = heuristic_spec();
  s.task.compass_enabled = false;
  const SimulationResult r = run(s);
  CHECK((r.status == RunStatus::step_limit_exceeded || is_completed(r.status)));
  const Scene k = load_scene("kendall_base");
  for (const auto& st : r.steps) {
    CHECK_FALSE(st.frame.compass_text);
    CHECK(contains_walkable(k, st.pose_after.position));
  }
}

TEST_CASE("matrix expansion follows the documented index arithmetic") {
  const MatrixConfig m = parse_matrix_config(json::parse(resources::get("matrices/train_station.json")));
  const auto specs = expand_matrix(m);
  REQUIRE(specs.size() == 100);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CHECK(specs[i].label == m.rows[i % 4].label);
    CHECK(specs[i].persona.description == m.personas[(i / 4) % 2].description);
    CHECK(specs[i].spawn == m.spawns[(i / 8) % 3]);
    CHECK(specs[i].rng_seed == 1000 + i);
  }
  CHECK(specs[5].sim_id == "005-winter");
  json empty = json::parse(resources::get("matrices/train_station.json"));
  empty["rows"] = json::array();
  CHECK_THROWS_AS(parse_matrix_config(empty), ConfigError);
  empty = json::parse(resources::get("matrices/train_station.json"));
  empty["colour"] = "red";
  CHECK_THROWS_AS(parse_matrix_config(empty), ConfigError);
}

TEST_CASE("run_matrix is independent of parallelism and records failures") {
  MatrixConfig m = parse_matrix_config(json::parse(resources::get("matrices/train_station.json")));
  m.runs = 12;
  auto specs = expand_matrix(m);
  specs.push_back(specs[0]);
  specs.back().scene = "does_not_exist.json";
  specs.back().sim_id = "broken";
  const MatrixResult one = run_matrix(specs, 1);
  const MatrixResult many = run_matrix(specs, 8);
  REQUIRE(one.results.size() == specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) CHECK(equal_ignoring_wall_time(one.results[i], many.results[i]));
  CHECK(one.summary == many.summary);
  CHECK(one.results.back().status == RunStatus::backend_failed);
  CHECK(one.summary.total == specs.size());
  std::size_t steps = 0, completed = 0;
  for (const auto& r : one.results) {
    steps += r.steps.size();
    completed += is_completed(r.status) ? 1 : 0;
  }
  CHECK(one.summary.total_steps == steps);
  CHECK(one.summary.completed == completed);
  CHECK(one.summary.completion_rate == doctest::Approx(static_cast<double>(completed) / specs.size()));
  CHECK(summary_csv(one.results) == summary_csv(many.results));
  CHECK_THROWS_AS(run_matrix({}, 1), ConfigError);
}

TEST_CASE("summary CSV columns") {
  SimulationResult r;
  r.label = "base";
  r.season = "Summer";
  r.location = "Kendall Square, Boston";
  r.time = "Morning";
  r.persona = "a \"quoted\" persona";
  r.status = RunStatus::completed;
  r.steps.resize(3);
  const std::string csv = summary_csv({r});
  CHECK(csv == "label,season,location,time,persona,status,steps,completion\r\n"
               "base,Summer,\"Kendall Square, Boston\",Morning,\"a \"\"quoted\"\" persona\",completed,3,1\r\n");
}

TEST_CASE("run configuration parsing is strict") {
  CHECK_THROWS_AS(parse_run_config(json{{"scene", "kendall_base"}, {"sede", 3}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json{{"scene", "kendall_base"}, {"task", {{"step_limit", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json{{"scene", "kendall_base"}, {"persona", ""}}), Error);
  const RunConfig c = parse_run_config(json::parse(resources::get("configs/kendall_heuristic.json")));
  CHECK(c.spec.rng_seed == 7);
  CHECK(c.spec.backend.kind == BackendKind::heuristic);
  CHECK(parse_task(task_to_json(c.spec.task)).objective == c.spec.task.objective);
}

TEST_CASE("trace round-trip over randomized results") {
  Lcg64 rng(17);
  const fs::path dir = temp_dir("roundtrip");
  for (int k = 0; k < 50; ++k) {
    const SimulationResult r = testing::random_result(rng);
    const fs::path p = dir / ("t" + std::to_string(k) + ".talog");
    write_trace(r, p);
    const SimulationResult back = read_trace(p);
    CHECK(equal_ignoring_wall_time(r, back));
    CHECK(trace_to_string(back) == trace_to_string(r));
  }
}

TEST_CASE("trace text is LF-delimited JSON with a header line") {
  const SimulationResult r = run(scripted_spec(observe_plan("ACTION: search"), 2));
  const std::string text = trace_to_string(r);
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const json header = json::parse(line);
  CHECK(header["type"] == "header");
  CHECK(header["schema_version"] == kTraceSchemaVersion);
  CHECK(header["prompt_version"] == kPromptVersion);
  CHECK(header["step_count"] == 2);
  std::getline(in, line);
  CHECK(json::parse(line)["type"] == "step");
  CHECK(trace_hash(text) == trace_hash(canonical_trace(text)));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("canonical hashes ignore wall time only") {
  const SimulationResult r = run(heuristic_spec());
  SimulationResult slow = r;
  for (auto& s : slow.steps) s.wall_time_ms += 123.5;
  CHECK(trace_hash(trace_to_string(r)) == trace_hash(trace_to_string(slow)));
  SimulationResult moved = r;
  moved.steps[0].pose_after.position.x += 1e-9;
  CHECK(trace_hash(trace_to_string(r)) != trace_hash(trace_to_string(moved)));
}

TEST_CASE("malformed traces fail with line numbers") {
  Lcg64 rng(2);
  SimulationResult r = testing::random_result(rng);
  while (r.steps.size() < 4) r = testing::random_result(rng);
  const std::string text = trace_to_string(r);
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  auto join = [](const std::vector<std::string>& ls) {
    std::string s;
    for (const auto& l : ls) s += l + "\n";
    return s;
  };
  auto error_line = [](const std::string& t) -> std::size_t {
    try {
      trace_from_string(t);
    } catch (const TraceError& e) {
      return e.line();
    }
    return 0;
  };

  auto bad = lines;
  bad[2] = bad[2].substr(0, bad[2].size() / 2);
  CHECK(error_line(join(bad)) == 3);

  bad = lines;
  json h = json::parse(bad[0]);
  h["schema_version"] = 99;
  bad[0] = h.dump();
  try {
    trace_from_string(join(bad));
    FAIL("expected TraceError");
  } catch (const TraceError& e) {
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
  }

  bad = lines;
  bad.pop_back();
  CHECK(error_line(join(bad)) == lines.size());

  bad = lines;
  std::swap(bad[1], bad[2]);
  CHECK(error_line(join(bad)) == 2);

  bad = lines;
  json st = json::parse(bad[1]);
  st.erase("pose_after");
  bad[1] = st.dump();
  CHECK(error_line(join(bad)) == 2);

  CHECK(error_line("") > 0);
  CHECK_THROWS_AS(read_trace("/nonexistent/file.talog"), Error);
}
