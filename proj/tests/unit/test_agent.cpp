#include <doctest.h>

#include <string>

#include "oracles.hpp"
#include "travelagent/agent.hpp"
#include "travelagent/backend.hpp"
#include "travelagent/error.hpp"
#include "travelagent/sensors.hpp"

using namespace ta;

namespace {

SensoryFrame sample_frame() {
  const Scene k = load_scene("kendall_base");
  const Pose pose = k.find_spawn("default")->pose;
  return sense(k, pose, make_discovery_map(k), {true, centroid(k.find_goal("subway")->polygon)});
}

AgentContext sample_context(bool familiar = true) {
  AgentContext ctx;
  ctx.persona = {"a 30-year-old female researcher", {{"age", "30"}}};
  ctx.task = train_station_task();
  ctx.metadata = load_scene("kendall_base").metadata;
  ctx.familiar = familiar;
  return ctx;
}

}  // namespace

TEST_CASE("parse_action: documented literal examples") {
  CHECK(parse_action("ACTION: move forward\nLENGTH: 1 meter") == Action::move_forward(1.0));
  CHECK(parse_action("ACTION: finish") == Action::finish());
  CHECK_THROWS_AS(parse_action("I think I'll wander."), ParseError);
  const Action clamped = parse_action("action: MOVE_FORWARD\nlength: 120");
  CHECK(clamped.kind == ActionKind::move_forward);
  CHECK(clamped.magnitude == 50.0);
}

TEST_CASE("parse_action: defaults, units, first ACTION wins") {
  CHECK(parse_action("ACTION: move forward") == Action::move_forward(2.0));
  CHECK(parse_action("ACTION: turn left") == Action::turn_left(45.0));
  CHECK(parse_action("Action: Turn_Right\nAngle: 30 degrees") == Action::turn_right(30.0));
  CHECK(parse_action("ACTION: turn right\nANGLE: 500°") == Action::turn_right(180.0));
  CHECK(parse_action("ACTION: move forward\nLENGTH: 0.01 m") == Action::move_forward(0.1));
  CHECK(parse_action("Thinking...\nACTION: search\nACTION: finish") == Action::search());
  CHECK(parse_action("  action :  finish  ") == Action::finish());
  CHECK_THROWS_AS(parse_action("ACTION: fly"), ParseError);
  CHECK_THROWS_AS(parse_action(""), ParseError);
}

TEST_CASE("parse_action round-trips canonical renderings") {
  Lcg64 rng(99);
  for (int k = 0; k < 2000; ++k) {
    Action a;
    switch (rng.below(5)) {
      case 0: a = Action::move_forward(rng.uniform(0.1, 50.0)); break;
      case 1: a = Action::turn_left(rng.uniform(1.0, 180.0)); break;
      case 2: a = Action::turn_right(rng.uniform(1.0, 180.0)); break;
      case 3: a = Action::search(); break;
      default: a = Action::finish(); break;
    }
    CHECK(parse_action(render_action(a)) == a);
  }
}

TEST_CASE("parse_action is total over arbitrary strings") {
  Lcg64 rng(7);
  static const std::string kAlphabet = "ACTIONLENGTHANGLEmovefrwadturnlihsc: \n\t0123456789.-_°mdeg\r\x01\xff";
  for (int k = 0; k < 10000; ++k) {
    std::string s;
    const std::size_t n = rng.below(60);
    for (std::size_t i = 0; i < n; ++i) s += kAlphabet[rng.below(kAlphabet.size())];
    if (rng.below(3) == 0) s = "ACTION: " + s;
    try {
      const Action a = parse_action(s);
      if (a.magnitude) CHECK(*a.magnitude == *a.magnitude);  // never NaN
    } catch (const ParseError&) {
    }
  }
}

TEST_CASE("memory: single line, budget, determinism") {
  const MemoryStream empty;
  const MemoryStream one = update_memory(empty, 0, Action::move_forward(2), "I see a wall. It is grey.", "go");
  CHECK(one.text == "step 0: moved forward 2 m; noted: I see a wall.");

  MemoryStream m;
  for (int k = 0; k < 500; ++k) {
    const std::string obs = "Observation number " + std::to_string(k) + " with some padding text. Second sentence.";
    m = update_memory(m, k, Action::turn_left(45), obs, "plan");
    REQUIRE(m.text.size() <= MemoryStream::kDefaultBudget);
    const std::string newest = "step " + std::to_string(k) + ": turned left 45°; noted: Observation number " + std::to_string(k);
    CHECK(m.text.find(newest) != std::string::npos);
  }
  CHECK(m.text.rfind(MemoryStream::kElidedHeader, 0) == 0);
  MemoryStream again;
  for (int k = 0; k < 500; ++k)
    again = update_memory(again, k, Action::turn_left(45),
                          "Observation number " + std::to_string(k) + " with some padding text. Second sentence.", "plan");
  CHECK(again == m);
}

TEST_CASE("memory: an oversized newest line is shortened, not evicted") {
  MemoryStream small{"", 60};
  small = update_memory(small, 0, Action::search(), std::string(500, 'x'), "");
  CHECK(small.text.size() <= 60);
  CHECK(small.text.find("step 0") != std::string::npos);
}

TEST_CASE("first_sentence") {
  CHECK(first_sentence("One. Two.") == "One.");
  CHECK(first_sentence("Costs 2.5 m! Yes") == "Costs 2.5 m!");
  CHECK(first_sentence("no end") == "no end");
  CHECK(first_sentence("line\nbreak. x") == "line break.");
}

TEST_CASE("build_prompt: initiation variants, grammar, determinism") {
  const SensoryFrame frame = sample_frame();
  const MemoryStream memory{"step 0: searched around; noted: hello.", 4000};
  const Prompt fam = build_prompt(Stage::observe, sample_context(true), memory, frame, 0);
  CHECK(fam.system.find("You reside on this street.") != std::string::npos);
  const Prompt unf = build_prompt(Stage::observe, sample_context(false), memory, frame, 0);
  CHECK(unf.system.find("You are visiting this street for the first time.") != std::string::npos);
  CHECK(fam == build_prompt(Stage::observe, sample_context(true), memory, frame, 0));

  CHECK(fam.user.find(memory.text) != std::string::npos);
  CHECK(fam.user.find(sections::kView) != std::string::npos);
  CHECK(fam.user.find(sections::kCompass) != std::string::npos);
  CHECK(fam.user.find(std::string(action_grammar_text())) == std::string::npos);

  const Prompt dec = build_prompt(Stage::decide, sample_context(true), memory, frame, 0, {"I see things.", "Walk on."});
  CHECK(dec.user.find(std::string(action_grammar_text())) != std::string::npos);
  CHECK(dec.user.find("I see things.") != std::string::npos);
  CHECK(dec.user.find("Walk on.") != std::string::npos);

  const auto tag = find_stage_tag(dec.system);
  REQUIRE(tag);
  CHECK(tag->stage == Stage::decide);
  CHECK(tag->step_index == 0);
  CHECK(dec.system.find(kPromptVersion) != std::string::npos);

  SensoryFrame other = frame;
  other.view_text += " A cat.";
  CHECK(build_prompt(Stage::observe, sample_context(true), memory, other, 0).user != fam.user);
}

TEST_CASE("run_stage trims text and names the failing stage") {
  ScriptedBackend scripted({{Stage::observe, 0, "  canned observation \n"}}, {});
  const Prompt p = build_prompt(Stage::observe, sample_context(), {}, sample_frame(), 0);
  CHECK(run_stage(scripted, Stage::observe, p) == "canned observation");

  HttpConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1";
  cfg.max_attempts = 1;
  cfg.timeout = std::chrono::milliseconds(200);
  HttpBackend dead(cfg);
  try {
    run_stage(dead, Stage::observe, p);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "observe");
  }
}

TEST_CASE("heuristic plan stage mentions the compass band") {
  HeuristicBackend h;
  const SensoryFrame frame = sample_frame();
  const Prompt p = build_prompt(Stage::plan, sample_context(), {}, frame, 0, {"obs", ""});
  const std::string plan = run_stage(h, Stage::plan, p);
  const std::string band(compass_reading(load_scene("kendall_base").find_spawn("default")->pose,
                                         centroid(load_scene("kendall_base").find_goal("subway")->polygon))
                             .band);
  CHECK(plan.find("The compass says the target is " + band + ".") != std::string::npos);
}

TEST_CASE("task and persona validation") {
  const Scene k = load_scene("kendall_base");
  TaskSpec t = train_station_task();
  CHECK(t.subtasks.size() == 3);
  CHECK_NOTHROW(validate_task(t, k));
  t.step_limit = 0;
  CHECK_THROWS_AS(validate_task(t, k), ValidationError);
  t = train_station_task();
  t.goal_id = "nowhere";
  CHECK_THROWS_AS(validate_task(t, k), ValidationError);
  CHECK_THROWS_AS(validate_persona(Persona{}), ValidationError);
}
