#include "travelagent/agent.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <regex>

#include <json.hpp>

#include "travelagent/error.hpp"
#include "travelagent/resources.hpp"

namespace ta {

namespace {

std::string fill(std::string_view tmpl, std::initializer_list<std::pair<std::string_view, std::string_view>> vars) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw Error("unterminated template placeholder");
    out.append(tmpl.substr(pos, open - pos));
    const std::string_view key = tmpl.substr(open + 2, close - open - 2);
    bool found = false;
    for (const auto& [k, v] : vars) {
      if (k == key) {
        out.append(v);
        found = true;
        break;
      }
    }
    if (!found) throw Error("template placeholder '" + std::string(key) + "' has no value");
    pos = close + 2;
  }
  return out;
}

std::string_view prompt_file(std::string_view name) {
  return resources::get("prompts/v1/" + std::string(name));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view strip_trailing_newline(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Number followed by an optional unit from `units`; nullopt when malformed.
std::optional<double> parse_magnitude(std::string_view value, std::initializer_list<std::string_view> units) {
  value = trim(value);
  std::size_t end = 0;
  if (end < value.size() && (value[end] == '+' || value[end] == '-')) ++end;
  const std::size_t digits_begin = end;
  while (end < value.size() && (std::isdigit(static_cast<unsigned char>(value[end])) || value[end] == '.')) ++end;
  if (end == digits_begin) return std::nullopt;
  double v = 0.0;
  const char* first = value.data() + (value[0] == '+' ? 1 : 0);
  auto [ptr, ec] = std::from_chars(first, value.data() + end, v);
  if (ec != std::errc() || ptr != value.data() + end || !std::isfinite(v)) return std::nullopt;
  const std::string unit = lower(trim(value.substr(end)));
  if (!unit.empty() && std::find(units.begin(), units.end(), unit) == units.end()) return std::nullopt;
  return v;
}

// Longest prefix of `s` no longer than `n` bytes that ends on a UTF-8 boundary.
std::string_view utf8_prefix(std::string_view s, std::size_t n) {
  if (s.size() <= n) return s;
  while (n > 0 && (static_cast<unsigned char>(s[n]) & 0xC0) == 0x80) --n;
  return s.substr(0, n);
}

}  // namespace

void validate_task(const TaskSpec& task, const Scene& scene) {
  if (task.step_limit < 1) throw ValidationError("task", "step_limit must be >= 1");
  if (!scene.find_goal(task.goal_id)) throw ValidationError("task", "goal '" + task.goal_id + "' is not in the scene");
}

void validate_persona(const Persona& persona) {
  if (trim(persona.description).empty()) throw ValidationError("persona", "description must be non-empty");
}

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::move_forward: return "move_forward";
    case ActionKind::turn_left: return "turn_left";
    case ActionKind::turn_right: return "turn_right";
    case ActionKind::search: return "search";
    case ActionKind::finish: return "finish";
  }
  return "search";
}

std::optional<ActionKind> parse_action_kind(std::string_view s) {
  for (auto k : {ActionKind::move_forward, ActionKind::turn_left, ActionKind::turn_right, ActionKind::search,
                 ActionKind::finish})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

Action Action::move_forward(double meters) {
  return {ActionKind::move_forward, std::clamp(meters, kMinMove, kMaxMove)};
}
Action Action::turn_left(double degrees) { return {ActionKind::turn_left, std::clamp(degrees, kMinTurn, kMaxTurn)}; }
Action Action::turn_right(double degrees) {
  return {ActionKind::turn_right, std::clamp(degrees, kMinTurn, kMaxTurn)};
}

std::string format_number(double v, int max_decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", max_decimals, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

namespace {

std::string exact_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, ptr);
}

}  // namespace

std::string render_action(const Action& a) {
  switch (a.kind) {
    case ActionKind::move_forward:
      return "ACTION: move forward\nLENGTH: " + exact_number(a.magnitude.value_or(Action::kDefaultMove));
    case ActionKind::turn_left:
      return "ACTION: turn left\nANGLE: " + exact_number(a.magnitude.value_or(Action::kDefaultTurn));
    case ActionKind::turn_right:
      return "ACTION: turn right\nANGLE: " + exact_number(a.magnitude.value_or(Action::kDefaultTurn));
    case ActionKind::search: return "ACTION: search";
    case ActionKind::finish: return "ACTION: finish";
  }
  return "ACTION: search";
}

Action parse_action(std::string_view raw) {
  std::optional<ActionKind> kind;
  std::optional<double> length;
  std::optional<double> angle;
  bool have_length_line = false;
  bool have_angle_line = false;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    const std::string_view line = trim(raw.substr(pos, nl - pos));
    pos = nl + 1;
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string key = lower(trim(line.substr(0, colon)));
    const std::string_view value = line.substr(colon + 1);
    if (key == "action" && !kind) {
      std::string verb = lower(trim(value));
      std::replace(verb.begin(), verb.end(), '_', ' ');
      while (!verb.empty() && verb.back() == '.') verb.pop_back();
      if (verb == "move forward") kind = ActionKind::move_forward;
      else if (verb == "turn left") kind = ActionKind::turn_left;
      else if (verb == "turn right") kind = ActionKind::turn_right;
      else if (verb == "search") kind = ActionKind::search;
      else if (verb == "finish") kind = ActionKind::finish;
      else throw ParseError("unknown action verb '" + std::string(trim(value)) + "'");
    } else if (key == "length" && !have_length_line) {
      have_length_line = true;
      length = parse_magnitude(value, {"m", "meter", "meters"});
    } else if (key == "angle" && !have_angle_line) {
      have_angle_line = true;
      angle = parse_magnitude(value, {"deg", "degrees", "°"});
    }
  }
  if (!kind) throw ParseError("no ACTION line");
  switch (*kind) {
    case ActionKind::move_forward: return Action::move_forward(length.value_or(Action::kDefaultMove));
    case ActionKind::turn_left: return Action::turn_left(angle.value_or(Action::kDefaultTurn));
    case ActionKind::turn_right: return Action::turn_right(angle.value_or(Action::kDefaultTurn));
    case ActionKind::search: return Action::search();
    case ActionKind::finish: return Action::finish();
  }
  return Action::search();
}

std::string action_phrase(const Action& a) {
  switch (a.kind) {
    case ActionKind::move_forward: return "moved forward " + format_number(*a.magnitude) + " m";
    case ActionKind::turn_left: return "turned left " + format_number(*a.magnitude) + "°";
    case ActionKind::turn_right: return "turned right " + format_number(*a.magnitude) + "°";
    case ActionKind::search: return "searched around";
    case ActionKind::finish: return "declared finish";
  }
  return "";
}

std::string_view action_grammar_text() { return strip_trailing_newline(prompt_file("action_grammar.txt")); }

Prompt build_prompt(Stage stage, const AgentContext& ctx, const MemoryStream& memory, const SensoryFrame& frame,
                    int step_index, const PriorOutputs& prior) {
  std::string attributes;
  if (!ctx.persona.attributes.empty()) {
    attributes = " Attributes:";
    bool first = true;
    for (const auto& [k, v] : ctx.persona.attributes) {
      attributes += (first ? " " : ", ") + k + "=" + v;
      first = false;
    }
    attributes += '.';
  }
  const std::string scenario =
      ctx.metadata.description.empty() ? std::string() : "Scenario: " + ctx.metadata.description + "\n";
  const std::string_view stage_file = stage == Stage::observe ? "stage_observe.txt"
                                      : stage == Stage::plan  ? "stage_plan.txt"
                                                              : "stage_decide.txt";
  const std::string header = stage_header(stage, step_index);
  const std::string setting = ctx.metadata.setting.empty() ? std::string("place") : ctx.metadata.setting;

  Prompt p;
  p.system = fill(prompt_file(ctx.familiar ? "system_familiar.txt" : "system_unfamiliar.txt"),
                  {{"header", header},
                   {"persona", ctx.persona.description},
                   {"attributes", attributes},
                   {"setting", setting},
                   {"objective", ctx.task.objective},
                   {"scenario", scenario},
                   {"compass_rule", ctx.task.compass_enabled ? "a compass cue toward your destination, " : ""},
                   {"stage_instructions", strip_trailing_newline(prompt_file(stage_file))}});
  p.system = std::string(strip_trailing_newline(p.system));

  std::string& u = p.user;
  u += sections::kMemory;
  u += '\n';
  u += memory.text.empty() ? std::string("(no memories yet)") : memory.text;
  u += "\n\n";
  u += sections::kSensory;
  u += " (step " + std::to_string(step_index) + ")\n";
  u += sections::kView;
  u += '\n' + frame.view_text + '\n';
  u += sections::kRays;
  u += '\n' + render_rays(frame.rays);
  u += sections::kDiscovery;
  u += '\n' + frame.discovery_text;
  if (u.back() != '\n') u += '\n';
  if (frame.compass_text) {
    u += sections::kCompass;
    u += '\n' + *frame.compass_text + '\n';
  }
  if (frame.collision_warning) {
    u += sections::kWarnings;
    u += '\n' + *frame.collision_warning + '\n';
  }
  if (!frame.notes.empty()) {
    u += sections::kNotes;
    u += '\n';
    for (const auto& n : frame.notes) u += "- " + n + '\n';
  }
  if (stage != Stage::observe) {
    u += '\n';
    u += sections::kObservation;
    u += '\n' + std::string(prior.observation) + '\n';
  }
  if (stage == Stage::decide) {
    u += '\n';
    u += sections::kPlan;
    u += '\n' + std::string(prior.plan) + '\n';
    u += '\n';
    u += sections::kFormat;
    u += '\n' + std::string(action_grammar_text()) + '\n';
    if (!prior.correction.empty()) {
      u += '\n';
      u += sections::kCorrection;
      u += '\n' + std::string(prior.correction) + '\n';
    }
  }
  return p;
}

std::string run_stage(Backend& backend, Stage stage, const Prompt& prompt, double temperature,
                      std::optional<std::int64_t> seed, int max_tokens) {
  CompletionRequest req{prompt.system, prompt.user, temperature, seed, max_tokens};
  try {
    req.validate();
    return std::string(trim(backend.complete(req)));
  } catch (const Error& e) {
    throw StageError(std::string(to_string(stage)), e.what());
  } catch (const std::exception& e) {
    throw StageError(std::string(to_string(stage)), e.what());
  }
}

std::string first_sentence(std::string_view text) {
  std::string flat(trim(text));
  for (auto& c : flat)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const char c = flat[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == flat.size() || flat[i + 1] == ' '))
      return flat.substr(0, i + 1);
  }
  return flat;
}

MemoryStream update_memory(const MemoryStream& memory, int step_index, const Action& action,
                           std::string_view observation, std::string_view /*plan*/) {
  const std::string_view header = MemoryStream::kElidedHeader;
  std::vector<std::string> lines;
  bool elided = false;
  {
    std::size_t pos = 0;
    const std::string& t = memory.text;
    while (!t.empty() && pos <= t.size()) {
      std::size_t nl = t.find('\n', pos);
      if (nl == std::string::npos) nl = t.size();
      std::string line = t.substr(pos, nl - pos);
      if (lines.empty() && !elided && line == header)
        elided = true;
      else
        lines.push_back(std::move(line));
      pos = nl + 1;
    }
  }

  std::string entry = "step " + std::to_string(step_index) + ": " + action_phrase(action) +
                      "; noted: " + first_sentence(observation);
  const std::size_t room = memory.budget > header.size() + 1 ? memory.budget - header.size() - 1 : 0;
  if (entry.size() > room) entry = std::string(utf8_prefix(entry, room));
  lines.push_back(std::move(entry));

  auto total = [&] {
    std::size_t n = elided ? header.size() : 0;
    for (std::size_t i = 0; i < lines.size(); ++i) n += lines[i].size() + ((elided || i > 0) ? 1 : 0);
    return n;
  };
  std::size_t drop = 0;
  if (total() > memory.budget) {
    elided = true;
    // Evict oldest lines, never the newest.
    std::size_t n = total();
    while (n > memory.budget && drop + 1 < lines.size()) {
      n -= lines[drop].size() + 1;
      ++drop;
    }
  }
  MemoryStream out{std::string(), memory.budget};
  if (elided) out.text = std::string(header);
  for (std::size_t i = drop; i < lines.size(); ++i) {
    if (!out.text.empty()) out.text += '\n';
    out.text += lines[i];
  }
  return out;
}

TaskSpec train_station_task() {
  const auto j = nlohmann::json::parse(resources::get("tasks/train_station.json"));
  TaskSpec t;
  t.objective = j.at("objective").get<std::string>();
  t.subtasks = j.at("subtasks").get<std::vector<std::string>>();
  t.step_limit = j.at("step_limit").get<int>();
  t.compass_enabled = j.at("compass_enabled").get<bool>();
  t.goal_id = j.at("goal_id").get<std::string>();
  return t;
}

std::string subtask_objective(std::string_view subtask) {
  return std::string(strip_trailing_newline(fill(prompt_file("subtask_objective.txt"), {{"subtask", subtask}})));
}

std::string decide_correction(std::string_view error) {
  return std::string(strip_trailing_newline(fill(prompt_file("decide_correction.txt"), {{"error", error}})));
}

}  // namespace ta
