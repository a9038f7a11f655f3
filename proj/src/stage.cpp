#include "travelagent/stage.hpp"

#include <regex>

namespace ta {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::observe: return "observe";
    case Stage::plan: return "plan";
    case Stage::decide: return "decide";
  }
  return "observe";
}

std::optional<Stage> parse_stage(std::string_view s) {
  if (s == "observe") return Stage::observe;
  if (s == "plan") return Stage::plan;
  if (s == "decide") return Stage::decide;
  return std::nullopt;
}

std::string stage_header(Stage stage, int step_index) {
  return "[TravelAgent " + std::string(kPromptVersion) + " | stage: " + std::string(to_string(stage)) +
         " | step: " + std::to_string(step_index) + "]";
}

std::optional<StageTag> find_stage_tag(std::string_view system_text) {
  static const std::regex re(R"(\| stage: (observe|plan|decide) \| step: (\d+)\])");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(system_text.begin(), system_text.end(), m, re)) return std::nullopt;
  return StageTag{*parse_stage(m[1].str()), std::stoi(m[2].str())};
}

}  // namespace ta
