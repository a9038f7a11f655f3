#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ta {

/// The three Chain-of-Thought stages run at every simulation step, in order.
enum class Stage : std::uint8_t { observe, plan, decide };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

/// Version of the bundled prompt template set; embedded in every prompt and trace.
inline constexpr std::string_view kPromptVersion = "travelagent-prompts/1";

/// First line of every system prompt. Backends key their behavior on it.
std::string stage_header(Stage stage, int step_index);

struct StageTag {
  Stage stage;
  int step_index;
};

/// Recovers the stage tag from a system prompt, if present.
std::optional<StageTag> find_stage_tag(std::string_view system_text);

}  // namespace ta
