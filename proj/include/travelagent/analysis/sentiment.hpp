#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "travelagent/geometry.hpp"
#include "travelagent/sim.hpp"

namespace ta::analysis {

enum class SentimentClass : std::uint8_t { positive, neutral, negative };

std::string_view to_string(SentimentClass c);

struct SentimentLabel {
  double compound = 0.0;
  SentimentClass cls = SentimentClass::neutral;
};

inline constexpr double kNegationScale = -0.74;
inline constexpr double kBoosterIncrement = 0.293;
inline constexpr double kNormalizationAlpha = 15.0;
inline constexpr double kClassThreshold = 0.05;
inline constexpr int kNegatorWindow = 3;
inline constexpr int kBoosterWindow = 2;

/// Version of the bundled lexicon files.
std::string_view lexicon_version();

struct Lexicon {
  std::map<std::string, double, std::less<>> valence;
  std::set<std::string, std::less<>> negators;
  std::map<std::string, int, std::less<>> boosters;  // +1 intensify, -1 dampen
};

const Lexicon& default_lexicon();

/// Lowercases, splits on whitespace and strips punctuation except apostrophes
/// between letters.
std::vector<std::string> sentiment_tokens(std::string_view text);

/// A token as seen by the scoring rule.
struct ScoredToken {
  double valence = 0.0;  // 0 when not in the lexicon
  bool negator = false;
  int booster = 0;       // +1, -1 or 0
};

std::vector<ScoredToken> score_tokens(std::string_view text, const Lexicon& lexicon = default_lexicon());

/// Sum of adjusted valences of lexicon hits.
double valence_sum(std::span<const ScoredToken> tokens);

/// s / sqrt(s^2 + 15).
double normalize_compound(double s);

SentimentClass classify(double compound);

double compound(std::span<const ScoredToken> tokens);

SentimentLabel sentiment(std::string_view text, const Lexicon& lexicon = default_lexicon());

struct SentimentPoint {
  int step_index = 0;
  Vec2 position;          // decision point (pose before the action)
  SentimentLabel label;
  bool search = false;
  bool finish = false;    // subtask boundary
};

struct SentimentPath {
  std::string sim_id;
  std::string label;
  std::vector<SentimentPoint> points;
};

/// Sentiment of each step's observation followed by its plan.
std::vector<SentimentPath> sentiment_paths(const std::vector<SimulationResult>& results);

}  // namespace ta::analysis
