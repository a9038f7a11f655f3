#include "travelagent/analysis/sentiment.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "travelagent/resources.hpp"

namespace ta::analysis {

namespace {

constexpr std::string_view kLexiconVersion = "vader-3.3.2-subset/1";

template <typename F>
void for_each_data_line(std::string_view text, F&& f) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    f(line);
  }
}

std::pair<std::string_view, std::string_view> split_tab(std::string_view line) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) throw std::runtime_error("lexicon line without a tab: " + std::string(line));
  return {line.substr(0, tab), line.substr(tab + 1)};
}

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view to_string(SentimentClass c) {
  switch (c) {
    case SentimentClass::positive: return "positive";
    case SentimentClass::neutral: return "neutral";
    case SentimentClass::negative: return "negative";
  }
  return "neutral";
}

std::string_view lexicon_version() { return kLexiconVersion; }

const Lexicon& default_lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    for_each_data_line(resources::get("lexicon/vader_subset.tsv"), [&](std::string_view line) {
      auto [tok, val] = split_tab(line);
      l.valence.emplace(std::string(tok), std::stod(std::string(val)));
    });
    for_each_data_line(resources::get("lexicon/negators.txt"), [&](std::string_view line) { l.negators.emplace(line); });
    for_each_data_line(resources::get("lexicon/boosters.tsv"), [&](std::string_view line) {
      auto [tok, dir] = split_tab(line);
      l.boosters.emplace(std::string(tok), std::stoi(std::string(dir)));
    });
    return l;
  }();
  return lex;
}

std::vector<std::string> sentiment_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) break;
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end;
    std::string tok;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const char c = raw[i];
      if (std::isalnum(static_cast<unsigned char>(c))) {
        tok += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else if (c == '\'' && i > 0 && i + 1 < raw.size() && is_letter(raw[i - 1]) && is_letter(raw[i + 1])) {
        tok += c;
      }
    }
    if (!tok.empty()) out.push_back(std::move(tok));
  }
  return out;
}

std::vector<ScoredToken> score_tokens(std::string_view text, const Lexicon& lexicon) {
  std::vector<ScoredToken> out;
  for (const auto& t : sentiment_tokens(text)) {
    ScoredToken s;
    if (auto it = lexicon.valence.find(t); it != lexicon.valence.end()) s.valence = it->second;
    s.negator = lexicon.negators.contains(t);
    if (auto it = lexicon.boosters.find(t); it != lexicon.boosters.end()) s.booster = it->second;
    out.push_back(s);
  }
  return out;
}

double valence_sum(std::span<const ScoredToken> tokens) {
  double s = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double v = tokens[i].valence;
    if (v == 0.0) continue;
    const double sign = v > 0 ? 1.0 : -1.0;
    for (std::size_t back = 1; back <= static_cast<std::size_t>(kBoosterWindow) && back <= i; ++back)
      v += sign * kBoosterIncrement * tokens[i - back].booster;
    bool negated = false;
    for (std::size_t back = 1; back <= static_cast<std::size_t>(kNegatorWindow) && back <= i; ++back)
      negated = negated || tokens[i - back].negator;
    if (negated) v *= kNegationScale;
    s += v;
  }
  return s;
}

double normalize_compound(double s) {
  if (s == 0.0) return 0.0;
  return s / std::sqrt(s * s + kNormalizationAlpha);
}

SentimentClass classify(double c) {
  if (c >= kClassThreshold) return SentimentClass::positive;
  if (c <= -kClassThreshold) return SentimentClass::negative;
  return SentimentClass::neutral;
}

double compound(std::span<const ScoredToken> tokens) { return normalize_compound(valence_sum(tokens)); }

SentimentLabel sentiment(std::string_view text, const Lexicon& lexicon) {
  const auto tokens = score_tokens(text, lexicon);
  const double c = compound(tokens);
  return {c, classify(c)};
}

std::vector<SentimentPath> sentiment_paths(const std::vector<SimulationResult>& results) {
  std::vector<SentimentPath> out;
  for (const auto& r : results) {
    SentimentPath p{r.sim_id, r.label, {}};
    for (const auto& s : r.steps) {
      SentimentPoint pt;
      pt.step_index = s.index;
      pt.position = s.pose_before.position;
      pt.label = sentiment(s.outputs.observation + " " + s.outputs.plan);
      pt.search = s.is_search();
      pt.finish = s.is_finish();
      p.points.push_back(pt);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ta::analysis
