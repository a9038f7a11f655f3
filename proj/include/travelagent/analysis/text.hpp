#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "travelagent/sim.hpp"

namespace ta::analysis {

enum class Stream : std::uint8_t { observation, plan, memory };

inline constexpr std::array<Stream, 3> kStreams = {Stream::observation, Stream::plan, Stream::memory};

std::string_view to_string(Stream s);

/// One text of one step of one simulation.
struct Document {
  std::string text;
  Stream stream = Stream::observation;
  std::string label;   // scenario label
  std::string sim_id;
  int step_index = 0;
};

using Corpus = std::vector<Document>;

/// Collects the requested streams of every step, in trace order.
Corpus build_corpus(const std::vector<SimulationResult>& results,
                    const std::set<Stream>& streams = {Stream::observation, Stream::plan, Stream::memory});

/// The embedded 127-word stopword list.
const std::set<std::string, std::less<>>& stopwords();

/// Strips one trailing "ing", "ed" or "s" (checked in that order) when at least
/// three characters remain; "s" is kept after "ss".
std::string stem(std::string_view token);

/// Lowercases, splits on non-alphanumeric ASCII, drops tokens shorter than two
/// characters and stopwords, then stems.
std::vector<std::string> tokenize(std::string_view text);

struct TfidfResult {
  std::map<std::string, double> idf;
  std::vector<std::map<std::string, double>> scores;  // per document
};

/// tf = raw count, idf = ln((1 + D) / (1 + df)) + 1, score = tf * idf.
TfidfResult tfidf(const std::vector<std::vector<std::string>>& documents);

struct TermScore {
  std::string term;
  double score = 0.0;
  friend bool operator==(const TermScore&, const TermScore&) = default;
};

/// Highest group scores (sum over the group's documents) first; ties broken
/// lexicographically. Every document is scored against the whole corpus.
std::map<std::string, std::vector<TermScore>> top_terms(const Corpus& corpus, std::size_t n,
                                                        const std::function<std::string(const Document&)>& group_of);

/// Groups by scenario label.
std::map<std::string, std::vector<TermScore>> top_terms_by_scenario(const Corpus& corpus, std::size_t n);

/// Token totals per stream.
std::map<Stream, std::size_t> word_counts(const Corpus& corpus);

}  // namespace ta::analysis
