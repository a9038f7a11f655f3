#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "travelagent/analysis/text.hpp"

namespace ta::analysis {

struct LdaOptions {
  int topics = 5;
  double alpha = 0.1;
  double beta = 0.01;
  int iterations = 1000;
  std::uint64_t seed = 0;

  friend bool operator==(const LdaOptions&, const LdaOptions&) = default;
};

struct TopicModel {
  int topics = 0;
  std::vector<std::string> vocabulary;      // sorted
  std::vector<std::vector<double>> phi;     // topics x vocabulary
  std::vector<std::vector<double>> theta;   // documents x topics
  LdaOptions options;

  friend bool operator==(const TopicModel&, const TopicModel&) = default;
};

/// Collapsed Gibbs sampling over tokenized documents. Deterministic given the
/// document order and seed. Throws ValidationError when there are fewer
/// documents or distinct terms than topics.
TopicModel lda_fit(const std::vector<std::vector<std::string>>& documents, const LdaOptions& options = {});

/// Tokenizes every document of the corpus and fits.
TopicModel lda_fit(const Corpus& corpus, const LdaOptions& options = {});

/// Indices of the `n` highest-probability terms of a topic; ties go to the
/// lexicographically smaller term.
std::vector<std::size_t> top_topic_terms(const TopicModel& model, int topic, std::size_t n);

/// Highest-probability topic per document; ties go to the lower index.
std::vector<int> dominant_topics(const TopicModel& model);

/// Fraction of items whose cluster's majority truth label equals their own.
double purity(const std::vector<int>& predicted, const std::vector<int>& truth);

struct SeedCategory {
  std::string label;
  std::vector<std::string> terms;  // tokenized through the corpus tokenizer
};

struct SeedLists {
  std::vector<SeedCategory> categories;
  std::string fallback;
};

/// The bundled five-category seed lists.
const SeedLists& default_seed_lists();

inline constexpr std::size_t kLabelTopTerms = 20;

struct TopicLabels {
  std::vector<std::string> labels;      // one per topic
  std::vector<std::size_t> overlaps;    // seed-term hits behind each label
  std::vector<std::string> duplicates;  // labels assigned to more than one topic
};

/// Labels each topic by the largest overlap between its top-20 terms and the
/// seed lists; ties follow list order; zero overlap falls back.
TopicLabels assign_topic_labels(const TopicModel& model, const SeedLists& seeds = default_seed_lists());

}  // namespace ta::analysis
