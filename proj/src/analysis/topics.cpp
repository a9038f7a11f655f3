#include "travelagent/analysis/topics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "travelagent/error.hpp"
#include "travelagent/resources.hpp"
#include "travelagent/rng.hpp"

namespace ta::analysis {

TopicModel lda_fit(const std::vector<std::vector<std::string>>& documents, const LdaOptions& options) {
  const int K = options.topics;
  if (K < 1) throw ValidationError("lda", "topic count must be positive");
  if (!(options.alpha > 0.0) || !(options.beta > 0.0)) throw ValidationError("lda", "alpha and beta must be positive");
  if (documents.size() < static_cast<std::size_t>(K))
    throw ValidationError("lda", "corpus has " + std::to_string(documents.size()) + " documents, fewer than " +
                                     std::to_string(K) + " topics");

  std::set<std::string> vocab_set;
  for (const auto& d : documents) vocab_set.insert(d.begin(), d.end());
  if (vocab_set.size() < static_cast<std::size_t>(K))
    throw ValidationError("lda", "vocabulary has " + std::to_string(vocab_set.size()) + " terms, fewer than " +
                                     std::to_string(K) + " topics");

  TopicModel m;
  m.topics = K;
  m.options = options;
  m.vocabulary.assign(vocab_set.begin(), vocab_set.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < m.vocabulary.size(); ++i) index[m.vocabulary[i]] = static_cast<int>(i);
  const std::size_t V = m.vocabulary.size();
  const std::size_t D = documents.size();
  const auto Ku = static_cast<std::size_t>(K);

  std::vector<std::vector<int>> words(D);
  std::vector<std::vector<int>> z(D);
  std::vector<int> n_dk(D * Ku, 0);
  std::vector<int> n_kw(Ku * V, 0);
  std::vector<int> n_k(Ku, 0);
  std::vector<int> n_d(D, 0);

  Lcg64 rng(options.seed);
  for (std::size_t d = 0; d < D; ++d) {
    for (const auto& t : documents[d]) {
      const int w = index.at(t);
      const int k = static_cast<int>(rng.below(Ku));
      words[d].push_back(w);
      z[d].push_back(k);
      ++n_dk[d * Ku + static_cast<std::size_t>(k)];
      ++n_kw[static_cast<std::size_t>(k) * V + static_cast<std::size_t>(w)];
      ++n_k[static_cast<std::size_t>(k)];
    }
    n_d[d] = static_cast<int>(words[d].size());
  }

  const double Vbeta = static_cast<double>(V) * options.beta;
  std::vector<double> p(Ku);
  for (int it = 0; it < options.iterations; ++it) {
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const auto w = static_cast<std::size_t>(words[d][i]);
        auto k = static_cast<std::size_t>(z[d][i]);
        --n_dk[d * Ku + k];
        --n_kw[k * V + w];
        --n_k[k];
        double total = 0.0;
        for (std::size_t j = 0; j < Ku; ++j) {
          total += (n_dk[d * Ku + j] + options.alpha) * (n_kw[j * V + w] + options.beta) / (n_k[j] + Vbeta);
          p[j] = total;
        }
        const double u = rng.uniform() * total;
        k = 0;
        while (k + 1 < Ku && p[k] <= u) ++k;
        z[d][i] = static_cast<int>(k);
        ++n_dk[d * Ku + k];
        ++n_kw[k * V + w];
        ++n_k[k];
      }
    }
  }

  m.phi.assign(Ku, std::vector<double>(V));
  for (std::size_t k = 0; k < Ku; ++k)
    for (std::size_t w = 0; w < V; ++w) m.phi[k][w] = (n_kw[k * V + w] + options.beta) / (n_k[k] + Vbeta);
  m.theta.assign(D, std::vector<double>(Ku));
  const double Kalpha = static_cast<double>(K) * options.alpha;
  for (std::size_t d = 0; d < D; ++d)
    for (std::size_t k = 0; k < Ku; ++k) m.theta[d][k] = (n_dk[d * Ku + k] + options.alpha) / (n_d[d] + Kalpha);
  return m;
}

TopicModel lda_fit(const Corpus& corpus, const LdaOptions& options) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& d : corpus) docs.push_back(tokenize(d.text));
  return lda_fit(docs, options);
}

std::vector<std::size_t> top_topic_terms(const TopicModel& model, int topic, std::size_t n) {
  const auto& row = model.phi.at(static_cast<std::size_t>(topic));
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // The vocabulary is sorted, so the index order is the lexicographic order.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  if (idx.size() > n) idx.resize(n);
  return idx;
}

std::vector<int> dominant_topics(const TopicModel& model) {
  std::vector<int> out;
  out.reserve(model.theta.size());
  for (const auto& row : model.theta)
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  return out;
}

double purity(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw Error("purity: size mismatch");
  if (predicted.empty()) return 0.0;
  std::map<int, std::map<int, std::size_t>> table;
  for (std::size_t i = 0; i < predicted.size(); ++i) ++table[predicted[i]][truth[i]];
  std::size_t hits = 0;
  for (const auto& [_, counts] : table) {
    std::size_t best = 0;
    for (const auto& [__, c] : counts) best = std::max(best, c);
    hits += best;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

const SeedLists& default_seed_lists() {
  static const SeedLists lists = [] {
    SeedLists s;
    const auto j = nlohmann::json::parse(resources::get("text/topic_seeds.json"));
    s.fallback = j.at("fallback").get<std::string>();
    for (const auto& c : j.at("categories")) {
      SeedCategory cat;
      cat.label = c.at("label").get<std::string>();
      std::set<std::string> seen;
      for (const auto& t : c.at("terms"))
        for (auto& tok : tokenize(t.get<std::string>()))
          if (seen.insert(tok).second) cat.terms.push_back(std::move(tok));
      s.categories.push_back(std::move(cat));
    }
    return s;
  }();
  return lists;
}

TopicLabels assign_topic_labels(const TopicModel& model, const SeedLists& seeds) {
  TopicLabels out;
  std::map<std::string, std::size_t> uses;
  for (int k = 0; k < model.topics; ++k) {
    std::set<std::string> top;
    for (std::size_t i : top_topic_terms(model, k, kLabelTopTerms)) top.insert(model.vocabulary[i]);
    std::size_t best = 0;
    std::string label = seeds.fallback;
    for (const auto& c : seeds.categories) {
      std::size_t hits = 0;
      for (const auto& t : c.terms) hits += top.contains(t) ? 1 : 0;
      if (hits > best) {
        best = hits;
        label = c.label;
      }
    }
    out.labels.push_back(label);
    out.overlaps.push_back(best);
    ++uses[label];
  }
  for (const auto& [label, n] : uses)
    if (n > 1) out.duplicates.push_back(label);
  return out;
}

}  // namespace ta::analysis
