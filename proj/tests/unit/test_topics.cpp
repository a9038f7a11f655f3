#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "travelagent/analysis/topics.hpp"
#include "travelagent/error.hpp"
#include "travelagent/rng.hpp"

using namespace ta;
using namespace ta::analysis;

namespace {

using testing::Docs;

void check_simplex(const TopicModel& m) {
  for (const auto& row : m.phi)
    for (double p : row) CHECK(p >= 0.0);
  for (const auto& row : m.theta)
    for (double p : row) CHECK(p >= 0.0);
  CHECK(testing::simplex_error(m) <= 1e-9);
}

}  // namespace

TEST_CASE("lda: two disjoint vocabularies separate cleanly") {
  const auto [docs, truth] = testing::two_vocabulary_corpus();
  LdaOptions o;
  o.topics = 2;
  o.seed = 1;
  const TopicModel m = lda_fit(docs, o);
  check_simplex(m);
  CHECK(m.phi.size() == 2);
  CHECK(m.theta.size() == docs.size());
  CHECK(m.vocabulary.size() == 40);
  CHECK(std::is_sorted(m.vocabulary.begin(), m.vocabulary.end()));
  const double p = purity(dominant_topics(m), truth);
  MESSAGE("two-vocabulary purity = " << p);
  CHECK(p >= 0.9);
}

TEST_CASE("lda: same seed gives a bit-identical model") {
  const Docs docs = testing::seeded_topic_corpus();
  LdaOptions o;
  o.iterations = 200;
  o.seed = 9;
  const TopicModel a = lda_fit(docs, o);
  const TopicModel b = lda_fit(docs, o);
  CHECK(a == b);
  check_simplex(a);
  o.seed = 10;
  CHECK_FALSE(lda_fit(docs, o) == a);
}

TEST_CASE("lda: the seeded five-category corpus recovers every label") {
  const TopicModel m = lda_fit(testing::seeded_topic_corpus(), LdaOptions{});
  check_simplex(m);
  const TopicLabels labels = assign_topic_labels(m);
  const std::set<std::string> got(labels.labels.begin(), labels.labels.end());
  CHECK(got == std::set<std::string>{"navigation", "visibility", "movement", "obstacles", "urban environment"});
  CHECK(labels.duplicates.empty());
}

TEST_CASE("lda: degenerate corpora are rejected") {
  CHECK_THROWS_AS(lda_fit(Docs{{"a", "b"}, {"c"}}, LdaOptions{}), ValidationError);
  CHECK_THROWS_AS(lda_fit(Docs(10, std::vector<std::string>{"same", "words"}), LdaOptions{}), ValidationError);
  CHECK_THROWS_AS(lda_fit(Corpus{}, LdaOptions{}), ValidationError);
}

TEST_CASE("topic labels: construction, fallback and duplicates") {
  // Twenty filler terms outrank the seed terms in the second topic.
  TopicModel m;
  m.topics = 2;
  m.vocabulary = {"barrier", "fence", "wall"};
  for (int i = 0; i < 20; ++i) m.vocabulary.push_back("zz" + std::to_string(10 + i));
  m.phi.assign(2, std::vector<double>(m.vocabulary.size(), 0.0));
  for (std::size_t i = 0; i < 3; ++i) m.phi[0][i] = 0.3;
  m.phi[0][3] = 0.1;
  for (std::size_t i = 3; i < m.vocabulary.size(); ++i) m.phi[1][i] = 0.05;
  const TopicLabels l = assign_topic_labels(m);
  CHECK(l.labels == std::vector<std::string>{"obstacles", "urban environment"});
  CHECK(l.overlaps == std::vector<std::size_t>{3, 0});
  CHECK(l.duplicates.empty());

  m.phi[1] = m.phi[0];
  CHECK(assign_topic_labels(m).duplicates == std::vector<std::string>{"obstacles"});

  // Ties follow list order: one navigation term and one movement term.
  m.topics = 1;
  m.vocabulary = {"station", "walk"};
  m.phi = {{0.5, 0.5}};
  CHECK(assign_topic_labels(m).labels[0] == "navigation");
}

TEST_CASE("top_topic_terms and dominant topics break ties predictably") {
  TopicModel m;
  m.topics = 2;
  m.vocabulary = {"a", "b", "c"};
  m.phi = {{0.25, 0.5, 0.25}, {0.4, 0.2, 0.4}};
  m.theta = {{0.5, 0.5}, {0.1, 0.9}};
  CHECK(top_topic_terms(m, 0, 3) == std::vector<std::size_t>{1, 0, 2});
  CHECK(top_topic_terms(m, 1, 2) == std::vector<std::size_t>{0, 2});
  CHECK(dominant_topics(m) == std::vector<int>{0, 1});
  CHECK(purity({0, 0, 1, 1}, {5, 5, 6, 5}) == doctest::Approx(0.75));
}

TEST_CASE("seed lists load five categories of about fifteen terms") {
  const SeedLists& s = default_seed_lists();
  REQUIRE(s.categories.size() == 5);
  CHECK(s.fallback == "urban environment");
  for (const auto& c : s.categories) {
    CHECK(c.terms.size() >= 12);
    CHECK(c.terms.size() <= 15);
  }
}
