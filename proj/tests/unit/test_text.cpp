#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "travelagent/analysis/text.hpp"
#include "travelagent/resources.hpp"
#include "travelagent/sim.hpp"

using namespace ta;
using namespace ta::analysis;

namespace {

using testing::Docs;

void check_against_oracle(const Docs& docs) { CHECK(testing::tfidf_max_error(docs) <= 1e-12L); }

/// Observation and plan texts of heuristic runs, cut into corpora of at most
/// 50 documents.
std::vector<Docs> fixture_corpora() {
  static const std::vector<Docs> corpora = [] {
    std::vector<Docs> out;
    const MatrixConfig m = parse_matrix_config(nlohmann::json::parse(resources::get("matrices/train_station.json")));
    auto specs = expand_matrix(m);
    specs.resize(8);
    Docs current;
    for (const auto& spec : specs) {
      const SimulationResult r = run(spec);
      for (const Document& doc : build_corpus({r}, {Stream::observation, Stream::plan})) {
        current.push_back(tokenize(doc.text));
        if (current.size() == 50) {
          out.push_back(std::move(current));
          current.clear();
        }
      }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
  }();
  return corpora;
}

}  // namespace

TEST_CASE("tokenize: documented examples") {
  CHECK(tokenize("The agent moves forward") == std::vector<std::string>{"agent", "move", "forward"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Buildings' glass walls") == std::vector<std::string>{"building", "glass", "wall"});
  CHECK(tokenize("I walked, turning: a b c7 X") == std::vector<std::string>{"walk", "turn", "c7"});
}

TEST_CASE("stem applies at most one suffix and keeps three characters") {
  CHECK(stem("buildings") == "building");
  CHECK(stem("walked") == "walk");
  CHECK(stem("sing") == "sing");
  CHECK(stem("bed") == "bed");
  CHECK(stem("gas") == "gas");
  CHECK(stem("glass") == "glass");
  CHECK(stem("trees") == "tree");
}

TEST_CASE("stopword list has 127 entries") {
  CHECK(stopwords().size() == 127);
  CHECK(stopwords().contains("the"));
  CHECK(tokenize("the and of to").empty());
}

TEST_CASE("tokenize reaches a fixed point after stems stop changing") {
  // A second pass can strip a further suffix ("building" to "build"); the
  // output of any pass is stable once no token carries a strippable suffix.
  CHECK(tokenize("building") == std::vector<std::string>{"build"});
  Lcg64 rng(5);
  for (int k = 0; k < 500; ++k) {
    std::vector<std::string> toks = tokenize(testing::random_text(rng, 80));
    for (int pass = 0; pass < 4; ++pass) {
      std::string joined;
      for (const auto& t : toks) joined += t + " ";
      toks = tokenize(joined);
    }
    std::string joined;
    for (const auto& t : toks) joined += t + " ";
    CHECK(tokenize(joined) == toks);
  }
}

TEST_CASE("tfidf: hand-computed four-document table") {
  const Docs docs{{"apple", "apple", "banana"}, {"banana", "cherry"}, {"cherry", "cherry", "cherry"}, {"date"}};
  const TfidfResult r = tfidf(docs);
  const double idf1 = 1.916290731874155;   // ln(5/2) + 1
  const double idf2 = 1.5108256237659907;  // ln(5/3) + 1
  CHECK(std::abs(r.idf.at("apple") - idf1) <= 1e-12);
  CHECK(std::abs(r.idf.at("banana") - idf2) <= 1e-12);
  CHECK(std::abs(r.scores[0].at("apple") - 3.83258146374831) <= 1e-12);
  CHECK(std::abs(r.scores[0].at("banana") - 1.5108256237659907) <= 1e-12);
  CHECK(std::abs(r.scores[1].at("banana") - 1.5108256237659907) <= 1e-12);
  CHECK(std::abs(r.scores[1].at("cherry") - 1.5108256237659907) <= 1e-12);
  CHECK(std::abs(r.scores[2].at("cherry") - 4.532476871297972) <= 1e-12);
  CHECK(std::abs(r.scores[3].at("date") - 1.916290731874155) <= 1e-12);
  CHECK(r.scores[3].size() == 1);
}

TEST_CASE("tfidf: symmetry and idf monotonicity") {
  const TfidfResult same = tfidf({{"word"}, {"word"}});
  CHECK(same.scores[0].at("word") == same.scores[1].at("word"));
  const TfidfResult r = tfidf({{"common", "rare"}, {"common"}, {"common"}});
  CHECK(r.idf.at("rare") > r.idf.at("common"));
}

TEST_CASE("tfidf equals the brute-force definition on fixture corpora") {
  const auto corpora = fixture_corpora();
  REQUIRE(corpora.size() >= 2);
  for (const auto& docs : corpora) check_against_oracle(docs);
}

TEST_CASE("tfidf equals the brute-force definition on random corpora") {
  Lcg64 rng(12);
  static const std::vector<std::string> vocab{"gate", "sign", "street", "tree", "wall", "bench", "left", "right", "ahead", "lost"};
  for (int k = 0; k < 200; ++k) {
    Docs docs(1 + rng.below(50));
    for (auto& d : docs) {
      d.resize(rng.below(12));
      for (auto& t : d) t = vocab[rng.below(vocab.size())];
    }
    check_against_oracle(docs);
  }
}

TEST_CASE("top_terms: group sums, ranking and ties") {
  Corpus c{{"apple apple banana", Stream::observation, "g1", "s", 0},
           {"banana cherry", Stream::plan, "g1", "s", 1},
           {"cherry cherry cherry", Stream::observation, "g2", "s", 2},
           {"date", Stream::observation, "g2", "s", 3}};
  const auto top = top_terms_by_scenario(c, 200);
  REQUIRE(top.size() == 2);
  const auto& g1 = top.at("g1");
  REQUIRE(g1.size() == 3);
  CHECK(g1[0].term == "apple");
  CHECK(g1[1].term == "banana");
  CHECK(std::abs(g1[1].score - 2 * 1.5108256237659907) <= 1e-12);
  CHECK(g1[2].term == "cherry");
  const auto& g2 = top.at("g2");
  CHECK(g2[0].term == "cherry");
  CHECK(g2[1].term == "date");
  CHECK(top_terms_by_scenario(c, 1).at("g1").size() == 1);

  Corpus tie{{"zeta alpha", Stream::observation, "g", "s", 0}};
  const auto t = top_terms_by_scenario(tie, 10).at("g");
  CHECK(t[0].term == "alpha");
  CHECK(t[1].term == "zeta");
}

TEST_CASE("word_counts per stream") {
  const auto empty = word_counts({});
  for (Stream s : kStreams) CHECK(empty.at(s) == 0);
  const auto one = word_counts({{"station gate sign ticket train", Stream::plan, "x", "s", 0}});
  CHECK(one.at(Stream::plan) == 5);
  CHECK(one.at(Stream::observation) == 0);

  Lcg64 rng(31);
  Corpus c;
  std::map<Stream, std::size_t> want;
  for (int k = 0; k < 100; ++k) {
    const Stream s = kStreams[rng.below(3)];
    Document d{testing::random_text(rng, 60), s, "x", "s", k};
    want[s] += tokenize(d.text).size();
    c.push_back(d);
  }
  const auto got = word_counts(c);
  for (Stream s : kStreams) CHECK(got.at(s) == want[s]);
}

TEST_CASE("build_corpus keeps trace order and requested streams") {
  Lcg64 rng(3);
  const SimulationResult r = testing::random_result(rng);
  const Corpus all = build_corpus({r});
  CHECK(all.size() == 3 * r.steps.size());
  const Corpus plans = build_corpus({r}, {Stream::plan});
  REQUIRE(plans.size() == r.steps.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    CHECK(plans[i].text == r.steps[i].outputs.plan);
    CHECK(plans[i].step_index == r.steps[i].index);
    CHECK(plans[i].sim_id == r.sim_id);
  }
}
