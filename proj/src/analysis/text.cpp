#include "travelagent/analysis/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "travelagent/resources.hpp"

namespace ta::analysis {

std::string_view to_string(Stream s) {
  switch (s) {
    case Stream::observation: return "observation";
    case Stream::plan: return "plan";
    case Stream::memory: return "memory";
  }
  return "observation";
}

Corpus build_corpus(const std::vector<SimulationResult>& results, const std::set<Stream>& streams) {
  Corpus c;
  for (const auto& r : results) {
    for (const auto& s : r.steps) {
      for (Stream st : kStreams) {
        if (!streams.contains(st)) continue;
        const std::string& text =
            st == Stream::observation ? s.outputs.observation : st == Stream::plan ? s.outputs.plan : s.memory;
        c.push_back(Document{text, st, r.label, r.sim_id, s.index});
      }
    }
  }
  return c;
}

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = [] {
    std::set<std::string, std::less<>> out;
    const std::string_view text = resources::get("text/stopwords.txt");
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      out.emplace(line);
    }
    return out;
  }();
  return words;
}

std::string stem(std::string_view token) {
  auto strip = [&](std::string_view suffix) {
    return token.size() >= suffix.size() + 3 && token.substr(token.size() - suffix.size()) == suffix;
  };
  if (strip("ing")) return std::string(token.substr(0, token.size() - 3));
  if (strip("ed")) return std::string(token.substr(0, token.size() - 2));
  if (strip("s") && token[token.size() - 2] != 's') return std::string(token.substr(0, token.size() - 1));
  return std::string(token);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  const auto& stop = stopwords();
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && !stop.contains(cur)) out.push_back(stem(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c))
      cur += static_cast<char>(std::tolower(c));
    else
      flush();
  }
  flush();
  return out;
}

TfidfResult tfidf(const std::vector<std::vector<std::string>>& documents) {
  TfidfResult r;
  std::map<std::string, std::size_t> df;
  std::vector<std::map<std::string, double>> tf(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (const auto& t : documents[d]) tf[d][t] += 1.0;
    for (const auto& [t, _] : tf[d]) ++df[t];
  }
  const double D = static_cast<double>(documents.size());
  for (const auto& [t, n] : df) r.idf[t] = std::log((1.0 + D) / (1.0 + static_cast<double>(n))) + 1.0;
  r.scores.resize(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d)
    for (const auto& [t, count] : tf[d]) r.scores[d][t] = count * r.idf.at(t);
  return r;
}

std::map<std::string, std::vector<TermScore>> top_terms(const Corpus& corpus, std::size_t n,
                                                        const std::function<std::string(const Document&)>& group_of) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& d : corpus) docs.push_back(tokenize(d.text));
  const TfidfResult t = tfidf(docs);
  std::map<std::string, std::map<std::string, double>> sums;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& g = sums[group_of(corpus[i])];
    for (const auto& [term, s] : t.scores[i]) g[term] += s;
  }
  std::map<std::string, std::vector<TermScore>> out;
  for (auto& [group, scores] : sums) {
    std::vector<TermScore> v;
    v.reserve(scores.size());
    for (const auto& [term, s] : scores) v.push_back({term, s});
    std::stable_sort(v.begin(), v.end(), [](const TermScore& a, const TermScore& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.term < b.term;
    });
    if (v.size() > n) v.resize(n);
    out[group] = std::move(v);
  }
  return out;
}

std::map<std::string, std::vector<TermScore>> top_terms_by_scenario(const Corpus& corpus, std::size_t n) {
  return top_terms(corpus, n, [](const Document& d) { return d.label; });
}

std::map<Stream, std::size_t> word_counts(const Corpus& corpus) {
  std::map<Stream, std::size_t> out;
  for (Stream s : kStreams) out[s] = 0;
  for (const auto& d : corpus) out[d.stream] += tokenize(d.text).size();
  return out;
}

}  // namespace ta::analysis
