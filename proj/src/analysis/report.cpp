#include "travelagent/analysis/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "travelagent/error.hpp"

namespace ta::analysis {

namespace {

constexpr double kPixelsPerMeter = 3.0;
constexpr double kMargin = 20.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out.empty() ? "unnamed" : out;
}

/// World-to-pixel transform with north up.
struct Viewport {
  Box box;
  double width() const { return (box.max.x - box.min.x) * kPixelsPerMeter + 2 * kMargin; }
  double height() const { return (box.max.y - box.min.y) * kPixelsPerMeter + 2 * kMargin; }
  double px(double x) const { return (x - box.min.x) * kPixelsPerMeter + kMargin; }
  double py(double y) const { return (box.max.y - y) * kPixelsPerMeter + kMargin; }
};

Box extend(Box b, Vec2 p) {
  b.min.x = std::min(b.min.x, p.x);
  b.min.y = std::min(b.min.y, p.y);
  b.max.x = std::max(b.max.x, p.x);
  b.max.y = std::max(b.max.y, p.y);
  return b;
}

std::string svg_open(const Viewport& v) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(v.width()) + "\" height=\"" + num(v.height()) + "\" viewBox=\"0 0 " + num(v.width()) + " " +
         num(v.height()) + "\">\n<rect x=\"0\" y=\"0\" width=\"" + num(v.width()) + "\" height=\"" +
         num(v.height()) + "\" fill=\"#FFFFFF\"/>\n";
}

std::string polygon_element(const Viewport& v, const Polygon& poly, std::string_view fill, std::string_view stroke) {
  std::string pts;
  for (const auto& p : poly) {
    if (!pts.empty()) pts += ' ';
    pts += num(v.px(p.x)) + "," + num(v.py(p.y));
  }
  return "<polygon points=\"" + pts + "\" fill=\"" + std::string(fill) + "\" stroke=\"" + std::string(stroke) +
         "\" stroke-width=\"0.5\"/>\n";
}

std::string scene_layer(const Viewport& v, const Scene& scene) {
  std::string out = "<g id=\"scene\">\n";
  for (const auto& w : scene.walkable) out += polygon_element(v, w, "#F2F2F2", "#CCCCCC");
  for (const auto& o : scene.objects) out += polygon_element(v, o.footprint, "#DDDDDD", "#BBBBBB");
  for (const auto& g : scene.goals) {
    std::string pts;
    for (const auto& p : g.polygon) {
      if (!pts.empty()) pts += ' ';
      pts += num(v.px(p.x)) + "," + num(v.py(p.y));
    }
    out += "<polygon points=\"" + pts +
           "\" fill=\"none\" stroke=\"#3A923A\" stroke-width=\"1\" stroke-dasharray=\"4 2\"/>\n";
  }
  return out + "</g>\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Viewport fit(const Scene* scene, const std::vector<Vec2>& points) {
  Box b;
  if (scene) {
    b = scene->bounds();
  } else if (!points.empty()) {
    b = Box{points.front(), points.front()};
  } else {
    b = Box{{0, 0}, {1, 1}};
  }
  for (const auto& p : points) b = extend(b, p);
  if (b.max.x - b.min.x < 1.0) b.max.x = b.min.x + 1.0;
  if (b.max.y - b.min.y < 1.0) b.max.y = b.min.y + 1.0;
  return Viewport{b};
}

}  // namespace

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string_view sentiment_color(SentimentClass c) {
  switch (c) {
    case SentimentClass::positive: return kPositiveColor;
    case SentimentClass::neutral: return kNeutralColor;
    case SentimentClass::negative: return kNegativeColor;
  }
  return kNeutralColor;
}

const Scene* SceneCache::get(const std::string& ref) {
  auto it = scenes_.find(ref);
  if (it == scenes_.end()) {
    std::unique_ptr<Scene> s;
    try {
      s = std::make_unique<Scene>(load_scene(ref));
    } catch (const std::exception&) {
      s.reset();
    }
    it = scenes_.emplace(ref, std::move(s)).first;
  }
  return it->second.get();
}

std::string render_path_svg(const PathData& path, const SentimentPath& sentiment, const Scene* scene) {
  std::vector<Vec2> pts;
  if (!path.decision_points.empty()) pts.push_back(path.start);
  pts.insert(pts.end(), path.polyline.begin(), path.polyline.end());
  const Viewport v = fit(scene, pts);

  std::string out = svg_open(v);
  out += "<title>" + xml_escape(path.sim_id) + " (" + xml_escape(path.label) + ")</title>\n";
  if (scene) out += scene_layer(v, *scene);
  if (!pts.empty()) {
    std::string line;
    for (const auto& p : pts) {
      if (!line.empty()) line += ' ';
      line += num(v.px(p.x)) + "," + num(v.py(p.y));
    }
    out += "<polyline id=\"path\" points=\"" + line + "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  }
  out += "<g id=\"decision-points\">\n";
  for (const auto& pt : sentiment.points) {
    const std::string cx = num(v.px(pt.position.x));
    const std::string cy = num(v.py(pt.position.y));
    if (pt.finish) {
      out += "<circle class=\"finish\" data-step=\"" + std::to_string(pt.step_index) + "\" cx=\"" + cx + "\" cy=\"" +
             cy + "\" r=\"4\" fill=\"" + std::string(kFinishColor) + "\"/>\n";
      continue;
    }
    out += "<circle class=\"" + std::string(to_string(pt.label.cls)) + (pt.search ? " search" : "") +
           "\" data-step=\"" + std::to_string(pt.step_index) + "\" cx=\"" + cx + "\" cy=\"" + cy +
           "\" r=\"3\" fill=\"" + std::string(sentiment_color(pt.label.cls)) + "\"" +
           (pt.search ? " stroke=\"#000000\" stroke-width=\"1\"" : "") + "/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string render_heatmap_svg(const DecisionPointGrid& grid, const std::string& label, const Scene* scene) {
  std::vector<Vec2> corners;
  for (const auto& [c, _] : grid.counts) {
    corners.push_back({static_cast<double>(c.i) * grid.cell_size, static_cast<double>(c.j) * grid.cell_size});
    corners.push_back(
        {static_cast<double>(c.i + 1) * grid.cell_size, static_cast<double>(c.j + 1) * grid.cell_size});
  }
  const Viewport v = fit(scene, corners);
  std::size_t peak = 0;
  for (const auto& [_, c] : grid.counts) peak = std::max(peak, c.total());

  std::string out = svg_open(v);
  out += "<title>Decision points: " + xml_escape(label) + " (" + std::to_string(grid.total()) + " steps)</title>\n";
  if (scene) out += scene_layer(v, *scene);
  out += "<g id=\"cells\" data-total=\"" + std::to_string(grid.total()) + "\">\n";
  const double side = grid.cell_size * kPixelsPerMeter;
  for (const auto& [c, counts] : grid.counts) {
    const double x0 = static_cast<double>(c.i) * grid.cell_size;
    const double y1 = static_cast<double>(c.j + 1) * grid.cell_size;
    const double t = peak ? static_cast<double>(counts.total()) / static_cast<double>(peak) : 0.0;
    // White to dark red ramp.
    const int g = static_cast<int>(std::lround(230.0 * (1.0 - t)));
    char color[8];
    std::snprintf(color, sizeof color, "#%02X%02X%02X", 200 + static_cast<int>(std::lround(55.0 * (1.0 - t))), g, g);
    out += "<rect x=\"" + num(v.px(x0)) + "\" y=\"" + num(v.py(y1)) + "\" width=\"" + num(side) + "\" height=\"" +
           num(side) + "\" fill=\"" + color + "\" fill-opacity=\"0.85\" data-count=\"" +
           std::to_string(counts.total()) + "\" data-success=\"" + std::to_string(counts.success) +
           "\" data-failure=\"" + std::to_string(counts.failure) + "\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::vector<std::filesystem::path> write_path_figures(const std::vector<SimulationResult>& results,
                                                      const std::filesystem::path& out_dir,
                                                      const ReportOptions& options, SceneCache& scenes) {
  std::vector<std::filesystem::path> written;
  const auto paths = extract_paths(results);
  const auto sentiments = sentiment_paths(results);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto file = out_dir / "paths" / (safe_name(paths[i].sim_id) + ".svg");
    write_text(file, render_path_svg(paths[i], sentiments[i], scenes.get(paths[i].scene)));
    written.push_back(file);
  }
  std::map<std::string, std::string> scene_of_label;
  for (const auto& p : paths) scene_of_label.emplace(p.label, p.scene);
  for (const auto& [label, grid] : aggregate_by_label(paths, options.cell_size, options.turns_only)) {
    const auto file = out_dir / "heatmaps" / (safe_name(label) + ".svg");
    write_text(file, render_heatmap_svg(grid, label, scenes.get(scene_of_label.at(label))));
    written.push_back(file);
  }
  std::string csv = "sim_id,label,step,x,y,action,outcome\r\n";
  for (const auto& p : paths)
    for (const auto& d : p.decision_points)
      csv += csv_escape(p.sim_id) + ',' + csv_escape(p.label) + ',' + std::to_string(d.step_index) + ',' +
             num(d.position.x) + ',' + num(d.position.y) + ',' + std::string(to_string(d.action)) + ',' +
             (p.success ? "success" : "failure") + "\r\n";
  write_text(out_dir / "decision_points.csv", csv);
  written.push_back(out_dir / "decision_points.csv");
  std::sort(written.begin(), written.end());
  return written;
}

std::vector<std::filesystem::path> write_terms(const std::vector<SimulationResult>& results,
                                               const std::filesystem::path& out_dir, const ReportOptions& options) {
  const Corpus corpus = build_corpus(results);
  std::string csv = "scenario,rank,term,score\r\n";
  for (const auto& [label, terms] : top_terms_by_scenario(corpus, options.top_n)) {
    for (std::size_t r = 0; r < terms.size(); ++r) {
      char score[32];
      std::snprintf(score, sizeof score, "%.6f", terms[r].score);
      csv += csv_escape(label) + ',' + std::to_string(r + 1) + ',' + csv_escape(terms[r].term) + ',' + score + "\r\n";
    }
  }
  write_text(out_dir / "top_terms.csv", csv);
  std::string wc = "stream,tokens\r\n";
  for (const auto& [stream, n] : word_counts(corpus)) wc += std::string(to_string(stream)) + ',' + std::to_string(n) + "\r\n";
  write_text(out_dir / "word_counts.csv", wc);
  return {out_dir / "top_terms.csv", out_dir / "word_counts.csv"};
}

std::vector<std::filesystem::path> write_topics(const std::vector<SimulationResult>& results,
                                                const std::filesystem::path& out_dir, const ReportOptions& options) {
  const Corpus corpus = build_corpus(results, options.topic_streams);
  const TopicModel model = lda_fit(corpus, options.lda);
  const TopicLabels labels = assign_topic_labels(model);
  const auto dominant = dominant_topics(model);

  std::vector<std::size_t> share(static_cast<std::size_t>(model.topics), 0);
  for (int k : dominant) ++share[static_cast<std::size_t>(k)];
  std::string csv = "topic,label,seed_overlap,document_share,top_terms\r\n";
  for (int k = 0; k < model.topics; ++k) {
    std::string terms;
    for (std::size_t i : top_topic_terms(model, k, kLabelTopTerms)) {
      if (!terms.empty()) terms += ' ';
      terms += model.vocabulary[i];
    }
    char frac[32];
    std::snprintf(frac, sizeof frac, "%.6f",
                  static_cast<double>(share[static_cast<std::size_t>(k)]) / static_cast<double>(dominant.size()));
    csv += std::to_string(k) + ',' + csv_escape(labels.labels[static_cast<std::size_t>(k)]) + ',' +
           std::to_string(labels.overlaps[static_cast<std::size_t>(k)]) + ',' + frac + ',' + csv_escape(terms) + "\r\n";
  }
  write_text(out_dir / "topics.csv", csv);

  std::map<std::string, std::vector<double>> mean;
  std::map<std::string, std::size_t> docs;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto& m = mean[corpus[d].label];
    m.resize(static_cast<std::size_t>(model.topics), 0.0);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += model.theta[d][k];
    ++docs[corpus[d].label];
  }
  std::string dist = "scenario,topic,label,mean_theta\r\n";
  for (const auto& [label, m] : mean) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      char v[32];
      std::snprintf(v, sizeof v, "%.6f", m[k] / static_cast<double>(docs[label]));
      dist += csv_escape(label) + ',' + std::to_string(k) + ',' + csv_escape(labels.labels[k]) + ',' + v + "\r\n";
    }
  }
  write_text(out_dir / "topic_distribution.csv", dist);
  return {out_dir / "topic_distribution.csv", out_dir / "topics.csv"};
}

std::vector<std::filesystem::path> write_sentiment(const std::vector<SimulationResult>& results,
                                                   const std::filesystem::path& out_dir) {
  std::string csv = "sim_id,label,step,x,y,compound,class,search,finish\r\n";
  for (const auto& p : sentiment_paths(results)) {
    for (const auto& pt : p.points) {
      char c[32];
      std::snprintf(c, sizeof c, "%.6f", pt.label.compound);
      csv += csv_escape(p.sim_id) + ',' + csv_escape(p.label) + ',' + std::to_string(pt.step_index) + ',' +
             num(pt.position.x) + ',' + num(pt.position.y) + ',' + c + ',' + std::string(to_string(pt.label.cls)) +
             ',' + (pt.search ? "1" : "0") + ',' + (pt.finish ? "1" : "0") + "\r\n";
    }
  }
  write_text(out_dir / "sentiment.csv", csv);
  return {out_dir / "sentiment.csv"};
}

nlohmann::json report_summary(const std::vector<SimulationResult>& results) {
  using nlohmann::json;
  const MatrixSummary m = summarize(results);
  json labels = json::array();
  for (const auto& [label, l] : m.by_label)
    labels.push_back({{"label", label},
                      {"runs", l.total},
                      {"completed", l.completed},
                      {"completion_rate", l.total ? static_cast<double>(l.completed) / static_cast<double>(l.total) : 0.0},
                      {"steps", l.steps},
                      {"by_status", l.by_status}});
  json counts = json::object();
  for (const auto& [stream, n] : word_counts(build_corpus(results))) counts[std::string(to_string(stream))] = n;
  std::size_t search_steps = 0;
  std::map<std::string, std::size_t> classes;
  for (const auto& p : sentiment_paths(results))
    for (const auto& pt : p.points) {
      search_steps += pt.search ? 1 : 0;
      ++classes[std::string(to_string(pt.label.cls))];
    }
  return {{"runs", m.total},
          {"completed", m.completed},
          {"completion_rate", m.completion_rate},
          {"total_steps", m.total_steps},
          {"search_steps", search_steps},
          {"labels", labels},
          {"word_counts", counts},
          {"sentiment_classes", classes},
          {"prompt_version", kPromptVersion},
          {"lexicon_version", lexicon_version()},
          {"reference_figures",
           {{"note", "figures reported for the original hosted-LLM study; shown for context only"},
            {"runs", 100},
            {"total_steps", 1898},
            {"completion_rate", 0.76},
            {"word_counts", {{"plan", 91340}, {"memory", 156663}, {"observation", 219742}}}}}};
}

std::vector<std::filesystem::path> report(const std::vector<SimulationResult>& results,
                                          const std::filesystem::path& out_dir, const ReportOptions& options) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  nlohmann::json summary = report_summary(results);
  if (!results.empty()) {
    SceneCache scenes;
    auto add = [&](std::vector<std::filesystem::path> v) { written.insert(written.end(), v.begin(), v.end()); };
    add(write_path_figures(results, out_dir, options, scenes));
    add(write_terms(results, out_dir, options));
    add(write_sentiment(results, out_dir));
    if (options.topics) {
      try {
        add(write_topics(results, out_dir, options));
      } catch (const ValidationError& e) {
        summary["topics_skipped"] = e.what();
      }
    }
  }
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  written.push_back(out_dir / "summary.json");
  std::sort(written.begin(), written.end());
  return written;
}

}  // namespace ta::analysis
