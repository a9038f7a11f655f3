#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "travelagent/analysis/paths.hpp"
#include "travelagent/analysis/sentiment.hpp"
#include "travelagent/analysis/text.hpp"
#include "travelagent/analysis/topics.hpp"
#include "travelagent/scene.hpp"
#include "travelagent/sim.hpp"

namespace ta::analysis {

/// Dot colors of path figures.
inline constexpr std::string_view kPositiveColor = "#4878CF";
inline constexpr std::string_view kNeutralColor = "#AAAAAA";
inline constexpr std::string_view kNegativeColor = "#F2B5C4";
inline constexpr std::string_view kFinishColor = "#FF0000";

std::string_view sentiment_color(SentimentClass c);

/// Path polyline over the scene with one dot per decision point. Finish steps
/// are red; other dots are colored by sentiment; search dots get a black ring.
/// `scene` may be null, in which case the view is fitted to the path.
std::string render_path_svg(const PathData& path, const SentimentPath& sentiment, const Scene* scene);

/// One rect per occupied cell carrying data-count, data-success and
/// data-failure attributes.
std::string render_heatmap_svg(const DecisionPointGrid& grid, const std::string& label, const Scene* scene);

struct ReportOptions {
  std::size_t top_n = 200;
  double cell_size = kDefaultGridCell;
  bool turns_only = false;
  bool topics = true;
  LdaOptions lda;
  std::set<Stream> topic_streams{Stream::observation, Stream::plan};
};

/// Scenes referenced by traces, loaded once each. Unloadable references map
/// to null.
class SceneCache {
 public:
  const Scene* get(const std::string& ref);

 private:
  std::map<std::string, std::unique_ptr<Scene>> scenes_;
};

/// Each writer returns the paths it created, sorted.
std::vector<std::filesystem::path> write_path_figures(const std::vector<SimulationResult>& results,
                                                      const std::filesystem::path& out_dir,
                                                      const ReportOptions& options, SceneCache& scenes);
std::vector<std::filesystem::path> write_terms(const std::vector<SimulationResult>& results,
                                               const std::filesystem::path& out_dir, const ReportOptions& options);
/// Throws ValidationError when the corpus is too small for the topic count.
std::vector<std::filesystem::path> write_topics(const std::vector<SimulationResult>& results,
                                                const std::filesystem::path& out_dir, const ReportOptions& options);
std::vector<std::filesystem::path> write_sentiment(const std::vector<SimulationResult>& results,
                                                   const std::filesystem::path& out_dir);

/// Summary document with completion rates per label and corpus statistics.
nlohmann::json report_summary(const std::vector<SimulationResult>& results);

/// Full bundle: summary, top terms, topics, per-simulation path SVGs and
/// per-scenario heat maps.
std::vector<std::filesystem::path> report(const std::vector<SimulationResult>& results,
                                          const std::filesystem::path& out_dir, const ReportOptions& options = {});

/// RFC-4180 quoting of one field.
std::string csv_escape(std::string_view field);

}  // namespace ta::analysis
