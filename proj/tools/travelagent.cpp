// travelagent: command-line entry point for scenes, simulations, matrices and
// analyses.
//
// Exit codes: 0 success, 1 domain validation failure, 2 usage or configuration
// error, 3 simulation did not complete.

#include <glob.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "travelagent/analysis/report.hpp"
#include "travelagent/error.hpp"
#include "travelagent/resources.hpp"
#include "travelagent/scene.hpp"
#include "travelagent/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIncomplete = 3;

/// Reads a JSON document from a path, or from a bundled resource when `ref`
/// names one (for example "train_station" under matrices/).
json load_document(const std::string& ref, const std::string& bundled_dir) {
  if (fs::exists(ref)) {
    std::ifstream in(ref);
    if (!in) throw ta::ConfigError("cannot open '" + ref + "'");
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw ta::ConfigError(ref + ": " + e.what());
    }
  }
  const std::string name = bundled_dir + "/" + ref + ".json";
  if (ta::resources::contains(name)) return json::parse(ta::resources::get(name));
  throw ta::ConfigError("no such file or bundled document: '" + ref + "'");
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  ::globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

fs::path trace_path(const fs::path& dir, const ta::SimulationResult& r) {
  return dir / (r.sim_id + std::string(ta::kTraceExtension));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw ta::Error("failed writing '" + path.string() + "'");
}

int cmd_scene_validate(const std::string& file) {
  const bool bundled = !fs::exists(file) && file.find_first_of("/.") == std::string::npos &&
                       ta::resources::contains("scenes/" + file + ".json");
  if (!bundled && !fs::exists(file)) {
    std::cerr << "error: cannot read '" << file << "'\n";
    return kExitUsage;
  }
  try {
    const ta::Scene scene = bundled ? ta::load_scene(file) : ta::load_scene_file(file);
    std::cout << "ok: " << scene.name << " (" << scene.objects.size() << " objects, " << scene.walkable.size()
              << " walkable polygons, " << scene.goals.size() << " goals, " << scene.spawns.size() << " spawns)\n";
    return kExitOk;
  } catch (const ta::SchemaError& e) {
    std::cerr << "invalid: schema error at " << e.what() << "\n";
  } catch (const ta::ValidationError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
  } catch (const ta::Error& e) {
    std::cerr << "invalid: " << e.what() << "\n";
  }
  return kExitInvalid;
}

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> out;
};

void override_backend(ta::BackendConfig& cfg, const std::string& kind) {
  cfg.kind = ta::parse_backend_kind(kind);
  if (cfg.kind == ta::BackendKind::scripted && cfg.script.is_null())
    throw ta::ConfigError("--backend scripted needs a script in the config");
  if (cfg.kind == ta::BackendKind::http && cfg.http.endpoint.empty())
    throw ta::ConfigError("--backend http needs an endpoint in the config");
}

int cmd_run(const RunOptions& o) {
  ta::RunConfig cfg;
  try {
    cfg = ta::parse_run_config(load_document(o.config, "configs"));
    if (o.seed) cfg.spec.rng_seed = *o.seed;
    if (o.backend) override_backend(cfg.spec.backend, *o.backend);
    if (o.out) cfg.out = *o.out;
  } catch (const ta::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  ta::SimulationResult result;
  try {
    result = ta::run(cfg.spec);
  } catch (const ta::ValidationError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ta::SchemaError& e) {
    std::cerr << "invalid scene: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ta::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  const fs::path path = trace_path(cfg.out, result);
  ta::write_trace(result, path);
  std::cout << "status=" << ta::to_string(result.status) << " steps=" << result.steps.size() << "\n";
  std::cout << "trace=" << path.string() << "\n";
  if (result.error) std::cerr << "backend error: " << *result.error << "\n";
  return ta::is_completed(result.status) ? kExitOk : kExitIncomplete;
}

struct BatchOptions {
  std::string matrix;
  int parallel = 1;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
};

int cmd_batch(const BatchOptions& o) {
  std::vector<ta::ScenarioSpec> specs;
  try {
    ta::MatrixConfig m = ta::parse_matrix_config(load_document(o.matrix, "matrices"));
    if (o.seed) m.base_seed = *o.seed;
    if (o.backend) override_backend(m.backend, *o.backend);
    specs = ta::expand_matrix(m);
  } catch (const ta::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (o.parallel < 1) {
    std::cerr << "config error: --parallel must be positive\n";
    return kExitUsage;
  }
  const fs::path out(o.out);
  const fs::path traces = out / "traces";
  fs::create_directories(traces);
  const ta::MatrixResult mr = ta::run_matrix(specs, o.parallel);
  for (const auto& r : mr.results) ta::write_trace(r, trace_path(traces, r));
  write_text(out / "summary.json", ta::summary_to_json(mr.summary, mr.results).dump(2) + "\n");
  write_text(out / "summary.csv", ta::summary_csv(mr.results));
  char rate[16];
  std::snprintf(rate, sizeof rate, "%.2f", mr.summary.completion_rate);
  std::cout << "runs=" << mr.summary.total << " completed=" << mr.summary.completed << " completion_rate=" << rate
            << " total_steps=" << mr.summary.total_steps << "\n";
  return mr.results.size() == specs.size() ? kExitOk : kExitInvalid;
}

struct AnalyzeOptions {
  std::string kind;
  std::vector<std::string> traces;
  std::string out = "analysis";
  std::string group_by = "scenario";
  std::size_t top = 200;
  double cell_size = ta::analysis::kDefaultGridCell;
  bool turns_only = false;
  std::uint64_t seed = 0;
  int iterations = 1000;
  int topics = 5;
  std::vector<std::string> topic_streams{"observation", "plan"};
};

int cmd_analyze(const AnalyzeOptions& o) {
  std::vector<std::string> files;
  for (const auto& pattern : o.traces) {
    auto found = expand_glob(pattern);
    if (found.empty() && fs::exists(pattern)) found.push_back(pattern);
    files.insert(files.end(), found.begin(), found.end());
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  if (files.empty()) {
    std::cerr << "error: no trace files match\n";
    return kExitUsage;
  }
  std::vector<ta::SimulationResult> results;
  for (const auto& f : files) {
    try {
      results.push_back(ta::read_trace(f));
    } catch (const ta::TraceError& e) {
      std::cerr << "invalid trace " << f << ": " << e.what() << "\n";
      return kExitInvalid;
    }
  }
  if (o.group_by != "scenario") {
    for (auto& r : results) r.label = "all";
  }

  ta::analysis::ReportOptions ro;
  ro.top_n = o.top;
  ro.cell_size = o.cell_size;
  ro.turns_only = o.turns_only;
  ro.lda.seed = o.seed;
  ro.lda.iterations = o.iterations;
  ro.lda.topics = o.topics;
  ro.topic_streams.clear();
  for (const auto& name : o.topic_streams)
    for (ta::analysis::Stream s : ta::analysis::kStreams)
      if (ta::analysis::to_string(s) == name) ro.topic_streams.insert(s);
  const fs::path out(o.out);
  std::vector<fs::path> written;
  try {
    if (o.kind == "paths") {
      ta::analysis::SceneCache scenes;
      written = ta::analysis::write_path_figures(results, out, ro, scenes);
    } else if (o.kind == "terms") {
      written = ta::analysis::write_terms(results, out, ro);
    } else if (o.kind == "topics") {
      written = ta::analysis::write_topics(results, out, ro);
    } else if (o.kind == "sentiment") {
      written = ta::analysis::write_sentiment(results, out);
    } else {
      written = ta::analysis::report(results, out, ro);
    }
  } catch (const ta::ValidationError& e) {
    std::cerr << "cannot analyze: " << e.what() << "\n";
    return kExitInvalid;
  }
  std::cout << "traces=" << results.size() << " files=" << written.size() << " out=" << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TravelAgent: generative-agent pedestrian wayfinding simulations"};
  app.require_subcommand(1);
  int code = kExitOk;

  auto* scene = app.add_subcommand("scene", "Scene document tools");
  scene->require_subcommand(1);
  std::string scene_file;
  auto* validate = scene->add_subcommand("validate", "Validate a scene document");
  validate->add_option("file", scene_file, "Scene file or bundled fixture id")->required();
  validate->callback([&] { code = cmd_scene_validate(scene_file); });

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one simulation and write its trace");
  run->add_option("--config", run_opts.config, "Run config file or bundled config id")->required();
  run->add_option("--seed", run_opts.seed, "Override the run seed");
  run->add_option("--backend", run_opts.backend, "Override the backend kind")
      ->check(CLI::IsMember({"scripted", "heuristic", "http"}));
  run->add_option("--out", run_opts.out, "Output directory for the trace");
  run->callback([&] { code = cmd_run(run_opts); });

  BatchOptions batch_opts;
  auto* batch = app.add_subcommand("batch", "Run a scenario x persona matrix");
  batch->add_option("--matrix", batch_opts.matrix, "Matrix file or bundled matrix id")->required();
  batch->add_option("--parallel", batch_opts.parallel, "Concurrent simulations")->default_val(1);
  batch->add_option("--out", batch_opts.out, "Output directory")->default_val("out");
  batch->add_option("--seed", batch_opts.seed, "Override the base seed");
  batch->add_option("--backend", batch_opts.backend, "Override the backend kind")
      ->check(CLI::IsMember({"scripted", "heuristic", "http"}));
  batch->callback([&] { code = cmd_batch(batch_opts); });

  AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Analyze trace files");
  analyze->add_option("kind", an.kind, "paths, terms, topics, sentiment or report")
      ->required()
      ->check(CLI::IsMember({"paths", "terms", "topics", "sentiment", "report"}));
  analyze->add_option("--traces", an.traces, "Trace file glob (repeatable)")->required();
  analyze->add_option("--out", an.out, "Output directory")->default_val("analysis");
  analyze->add_option("--group-by", an.group_by, "Grouping of terms and grids")
      ->check(CLI::IsMember({"scenario", "none"}))
      ->default_val("scenario");
  analyze->add_option("--top", an.top, "Top terms per group")->default_val(200);
  analyze->add_option("--cell-size", an.cell_size, "Decision-point grid cell size in meters")->default_val(2.0);
  analyze->add_flag("--turns-only", an.turns_only, "Count only turn and search steps as decision points");
  analyze->add_option("--seed", an.seed, "Topic model seed")->default_val(0);
  analyze->add_option("--iterations", an.iterations, "Gibbs sweeps")->default_val(1000);
  analyze->add_option("--topics", an.topics, "Topic count")->default_val(5);
  analyze->add_option("--topic-streams", an.topic_streams, "Streams pooled into the topic corpus")
      ->delimiter(',')
      ->check(CLI::IsMember({"observation", "plan", "memory"}))
      ->default_str("observation,plan");
  analyze->callback([&] { code = cmd_analyze(an); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const ta::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return code;
}
