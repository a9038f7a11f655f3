#include "travelagent/analysis/paths.hpp"

#include "travelagent/error.hpp"

namespace ta::analysis {

std::vector<PathData> extract_paths(const std::vector<SimulationResult>& results) {
  std::vector<PathData> out;
  out.reserve(results.size());
  for (const auto& r : results) {
    PathData p;
    p.sim_id = r.sim_id;
    p.label = r.label;
    p.scene = r.scene;
    p.scene_name = r.scene_name;
    p.success = is_completed(r.status);
    if (!r.steps.empty()) p.start = r.steps.front().pose_before.position;
    for (const auto& s : r.steps) {
      p.polyline.push_back(s.pose_after.position);
      p.decision_points.push_back({s.index, s.pose_before.position, s.outputs.action.kind});
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::size_t DecisionPointGrid::total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : counts) n += c.total();
  return n;
}

std::size_t DecisionPointGrid::total_success() const {
  std::size_t n = 0;
  for (const auto& [_, c] : counts) n += c.success;
  return n;
}

std::size_t DecisionPointGrid::total_failure() const {
  std::size_t n = 0;
  for (const auto& [_, c] : counts) n += c.failure;
  return n;
}

bool is_turn_like(ActionKind k) {
  return k == ActionKind::turn_left || k == ActionKind::turn_right || k == ActionKind::search;
}

DecisionPointGrid aggregate(const std::vector<PathData>& paths, double cell_size, bool turns_only) {
  if (!(cell_size > 0.0)) throw ValidationError("grid", "cell size must be positive");
  DecisionPointGrid g;
  g.cell_size = cell_size;
  for (const auto& p : paths) {
    if (g.scene_name.empty()) {
      g.scene_name = p.scene_name;
    } else if (p.scene_name != g.scene_name) {
      throw ValidationError(p.sim_id, "trace is from scene '" + p.scene_name + "' but the aggregate holds '" +
                                          g.scene_name + "'");
    }
    for (const auto& d : p.decision_points) {
      if (turns_only && !is_turn_like(d.action)) continue;
      auto& c = g.counts[cell_of({0.0, 0.0}, cell_size, d.position)];
      (p.success ? c.success : c.failure) += 1;
    }
  }
  return g;
}

std::map<std::string, DecisionPointGrid> aggregate_by_label(const std::vector<PathData>& paths, double cell_size,
                                                            bool turns_only) {
  std::map<std::string, std::vector<PathData>> groups;
  for (const auto& p : paths) groups[p.label].push_back(p);
  std::map<std::string, DecisionPointGrid> out;
  for (const auto& [label, ps] : groups) out[label] = aggregate(ps, cell_size, turns_only);
  return out;
}

}  // namespace ta::analysis
