#pragma once

#include <map>
#include <string>
#include <vector>

#include "travelagent/geometry.hpp"
#include "travelagent/sensors.hpp"
#include "travelagent/sim.hpp"

namespace ta::analysis {

struct DecisionPoint {
  int step_index = 0;
  Vec2 position;  // pose before the action
  ActionKind action = ActionKind::search;
};

struct PathData {
  std::string sim_id;
  std::string label;
  std::string scene;       // scene reference from the trace
  std::string scene_name;
  bool success = false;    // completed or completed_with_subtask
  Vec2 start;              // pose before the first step
  std::vector<Vec2> polyline;  // pose after each step
  std::vector<DecisionPoint> decision_points;
};

std::vector<PathData> extract_paths(const std::vector<SimulationResult>& results);

inline constexpr double kDefaultGridCell = 2.0;

struct CellCounts {
  std::size_t success = 0;
  std::size_t failure = 0;
  std::size_t total() const { return success + failure; }
  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

struct DecisionPointGrid {
  std::string scene_name;
  double cell_size = kDefaultGridCell;
  std::map<Cell, CellCounts> counts;  // cells anchored at the world origin

  std::size_t total() const;
  std::size_t total_success() const;
  std::size_t total_failure() const;
};

/// Turn and search steps only.
bool is_turn_like(ActionKind k);

/// Histograms decision points. All paths must come from the same scene
/// (ValidationError otherwise). With `turns_only`, move and finish steps are
/// skipped.
DecisionPointGrid aggregate(const std::vector<PathData>& paths, double cell_size = kDefaultGridCell,
                            bool turns_only = false);

/// One grid per scenario label.
std::map<std::string, DecisionPointGrid> aggregate_by_label(const std::vector<PathData>& paths,
                                                            double cell_size = kDefaultGridCell,
                                                            bool turns_only = false);

}  // namespace ta::analysis
