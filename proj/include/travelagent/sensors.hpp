#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "travelagent/scene.hpp"

namespace ta {

// --- ray fan ---------------------------------------------------------------

enum class RayDirection : std::uint8_t { front, front_left, front_right, left, right };

inline constexpr std::array<RayDirection, 5> kRayDirections = {
    RayDirection::front, RayDirection::front_left, RayDirection::front_right, RayDirection::left,
    RayDirection::right};

std::string_view to_string(RayDirection d);
std::optional<RayDirection> parse_ray_direction(std::string_view s);

/// Heading offset of each fan ray in degrees (negative = counter-clockwise).
double ray_offset(RayDirection d);

inline constexpr double kFanRange = 50.0;

struct RayReading {
  SemanticClass cls = SemanticClass::wall;
  double distance = 0.0;  // unrounded; rendered to 0.1 m
  friend bool operator==(const RayReading&, const RayReading&) = default;
};

/// One optional reading per RayDirection, indexed by the enum value.
using RayFan = std::array<std::optional<RayReading>, 5>;

inline const std::optional<RayReading>& at(const RayFan& fan, RayDirection d) {
  return fan[static_cast<std::size_t>(d)];
}

RayFan cast_fan(const Scene& scene, const Pose& pose);

/// "front: wall at 2.0 m" / "front-left: clear", one line per direction.
std::string render_rays(const RayFan& fan);

// --- view description ------------------------------------------------------

inline constexpr std::size_t kMaxViewClauses = 8;
inline constexpr double kTallBuildingHeight = 12.0;

/// {ahead, ahead-left, ahead-right, to your left, to your right}.
std::string_view view_bearing_word(double relative_bearing);

std::string describe_view(std::span<const VisibleObject> visible, const SceneMetadata& metadata);

// --- discovery map -----------------------------------------------------------

struct Cell {
  std::int64_t i = 0;  // column, west to east
  std::int64_t j = 0;  // row, south to north
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Cell containing `p` on an unbounded grid anchored at `origin`.
Cell cell_of(Vec2 origin, double cell_size, Vec2 p);

/// Every cell touched by the closed segment [a, b]: the cell of each point on
/// the segment, plus both side cells wherever the segment passes exactly
/// through a grid corner while changing row and column.
std::vector<Cell> supercover_cells(Vec2 origin, double cell_size, Vec2 a, Vec2 b);

struct DiscoveryMap {
  Vec2 origin;
  double cell_size = 1.0;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::set<Cell> visited;

  bool in_bounds(Cell c) const { return c.i >= 0 && c.j >= 0 && c.i < width && c.j < height; }
  bool is_visited(Cell c) const { return visited.contains(c); }
  Cell cell_at(Vec2 p) const { return cell_of(origin, cell_size, p); }

  friend bool operator==(const DiscoveryMap&, const DiscoveryMap&) = default;
};

/// Empty map covering the scene's walkable bounds.
DiscoveryMap make_discovery_map(const Scene& scene, double cell_size = 1.0);

DiscoveryMap update_discovery(const DiscoveryMap& map, const Pose& from, const Pose& to);

inline constexpr int kDiscoveryWindow = 21;

/// '^', '>', 'v' or '<' for the cardinal nearest the heading; exact 45-degree
/// ties round clockwise.
char heading_glyph(double heading);

std::string render_discovery(const DiscoveryMap& map, const Pose& pose);

// --- compass -----------------------------------------------------------------

struct CompassReading {
  double relative_bearing = 0.0;  // (-180, 180]
  double distance = 0.0;
  std::string_view band;
};

/// {ahead, ahead-left, ahead-right, left, right, behind}.
std::string_view compass_band(double relative_bearing);

/// Throws ta::Error when target coincides with the pose position.
CompassReading compass_reading(const Pose& pose, Vec2 target);

/// "target is {band} ({b}°), roughly {d} m away"
std::string compass_cue(const Pose& pose, Vec2 target);

// --- full frame --------------------------------------------------------------

inline constexpr double kCollisionWarningDistance = 1.5;
inline constexpr double kViewFov = 120.0;
inline constexpr double kViewRange = 50.0;

struct SenseConfig {
  bool compass_enabled = true;
  std::optional<Vec2> target;
};

struct SensoryFrame {
  std::string view_text;
  RayFan rays;
  std::string discovery_text;
  std::optional<std::string> compass_text;
  std::optional<std::string> collision_warning;
  /// Corrective notes injected by the simulator, e.g. "you are not at your goal".
  std::vector<std::string> notes;

  friend bool operator==(const SensoryFrame&, const SensoryFrame&) = default;
};

SensoryFrame sense(const Scene& scene, const Pose& pose, const DiscoveryMap& map, const SenseConfig& config);

/// Formats a distance the way every rendering does: one decimal, "2.0".
std::string format_tenths(double meters);

}  // namespace ta
