#include "travelagent/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "travelagent/error.hpp"

namespace ta {

namespace {

constexpr std::array<std::string_view, 5> kRayNames = {"front", "front-left", "front-right", "left", "right"};
constexpr std::array<double, 5> kRayOffsets = {0.0, -45.0, 45.0, -90.0, 90.0};

std::string article_for(std::string_view word) {
  if (word.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(word.front())));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an" : "a";
}

std::string whole_meters(double d) {
  const long m = std::max(1L, std::lround(d));
  return std::to_string(m);
}

}  // namespace

std::string format_tenths(double meters) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", meters);
  return buf;
}

std::string_view to_string(RayDirection d) { return kRayNames[static_cast<std::size_t>(d)]; }

std::optional<RayDirection> parse_ray_direction(std::string_view s) {
  for (auto d : kRayDirections)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

double ray_offset(RayDirection d) { return kRayOffsets[static_cast<std::size_t>(d)]; }

RayFan cast_fan(const Scene& scene, const Pose& pose) {
  RayFan fan;
  for (auto d : kRayDirections) {
    auto hit = raycast(scene, pose.position, heading_vector(pose.heading + ray_offset(d)), kFanRange);
    if (hit) fan[static_cast<std::size_t>(d)] = RayReading{hit->cls, hit->distance};
  }
  return fan;
}

std::string render_rays(const RayFan& fan) {
  std::string out;
  for (auto d : kRayDirections) {
    out += to_string(d);
    out += ": ";
    if (const auto& r = at(fan, d)) {
      out += to_string(r->cls);
      out += " at ";
      out += format_tenths(r->distance);
      out += " m";
    } else {
      out += "clear";
    }
    out += '\n';
  }
  return out;
}

std::string_view view_bearing_word(double b) {
  if (std::abs(b) <= 15.0) return "ahead";
  if (b <= -60.0) return "to your left";
  if (b >= 60.0) return "to your right";
  return b < 0.0 ? "ahead-left" : "ahead-right";
}

std::string describe_view(std::span<const VisibleObject> visible, const SceneMetadata& md) {
  std::string out;
  std::string setting;
  for (const std::string* w : {&md.weather, &md.season, &md.time_of_day}) {
    if (w->empty()) continue;
    if (!setting.empty()) setting += ' ';
    setting += *w;
  }
  if (!setting.empty() || !md.locale.empty()) {
    out += "It is ";
    out += setting.empty() ? std::string("a scene") : article_for(setting) + " " + setting;
    if (!md.locale.empty()) out += " in " + md.locale;
    out += ". ";
  }
  if (visible.empty()) {
    out += "The way ahead looks open.";
    return out;
  }
  out += "You see ";
  const std::size_t n = std::min(visible.size(), kMaxViewClauses);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = visible[k];
    if (k > 0) out += "; ";
    out += "a ";
    if (v.cls == SemanticClass::building && v.height >= kTallBuildingHeight) out += "tall ";
    out += to_string(v.cls);
    if (v.caption && !v.caption->empty()) out += " with \"" + *v.caption + "\"";
    out += ' ';
    out += view_bearing_word(v.relative_bearing);
    out += " at about " + whole_meters(v.distance) + " m";
  }
  out += '.';
  return out;
}

Cell cell_of(Vec2 origin, double cell_size, Vec2 p) {
  return {static_cast<std::int64_t>(std::floor((p.x - origin.x) / cell_size)),
          static_cast<std::int64_t>(std::floor((p.y - origin.y) / cell_size))};
}

std::vector<Cell> supercover_cells(Vec2 origin, double cs, Vec2 a, Vec2 b) {
  std::set<Cell> cells;
  const Cell ca = cell_of(origin, cs, a);
  const Cell cb = cell_of(origin, cs, b);
  cells.insert(ca);
  cells.insert(cb);
  if (a == b) return {cells.begin(), cells.end()};

  // Parameters where the segment crosses a grid line, tagged by axis.
  struct Event {
    double t;
    int axis;  // 0 = vertical line (column change), 1 = horizontal line
  };
  std::vector<Event> events;
  const Vec2 d = b - a;
  auto crossings = [&](std::int64_t c0, std::int64_t c1, double p0, double dp, double o, int axis) {
    for (std::int64_t k = std::min(c0, c1) + 1; k <= std::max(c0, c1); ++k) {
      const double line = o + static_cast<double>(k) * cs;
      events.push_back({std::clamp((line - p0) / dp, 0.0, 1.0), axis});
    }
  };
  if (d.x != 0.0) crossings(ca.i, cb.i, a.x, d.x, origin.x, 0);
  if (d.y != 0.0) crossings(ca.j, cb.j, a.y, d.y, origin.y, 1);
  std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) {
    return l.t < r.t || (l.t == r.t && l.axis < r.axis);
  });

  auto point_at = [&](double t) { return a + d * t; };
  double prev_t = 0.0;
  Cell prev_cell = ca;
  std::size_t k = 0;
  while (k < events.size()) {
    const double t = events[k].t;
    bool has_x = false;
    bool has_y = false;
    while (k < events.size() && events[k].t == t) {
      (events[k].axis == 0 ? has_x : has_y) = true;
      ++k;
    }
    if (t > prev_t) {
      prev_cell = cell_of(origin, cs, point_at(0.5 * (prev_t + t)));
      cells.insert(prev_cell);
    }
    const double next_t = k < events.size() ? events[k].t : 1.0;
    const Cell next_cell = next_t > t ? cell_of(origin, cs, point_at(0.5 * (t + next_t))) : cb;
    cells.insert(next_cell);
    if (has_x && has_y) {
      cells.insert({prev_cell.i, next_cell.j});
      cells.insert({next_cell.i, prev_cell.j});
    }
    prev_t = t;
    prev_cell = next_cell;
  }
  return {cells.begin(), cells.end()};
}

DiscoveryMap make_discovery_map(const Scene& scene, double cell_size) {
  const Box b = scene.bounds();
  DiscoveryMap map;
  map.cell_size = cell_size;
  map.origin = {std::floor(b.min.x / cell_size) * cell_size, std::floor(b.min.y / cell_size) * cell_size};
  map.width = static_cast<std::int64_t>(std::ceil((b.max.x - map.origin.x) / cell_size)) + 1;
  map.height = static_cast<std::int64_t>(std::ceil((b.max.y - map.origin.y) / cell_size)) + 1;
  return map;
}

DiscoveryMap update_discovery(const DiscoveryMap& map, const Pose& from, const Pose& to) {
  DiscoveryMap out = map;
  for (const Cell& c : supercover_cells(map.origin, map.cell_size, from.position, to.position))
    if (out.in_bounds(c)) out.visited.insert(c);
  return out;
}

char heading_glyph(double heading) {
  static constexpr char kGlyphs[] = {'^', '>', 'v', '<'};
  const double h = normalize_heading(heading);
  const auto idx = static_cast<int>(std::floor((h + 45.0) / 90.0)) % 4;
  return kGlyphs[idx];
}

std::string render_discovery(const DiscoveryMap& map, const Pose& pose) {
  constexpr int half = kDiscoveryWindow / 2;
  const Cell me = map.cell_at(pose.position);
  std::string out = "Discovery map (north up, 1 cell = " + format_tenths(map.cell_size) +
                    " m; . unexplored, o visited, ^>v< you):\n";
  for (std::int64_t dj = half; dj >= -half; --dj) {
    for (std::int64_t di = -half; di <= half; ++di) {
      const Cell c{me.i + di, me.j + dj};
      if (di == 0 && dj == 0)
        out += heading_glyph(pose.heading);
      else
        out += map.is_visited(c) ? 'o' : '.';
    }
    out += '\n';
  }
  return out;
}

std::string_view compass_band(double b) {
  if (std::abs(b) <= 15.0) return "ahead";
  if (b > -60.0 && b < -15.0) return "ahead-left";
  if (b > 15.0 && b < 60.0) return "ahead-right";
  if (b > -120.0 && b <= -60.0) return "left";
  if (b >= 60.0 && b < 120.0) return "right";
  return "behind";
}

CompassReading compass_reading(const Pose& pose, Vec2 target) {
  if (target == pose.position) throw Error("compass target coincides with the agent position");
  CompassReading r;
  r.relative_bearing = normalize_relative(bearing_deg(pose.position, target) - pose.heading);
  r.distance = distance(pose.position, target);
  r.band = compass_band(r.relative_bearing);
  return r;
}

std::string compass_cue(const Pose& pose, Vec2 target) {
  const CompassReading r = compass_reading(pose, target);
  const long deg = std::lround(r.relative_bearing);
  const long dist = std::lround(r.distance / 5.0) * 5;
  return "target is " + std::string(r.band) + " (" + std::to_string(deg) + "°), roughly " +
         std::to_string(dist) + " m away";
}

SensoryFrame sense(const Scene& scene, const Pose& pose, const DiscoveryMap& map, const SenseConfig& config) {
  SensoryFrame f;
  const auto visible = visible_objects(scene, pose, kViewFov, kViewRange);
  f.view_text = describe_view(visible, scene.metadata);
  f.rays = cast_fan(scene, pose);
  f.discovery_text = render_discovery(map, pose);
  if (config.compass_enabled && config.target) f.compass_text = compass_cue(pose, *config.target);
  if (const auto& front = at(f.rays, RayDirection::front); front && front->distance < kCollisionWarningDistance)
    f.collision_warning = "Warning: " + std::string(to_string(front->cls)) + " " + format_tenths(front->distance) + " m ahead";
  return f;
}

}  // namespace ta
