#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace ta {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

using Polygon = std::vector<Vec2>;

struct Box {
  Vec2 min;
  Vec2 max;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Heading convention: 0 = north (+y), clockwise positive.
inline Vec2 heading_vector(double heading_deg) {
  const double r = deg_to_rad(heading_deg);
  return {std::sin(r), std::cos(r)};
}

/// Compass bearing from `from` to `to` in degrees, [0, 360).
double bearing_deg(Vec2 from, Vec2 to);

/// Maps any angle into [0, 360).
double normalize_heading(double deg);

/// Maps any angle into (-180, 180].
double normalize_relative(double deg);

/// Positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);
Box bounding_box(std::span<const Vec2> poly);

/// Exact test (no tolerance) that `p` lies on the closed segment [a, b].
bool point_on_segment(Vec2 p, Vec2 a, Vec2 b);
bool point_on_boundary(Vec2 p, std::span<const Vec2> poly);

/// Winding-number containment; points on the boundary count as inside.
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

/// Strict interior: inside and not on the boundary.
bool point_in_polygon_interior(Vec2 p, std::span<const Vec2> poly);

/// True when closed segments [a,b] and [c,d] share at least one point.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Simple polygon: >= 3 distinct consecutive vertices, non-adjacent edges
/// disjoint, adjacent edges meeting only at their shared vertex.
bool is_simple(std::span<const Vec2> poly);

/// Smallest t > 0 with origin + t*dir on the closed segment [a, b].
/// A ray that starts on the segment and runs along it reports no hit.
std::optional<double> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
double distance_to_boundary(Vec2 p, std::span<const Vec2> poly);

/// True if the two polygons share any point (overlap, containment or touch).
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

}  // namespace ta
