#include "travelagent/geometry.hpp"

#include <algorithm>
#include <limits>

namespace ta {

double bearing_deg(Vec2 from, Vec2 to) {
  const Vec2 d = to - from;
  return normalize_heading(rad_to_deg(std::atan2(d.x, d.y)));
}

double normalize_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

double normalize_relative(double deg) {
  double b = std::fmod(deg, 360.0);
  if (b <= -180.0) b += 360.0;
  if (b > 180.0) b -= 360.0;
  return b;
}

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 centroid(std::span<const Vec2> poly) {
  const double a = signed_area(poly);
  if (a == 0.0) {
    Vec2 s;
    for (const auto& p : poly) s = s + p;
    return s * (1.0 / static_cast<double>(poly.size()));
  }
  Vec2 c;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double w = cross(p, q);
    c = c + (p + q) * w;
  }
  return c * (1.0 / (6.0 * a));
}

Box bounding_box(std::span<const Vec2> poly) {
  Box b{poly.front(), poly.front()};
  for (const auto& p : poly) {
    b.min.x = std::min(b.min.x, p.x);
    b.min.y = std::min(b.min.y, p.y);
    b.max.x = std::max(b.max.x, p.x);
    b.max.y = std::max(b.max.y, p.y);
  }
  return b;
}

bool point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  if (cross(b - a, p - a) != 0.0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool point_on_boundary(Vec2 p, std::span<const Vec2> poly) {
  for (std::size_t i = 0, n = poly.size(); i < n; ++i)
    if (point_on_segment(p, poly[i], poly[(i + 1) % n])) return true;
  return false;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  int winding = 0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    if (point_on_segment(p, a, b)) return true;
    const double side = cross(b - a, p - a);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0.0) ++winding;
    } else {
      if (b.y <= p.y && side < 0.0) --winding;
    }
  }
  return winding != 0;
}

bool point_in_polygon_interior(Vec2 p, std::span<const Vec2> poly) {
  return point_in_polygon(p, poly) && !point_on_boundary(p, poly);
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && point_on_segment(c, a, b)) return true;
  if (o2 == 0 && point_on_segment(d, a, b)) return true;
  if (o3 == 0 && point_on_segment(a, c, d)) return true;
  if (o4 == 0 && point_on_segment(b, c, d)) return true;
  return false;
}

bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (poly[i] == poly[(i + 1) % n]) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 c = poly[j];
      const Vec2 d = poly[(j + 1) % n];
      const bool adjacent_next = (j == i + 1);
      const bool adjacent_wrap = (i == 0 && j == n - 1);
      if (adjacent_next) {
        // Shared vertex b == c; the edges must not fold back onto each other.
        if (orientation(a, b, d) == 0 && dot(a - b, d - b) > 0.0) return false;
        continue;
      }
      if (adjacent_wrap) {
        // Shared vertex a == d.
        if (orientation(c, a, b) == 0 && dot(c - a, b - a) > 0.0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

std::optional<double> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const Vec2 ao = a - origin;
  const double denom = cross(dir, e);
  if (denom != 0.0) {
    const double t = cross(ao, e) / denom;
    const double u = cross(ao, dir) / denom;
    if (t > 0.0 && u >= 0.0 && u <= 1.0) return t;
    return std::nullopt;
  }
  if (cross(ao, dir) != 0.0) return std::nullopt;
  // Collinear: the ray meets the nearer endpoint if both lie ahead.
  const double ta = dot(ao, dir);
  const double tb = dot(b - origin, dir);
  if (ta > 0.0 && tb > 0.0) return std::min(ta, tb);
  return std::nullopt;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double len2 = dot(e, e);
  double t = len2 > 0.0 ? dot(p - a, e) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + e * t);
}

double distance_to_boundary(Vec2 p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i)
    best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % n]));
  return best;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
  return point_in_polygon(a.front(), b) || point_in_polygon(b.front(), a);
}

}  // namespace ta
