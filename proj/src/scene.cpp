#include "travelagent/scene.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "travelagent/error.hpp"
#include "travelagent/resources.hpp"

namespace ta {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<SemanticClass, std::string_view>, 14> kClassNames = {{
    {SemanticClass::building, "building"},
    {SemanticClass::wall, "wall"},
    {SemanticClass::tree, "tree"},
    {SemanticClass::bench, "bench"},
    {SemanticClass::sign, "sign"},
    {SemanticClass::road, "road"},
    {SemanticClass::sidewalk, "sidewalk"},
    {SemanticClass::plaza, "plaza"},
    {SemanticClass::subway_entrance, "subway-entrance"},
    {SemanticClass::pedestrian, "pedestrian"},
    {SemanticClass::vehicle, "vehicle"},
    {SemanticClass::fence, "fence"},
    {SemanticClass::stairs, "stairs"},
    {SemanticClass::door, "door"},
}};

// --- schema helpers -------------------------------------------------------

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw SchemaError(path + "/" + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key, "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path, "expected a finite number");
  return d;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError(path, "expected a string");
  return v.get<std::string>();
}

Vec2 as_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw SchemaError(path, "expected an [x, y] pair");
  return {as_number(v[0], path + "/0"), as_number(v[1], path + "/1")};
}

Polygon as_polygon(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array of [x, y] pairs");
  if (v.size() < 3) throw SchemaError(path, "polygon needs at least 3 vertices");
  Polygon poly;
  poly.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) poly.push_back(as_point(v[i], path + "/" + std::to_string(i)));
  return poly;
}

json polygon_json(const Polygon& poly) {
  json a = json::array();
  for (const auto& p : poly) a.push_back({p.x, p.y});
  return a;
}

void validate_polygon(const Polygon& poly, const std::string& subject, bool require_ccw) {
  if (!is_simple(poly)) throw ValidationError(subject, "polygon is not simple (self-intersecting or degenerate)");
  const double area = signed_area(poly);
  if (area == 0.0) throw ValidationError(subject, "polygon has zero area");
  if (require_ccw && area < 0.0) throw ValidationError(subject, "footprint must be counter-clockwise");
}

double box_distance(Vec2 p, const Box& b) {
  const double dx = std::max({b.min.x - p.x, 0.0, p.x - b.max.x});
  const double dy = std::max({b.min.y - p.y, 0.0, p.y - b.max.y});
  return std::hypot(dx, dy);
}

constexpr double kTieEps = 1e-12;

}  // namespace

std::string_view to_string(SemanticClass c) {
  for (const auto& [cls, name] : kClassNames)
    if (cls == c) return name;
  return "unknown";
}

std::optional<SemanticClass> try_parse_semantic_class(std::string_view label) {
  for (const auto& [cls, name] : kClassNames)
    if (name == label) return cls;
  return std::nullopt;
}

SemanticClass parse_semantic_class(std::string_view label) {
  if (auto c = try_parse_semantic_class(label)) return *c;
  throw Error("unknown semantic class '" + std::string(label) + "'");
}

const Goal* Scene::find_goal(std::string_view id) const {
  for (const auto& g : goals)
    if (g.id == id) return &g;
  return nullptr;
}

const Spawn* Scene::find_spawn(std::string_view id) const {
  for (const auto& s : spawns)
    if (s.id == id) return &s;
  return nullptr;
}

const SceneObject* Scene::find_object(std::string_view id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

Box Scene::bounds() const {
  Box b = bounding_box(walkable.front());
  for (const auto& poly : walkable) {
    const Box pb = bounding_box(poly);
    b.min.x = std::min(b.min.x, pb.min.x);
    b.min.y = std::min(b.min.y, pb.min.y);
    b.max.x = std::max(b.max.x, pb.max.x);
    b.max.y = std::max(b.max.y, pb.max.y);
  }
  return b;
}

Scene parse_scene(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("", "top level must be an object");
  check_keys(doc, "", {"schema_version", "name", "objects", "walkable", "goals", "spawns", "metadata"});

  const json& version = require(doc, "", "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSceneSchemaVersion)
    throw SchemaError("/schema_version", "unsupported schema version (expected 1)");

  Scene scene;
  if (auto it = doc.find("name"); it != doc.end()) scene.name = as_string(*it, "/name");

  const json& objects = require(doc, "", "objects");
  if (!objects.is_array()) throw SchemaError("/objects", "expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "/objects/" + std::to_string(i);
    const json& o = objects[i];
    if (!o.is_object()) throw SchemaError(path, "expected an object");
    check_keys(o, path, {"id", "class", "footprint", "height", "caption"});
    SceneObject obj;
    obj.id = as_string(require(o, path, "id"), path + "/id");
    if (obj.id.empty()) throw SchemaError(path + "/id", "id must be non-empty");
    const std::string label = as_string(require(o, path, "class"), path + "/class");
    auto cls = try_parse_semantic_class(label);
    if (!cls) throw ValidationError(obj.id, "unknown semantic class '" + label + "'");
    obj.cls = *cls;
    obj.footprint = as_polygon(require(o, path, "footprint"), path + "/footprint");
    if (auto h = o.find("height"); h != o.end()) obj.height = as_number(*h, path + "/height");
    if (obj.height < 0.0) throw ValidationError(obj.id, "height must be >= 0");
    if (auto c = o.find("caption"); c != o.end() && !c->is_null()) obj.caption = as_string(*c, path + "/caption");
    validate_polygon(obj.footprint, obj.id, true);
    if (!ids.insert(obj.id).second) throw ValidationError(obj.id, "duplicate object id");
    scene.objects.push_back(std::move(obj));
  }
  std::sort(scene.objects.begin(), scene.objects.end(),
            [](const SceneObject& a, const SceneObject& b) { return a.id < b.id; });

  const json& walkable = require(doc, "", "walkable");
  if (!walkable.is_array() || walkable.empty()) throw SchemaError("/walkable", "expected a non-empty array of polygons");
  for (std::size_t i = 0; i < walkable.size(); ++i) {
    const std::string path = "/walkable/" + std::to_string(i);
    Polygon poly = as_polygon(walkable[i], path);
    validate_polygon(poly, "walkable[" + std::to_string(i) + "]", false);
    if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
    scene.walkable.push_back(std::move(poly));
  }

  if (auto it = doc.find("goals"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("/goals", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "/goals/" + std::to_string(i);
      const json& g = (*it)[i];
      if (!g.is_object()) throw SchemaError(path, "expected an object");
      check_keys(g, path, {"id", "name", "polygon"});
      Goal goal;
      goal.id = as_string(require(g, path, "id"), path + "/id");
      if (auto n = g.find("name"); n != g.end()) goal.name = as_string(*n, path + "/name");
      goal.polygon = as_polygon(require(g, path, "polygon"), path + "/polygon");
      validate_polygon(goal.polygon, goal.id, false);
      if (signed_area(goal.polygon) < 0.0) std::reverse(goal.polygon.begin(), goal.polygon.end());
      if (scene.find_goal(goal.id)) throw ValidationError(goal.id, "duplicate goal id");
      const bool touches = std::any_of(scene.walkable.begin(), scene.walkable.end(),
                                       [&](const Polygon& w) { return polygons_intersect(goal.polygon, w); });
      if (!touches) throw ValidationError(goal.id, "goal polygon does not intersect the walkable region");
      scene.goals.push_back(std::move(goal));
    }
  }

  const json& spawns = require(doc, "", "spawns");
  if (!spawns.is_array()) throw SchemaError("/spawns", "expected an array");
  for (std::size_t i = 0; i < spawns.size(); ++i) {
    const std::string path = "/spawns/" + std::to_string(i);
    const json& s = spawns[i];
    if (!s.is_object()) throw SchemaError(path, "expected an object");
    check_keys(s, path, {"id", "position", "heading"});
    Spawn spawn;
    spawn.id = as_string(require(s, path, "id"), path + "/id");
    spawn.pose.position = as_point(require(s, path, "position"), path + "/position");
    if (auto h = s.find("heading"); h != s.end()) spawn.pose.heading = normalize_heading(as_number(*h, path + "/heading"));
    if (scene.find_spawn(spawn.id)) throw ValidationError(spawn.id, "duplicate spawn id");
    if (!contains_walkable(scene, spawn.pose.position)) throw ValidationError(spawn.id, "spawn pose is not walkable");
    scene.spawns.push_back(std::move(spawn));
  }

  if (auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError("/metadata", "expected an object");
    check_keys(*it, "/metadata", {"season", "time_of_day", "weather", "locale", "setting", "description"});
    auto field = [&](const char* key, std::string& out) {
      if (auto f = it->find(key); f != it->end()) out = as_string(*f, std::string("/metadata/") + key);
    };
    field("season", scene.metadata.season);
    field("time_of_day", scene.metadata.time_of_day);
    field("weather", scene.metadata.weather);
    field("locale", scene.metadata.locale);
    field("setting", scene.metadata.setting);
    field("description", scene.metadata.description);
  }
  return scene;
}

Scene load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scene file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

Scene load_scene(const std::string& ref) {
  const std::string fixture = "scenes/" + ref + ".json";
  if (ref.find('/') == std::string::npos && ref.find('.') == std::string::npos && resources::contains(fixture))
    return parse_scene(resources::get(fixture));
  return load_scene_file(ref);
}

std::vector<std::string> bundled_scene_ids() {
  std::vector<std::string> ids;
  for (const auto& name : resources::list("scenes/")) {
    std::string stem = name.substr(7);
    if (stem.size() > 5 && stem.ends_with(".json")) ids.push_back(stem.substr(0, stem.size() - 5));
  }
  return ids;
}

std::string scene_to_json(const Scene& scene) {
  json doc;
  doc["schema_version"] = kSceneSchemaVersion;
  doc["name"] = scene.name;
  doc["metadata"] = {{"season", scene.metadata.season},     {"time_of_day", scene.metadata.time_of_day},
                     {"weather", scene.metadata.weather},   {"locale", scene.metadata.locale},
                     {"setting", scene.metadata.setting},   {"description", scene.metadata.description}};
  doc["walkable"] = json::array();
  for (const auto& w : scene.walkable) doc["walkable"].push_back(polygon_json(w));
  doc["objects"] = json::array();
  for (const auto& o : scene.objects) {
    json j = {{"id", o.id}, {"class", to_string(o.cls)}, {"footprint", polygon_json(o.footprint)}, {"height", o.height}};
    if (o.caption) j["caption"] = *o.caption;
    doc["objects"].push_back(std::move(j));
  }
  doc["goals"] = json::array();
  for (const auto& g : scene.goals)
    doc["goals"].push_back({{"id", g.id}, {"name", g.name}, {"polygon", polygon_json(g.polygon)}});
  doc["spawns"] = json::array();
  for (const auto& s : scene.spawns)
    doc["spawns"].push_back({{"id", s.id}, {"position", {s.pose.position.x, s.pose.position.y}}, {"heading", s.pose.heading}});
  return doc.dump(2);
}

bool contains_walkable(const Scene& scene, Vec2 point) {
  const bool in_walkable = std::any_of(scene.walkable.begin(), scene.walkable.end(),
                                       [&](const Polygon& w) { return point_in_polygon(point, w); });
  if (!in_walkable) return false;
  return std::none_of(scene.objects.begin(), scene.objects.end(),
                      [&](const SceneObject& o) { return point_in_polygon(point, o.footprint); });
}

std::optional<RayHit> raycast(const Scene& scene, Vec2 origin, Vec2 direction, double max_range) {
  double best = std::numeric_limits<double>::infinity();
  int best_index = -2;

  // Objects are sorted by id, so accepting only strictly nearer hits keeps the
  // lower id on ties.
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const auto& poly = scene.objects[k].footprint;
    const double limit = std::min(best, max_range);
    if (box_distance(origin, bounding_box(poly)) > limit) continue;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
      auto t = ray_segment(origin, direction, poly[i], poly[(i + 1) % n]);
      if (t && *t <= max_range && *t < best - kTieEps) {
        best = *t;
        best_index = static_cast<int>(k);
      } else if (t && best_index == static_cast<int>(k) && *t < best) {
        best = *t;  // same object, refine
      }
    }
  }

  const bool multi = scene.walkable.size() > 1;
  for (std::size_t w = 0; w < scene.walkable.size(); ++w) {
    const auto& poly = scene.walkable[w];
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
      auto t = ray_segment(origin, direction, poly[i], poly[(i + 1) % n]);
      if (!t || *t > max_range || !(*t < best - kTieEps)) continue;
      if (multi) {
        const Vec2 p = origin + direction * *t;
        bool internal = false;
        for (std::size_t o = 0; o < scene.walkable.size() && !internal; ++o)
          internal = o != w && point_in_polygon_interior(p, scene.walkable[o]);
        if (internal) continue;
      }
      best = *t;
      best_index = -1;
    }
  }

  if (best_index == -2) return std::nullopt;
  RayHit hit;
  hit.distance = best;
  hit.object_index = best_index;
  if (best_index >= 0) {
    const auto& obj = scene.objects[static_cast<std::size_t>(best_index)];
    hit.cls = obj.cls;
    hit.caption = obj.caption;
  }
  return hit;
}

std::vector<VisibleObject> visible_objects_sampled(const Scene& scene, const Pose& pose, double fov,
                                                   double max_range, double step_deg) {
  struct Acc {
    double distance = std::numeric_limits<double>::infinity();
    double bearing = 0.0;
    int rays = 0;
  };
  std::map<int, Acc> seen;
  const double half = fov / 2.0;
  const int n = static_cast<int>(std::floor(fov / step_deg + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double offset = -half + i * step_deg;
    auto hit = raycast(scene, pose.position, heading_vector(pose.heading + offset), max_range);
    if (!hit || hit->object_index < 0) continue;
    Acc& acc = seen[hit->object_index];
    ++acc.rays;
    if (hit->distance < acc.distance) {
      acc.distance = hit->distance;
      acc.bearing = offset;
    }
  }
  std::vector<VisibleObject> out;
  out.reserve(seen.size());
  for (const auto& [index, acc] : seen) {
    const auto& obj = scene.objects[static_cast<std::size_t>(index)];
    out.push_back({obj.cls, obj.caption, acc.bearing, acc.distance, acc.rays * step_deg, obj.height, obj.id});
  }
  std::stable_sort(out.begin(), out.end(), [](const VisibleObject& a, const VisibleObject& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  return out;
}

std::vector<VisibleObject> visible_objects(const Scene& scene, const Pose& pose, double fov, double max_range) {
  return visible_objects_sampled(scene, pose, fov, max_range, kVisibilitySampleDeg);
}

}  // namespace ta
