#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "travelagent/geometry.hpp"

namespace ta {

/// Closed vocabulary of semantic labels carried by scene objects.
enum class SemanticClass : std::uint8_t {
  building,
  wall,
  tree,
  bench,
  sign,
  road,
  sidewalk,
  plaza,
  subway_entrance,
  pedestrian,
  vehicle,
  fence,
  stairs,
  door,
};

/// Label as it appears in scene files and prompts ("subway-entrance").
std::string_view to_string(SemanticClass c);

/// Throws ta::Error for labels outside the vocabulary.
SemanticClass parse_semantic_class(std::string_view label);
std::optional<SemanticClass> try_parse_semantic_class(std::string_view label);

struct SceneObject {
  std::string id;
  SemanticClass cls = SemanticClass::building;
  Polygon footprint;  // counter-clockwise, meters
  double height = 0.0;
  std::optional<std::string> caption;
};

struct Goal {
  std::string id;
  std::string name;
  Polygon polygon;
};

struct Pose {
  Vec2 position;
  double heading = 0.0;  // degrees, [0, 360), 0 = north, clockwise

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Spawn {
  std::string id;
  Pose pose;
};

/// Free-text descriptors used for the scene-setting sentence and the matrix
/// grouping fields.
struct SceneMetadata {
  std::string season;
  std::string time_of_day;
  std::string weather;
  std::string locale;
  std::string setting = "street";  // noun used by the initiation prompt
  std::string description;         // long-form scenario description, optional
};

/// Immutable semantic 2.5D world. Build through load_scene/parse_scene so the
/// invariants are checked.
struct Scene {
  std::string name;
  std::vector<SceneObject> objects;  // sorted by id
  std::vector<Polygon> walkable;
  std::vector<Goal> goals;
  std::vector<Spawn> spawns;
  SceneMetadata metadata;

  const Goal* find_goal(std::string_view id) const;
  const Spawn* find_spawn(std::string_view id) const;
  const SceneObject* find_object(std::string_view id) const;

  /// Bounding box of the walkable region.
  Box bounds() const;
};

inline constexpr int kSceneSchemaVersion = 1;

/// Parses and validates a scene document. Throws SchemaError for shape
/// problems and ValidationError for invariant violations.
Scene parse_scene(std::string_view json_text);

/// Loads a scene from a file path, or from a bundled fixture when `ref` is a
/// bare fixture id such as "kendall_base".
Scene load_scene(const std::string& ref);
Scene load_scene_file(const std::filesystem::path& path);

/// Ids of the bundled scene fixtures.
std::vector<std::string> bundled_scene_ids();

/// Serializes a scene back into its document form.
std::string scene_to_json(const Scene& scene);

/// Inside some walkable polygon (boundary inclusive) and inside no object
/// footprint (footprint boundary counts as inside the footprint).
bool contains_walkable(const Scene& scene, Vec2 point);

struct RayHit {
  SemanticClass cls = SemanticClass::wall;
  std::optional<std::string> caption;
  double distance = 0.0;
  /// Index into scene.objects, or -1 for the walkable boundary.
  int object_index = -1;
};

/// Nearest hit within max_range against object footprints and the walkable
/// boundary. Equal distances go to the lower object id; the boundary loses
/// ties. Boundary hits are reported as `wall` without caption. Walkable edges
/// lying strictly inside another walkable polygon are ignored, so overlapping
/// walkable polygons behave as their union.
std::optional<RayHit> raycast(const Scene& scene, Vec2 origin, Vec2 direction, double max_range);

struct VisibleObject {
  SemanticClass cls = SemanticClass::building;
  std::optional<std::string> caption;
  double relative_bearing = 0.0;  // degrees, negative = left
  double distance = 0.0;
  double angular_width = 0.0;  // degrees covered by the sampling rays that hit it
  double height = 0.0;
  std::string id;
};

/// Sampling step of the occlusion ray fan used by visible_objects.
inline constexpr double kVisibilitySampleDeg = 1.0;

/// Objects hit first by at least one ray of a fan spanning `fov` degrees
/// centered on the pose heading, sampled every kVisibilitySampleDeg.
/// Sorted by distance, then id.
std::vector<VisibleObject> visible_objects(const Scene& scene, const Pose& pose, double fov,
                                           double max_range);

/// Same as visible_objects with an explicit sampling step; used to cross-check
/// the 1-degree fan against denser fans.
std::vector<VisibleObject> visible_objects_sampled(const Scene& scene, const Pose& pose, double fov,
                                                   double max_range, double step_deg);

}  // namespace ta
