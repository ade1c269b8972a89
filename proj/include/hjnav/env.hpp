#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjnav/grid.hpp"

namespace hjnav {

using Vec2 = std::array<double, 2>;

struct Obstacle {
  enum class Shape { Rect, Circle };
  Shape shape = Shape::Rect;
  Vec2 rect_min{}, rect_max{};  // Rect
  Vec2 center{};                // Circle
  double radius = 0.0;

  static Obstacle rect(Vec2 lo, Vec2 hi);
  static Obstacle circle(Vec2 c, double r);

  bool contains(const Vec2& p) const;
  /// Signed Euclidean distance to the obstacle boundary (negative inside).
  double distance(const Vec2& p) const;
  bool intersects_segment(const Vec2& a, const Vec2& b) const;
  /// Smallest t >= 0 with origin + t*dir on the obstacle, if within t_max.
  std::optional<double> ray_hit(const Vec2& origin, const Vec2& dir, double t_max) const;
};

struct GoalSpec {
  Vec2 center{};
  double radius = 0.3;
  double heading = 0.0;  // used by the spline planner's terminal tangent
};

struct Environment {
  Vec2 workspace_min{}, workspace_max{};
  std::vector<Obstacle> obstacles;
  GoalSpec goal;

  bool in_workspace(const Vec2& p) const;
  bool inside_obstacle(const Vec2& p) const;
  /// Signed distance to the nearest obstacle (negative inside one); the
  /// workspace boundary is not counted.
  double obstacle_distance(const Vec2& p) const;
  bool segment_blocked(const Vec2& a, const Vec2& b) const;
  /// Distance along the ray to the first obstacle or workspace exit.
  double ray_clearance(const Vec2& origin, const Vec2& dir, double t_max) const;
};

enum class SensorKind { Lidar, Camera };

struct SensorSpec {
  SensorKind kind = SensorKind::Lidar;
  double range = 3.0;
  double fov = 1.0471975511965976;  // camera only
  int ray_count = 360;

  static SensorSpec lidar(double range = 3.0, int rays = 360);
  static SensorSpec camera(double range = 20.0, double fov = 1.0471975511965976,
                           int rays = 120);
};

/// Accumulated sensed occupancy over the position sub-grid. known_free bits
/// only ever flip false -> true; known_occupied records ray-hit evidence and
/// feeds planner collision checks only.
struct KnownFreeMap {
  GridPtr grid;
  std::vector<std::uint8_t> known_free;
  std::vector<std::uint8_t> known_occupied;

  KnownFreeMap() = default;
  explicit KnownFreeMap(GridPtr g)
      : grid(std::move(g)),
        known_free(grid->position_total(), 0),
        known_occupied(grid->position_total(), 0) {}

  std::size_t position_total() const { return known_free.size(); }
  Vec2 position_of(std::uint32_t pos_node) const;
  std::uint32_t nearest_position_node(const Vec2& p) const;
  std::size_t free_count() const;
};

struct SenseResult {
  std::vector<std::uint32_t> free_nodes;      // position-node ids
  std::vector<std::uint32_t> occupied_nodes;  // position-node ids
};

/// Cast rays from the vehicle position (full sweep for lidar, the heading
/// wedge for a camera) and mark position nodes along unobstructed segments.
/// Marking is conservative: a node is reported free only if its center is
/// outside every obstacle and the straight segment from the sensor to the
/// center is unobstructed. A sensor whose apex sits inside an obstacle
/// returns the empty set.
SenseResult sense(const Environment& env, const SensorSpec& spec, const KnownFreeMap& map,
                  std::span<const double> x);

/// Pointwise union; returns the newly freed position nodes.
std::vector<std::uint32_t> fuse(KnownFreeMap& map, const SenseResult& observed);

/// Signed-distance implicit surface of the known free space, extruded along
/// non-position dimensions. Non-periodic grid-boundary nodes are treated as
/// outside the free space regardless of the map (beyond the mapped domain is
/// unsafe); an empty map yields the uniform negative sentinel.
ScalarField implicit_obstacle(const KnownFreeMap& map);

/// Portable bitmap (P1) export of the known-free bits, for visual debugging.
void write_map_pbm(const KnownFreeMap& map, const std::string& path);

}  // namespace hjnav
