#include "hjnav/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hjnav {

Obstacle Obstacle::rect(Vec2 lo, Vec2 hi) {
  if (!(lo[0] < hi[0]) || !(lo[1] < hi[1]))
    throw std::invalid_argument("obstacle: degenerate rectangle");
  Obstacle o;
  o.shape = Shape::Rect;
  o.rect_min = lo;
  o.rect_max = hi;
  return o;
}

Obstacle Obstacle::circle(Vec2 c, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("obstacle: circle radius must be positive");
  Obstacle o;
  o.shape = Shape::Circle;
  o.center = c;
  o.radius = r;
  return o;
}

bool Obstacle::contains(const Vec2& p) const {
  if (shape == Shape::Rect) {
    return p[0] >= rect_min[0] && p[0] <= rect_max[0] && p[1] >= rect_min[1] &&
           p[1] <= rect_max[1];
  }
  const double dx = p[0] - center[0], dy = p[1] - center[1];
  return dx * dx + dy * dy <= radius * radius;
}

double Obstacle::distance(const Vec2& p) const {
  if (shape == Shape::Circle) {
    const double dx = p[0] - center[0], dy = p[1] - center[1];
    return std::sqrt(dx * dx + dy * dy) - radius;
  }
  const double qx = std::max({rect_min[0] - p[0], 0.0, p[0] - rect_max[0]});
  const double qy = std::max({rect_min[1] - p[1], 0.0, p[1] - rect_max[1]});
  if (qx > 0.0 || qy > 0.0) return std::sqrt(qx * qx + qy * qy);
  // Inside: negative distance to the nearest face.
  const double inner = std::min(std::min(p[0] - rect_min[0], rect_max[0] - p[0]),
                                std::min(p[1] - rect_min[1], rect_max[1] - p[1]));
  return -inner;
}

namespace {

// Liang-Barsky clip of segment [a, b] against an axis-aligned box.
bool segment_vs_rect(const Vec2& a, const Vec2& b, const Vec2& lo, const Vec2& hi) {
  double t0 = 0.0, t1 = 1.0;
  const double d[2] = {b[0] - a[0], b[1] - a[1]};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (a[i] < lo[i] || a[i] > hi[i]) return false;
      continue;
    }
    double ta = (lo[i] - a[i]) / d[i];
    double tb = (hi[i] - a[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

bool segment_vs_circle(const Vec2& a, const Vec2& b, const Vec2& c, double r) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double fx = a[0] - c[0], fy = a[1] - c[1];
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(-(fx * dx + fy * dy) / len2, 0.0, 1.0);
  const double px = fx + t * dx, py = fy + t * dy;
  return px * px + py * py <= r * r;
}

}  // namespace

bool Obstacle::intersects_segment(const Vec2& a, const Vec2& b) const {
  if (shape == Shape::Rect) return segment_vs_rect(a, b, rect_min, rect_max);
  return segment_vs_circle(a, b, center, radius);
}

std::optional<double> Obstacle::ray_hit(const Vec2& origin, const Vec2& dir, double t_max) const {
  if (shape == Shape::Rect) {
    double t0 = 0.0, t1 = t_max;
    for (int i = 0; i < 2; ++i) {
      if (std::abs(dir[i]) < 1e-15) {
        if (origin[i] < rect_min[i] || origin[i] > rect_max[i]) return std::nullopt;
        continue;
      }
      double ta = (rect_min[i] - origin[i]) / dir[i];
      double tb = (rect_max[i] - origin[i]) / dir[i];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return std::nullopt;
    }
    return t0;
  }
  const double fx = origin[0] - center[0], fy = origin[1] - center[1];
  const double b = fx * dir[0] + fy * dir[1];
  const double c = fx * fx + fy * fy - radius * radius;
  const double disc = b * b - c;  // dir assumed unit length
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double t = -b - sq;
  if (t < 0.0) t = -b + sq;
  if (t < 0.0 || t > t_max) return std::nullopt;
  return t;
}

bool Environment::in_workspace(const Vec2& p) const {
  return p[0] >= workspace_min[0] && p[0] <= workspace_max[0] && p[1] >= workspace_min[1] &&
         p[1] <= workspace_max[1];
}

bool Environment::inside_obstacle(const Vec2& p) const {
  for (const auto& o : obstacles)
    if (o.contains(p)) return true;
  return false;
}

double Environment::obstacle_distance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles) best = std::min(best, o.distance(p));
  return best;
}

bool Environment::segment_blocked(const Vec2& a, const Vec2& b) const {
  for (const auto& o : obstacles)
    if (o.intersects_segment(a, b)) return true;
  return false;
}

double Environment::ray_clearance(const Vec2& origin, const Vec2& dir, double t_max) const {
  double t = t_max;
  // Clip against the workspace box first.
  for (int i = 0; i < 2; ++i) {
    if (std::abs(dir[i]) < 1e-15) continue;
    const double exit_t =
        dir[i] > 0 ? (workspace_max[i] - origin[i]) / dir[i] : (workspace_min[i] - origin[i]) / dir[i];
    t = std::min(t, std::max(exit_t, 0.0));
  }
  for (const auto& o : obstacles) {
    const auto hit = o.ray_hit(origin, dir, t);
    if (hit) t = std::min(t, *hit);
  }
  return t;
}

SensorSpec SensorSpec::lidar(double range, int rays) {
  SensorSpec s;
  s.kind = SensorKind::Lidar;
  s.range = range;
  s.ray_count = rays;
  return s;
}

SensorSpec SensorSpec::camera(double range, double fov, int rays) {
  SensorSpec s;
  s.kind = SensorKind::Camera;
  s.range = range;
  s.fov = fov;
  s.ray_count = rays;
  return s;
}

Vec2 KnownFreeMap::position_of(std::uint32_t pos_node) const {
  const StateGrid& g = *grid;
  const std::uint32_t ny = static_cast<std::uint32_t>(g.node_counts[1]);
  const std::uint32_t ix = pos_node / ny;
  const std::uint32_t iy = pos_node % ny;
  return {g.coord(0, static_cast<int>(ix)), g.coord(1, static_cast<int>(iy))};
}

std::uint32_t KnownFreeMap::nearest_position_node(const Vec2& p) const {
  const StateGrid& g = *grid;
  auto clamp_idx = [&](int d, double v) {
    const int i = static_cast<int>(std::lround((v - g.lower[d]) / g.spacing[d]));
    return std::clamp(i, 0, g.node_counts[d] - 1);
  };
  const int ix = clamp_idx(0, p[0]);
  const int iy = clamp_idx(1, p[1]);
  return static_cast<std::uint32_t>(ix * g.node_counts[1] + iy);
}

std::size_t KnownFreeMap::free_count() const {
  std::size_t n = 0;
  for (const auto b : known_free) n += b;
  return n;
}

SenseResult sense(const Environment& env, const SensorSpec& spec, const KnownFreeMap& map,
                  std::span<const double> x) {
  const StateGrid& g = *map.grid;
  if (g.position_dims != 2)
    throw std::invalid_argument("sense: sensing requires a 2D position sub-grid");
  const Vec2 p{x[0], x[1]};
  if (!env.in_workspace(p)) throw std::invalid_argument("sense: vehicle outside workspace");

  SenseResult result;
  if (env.inside_obstacle(p)) return result;  // fully occluded apex

  const double hmin = std::min(g.spacing[0], g.spacing[1]);
  const double step = 0.25 * hmin;
  const double mark_radius = 0.5 * hmin;

  std::vector<std::uint8_t> candidate(map.position_total(), 0);
  std::vector<std::uint8_t> occupied(map.position_total(), 0);

  const int rays = std::max(spec.ray_count, 1);
  const bool is_camera = spec.kind == SensorKind::Camera;
  const double heading = x.size() > 2 ? x[2] : 0.0;
  const double a0 = is_camera ? heading - 0.5 * spec.fov : 0.0;
  const double da = is_camera ? (rays > 1 ? spec.fov / (rays - 1) : 0.0) : 2.0 * M_PI / rays;

  const int nx = g.node_counts[0], ny = g.node_counts[1];
  auto try_mark = [&](const Vec2& q) {
    const int ix = static_cast<int>(std::lround((q[0] - g.lower[0]) / g.spacing[0]));
    const int iy = static_cast<int>(std::lround((q[1] - g.lower[1]) / g.spacing[1]));
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return;
    const Vec2 c{g.coord(0, ix), g.coord(1, iy)};
    const double dx = c[0] - q[0], dy = c[1] - q[1];
    if (dx * dx + dy * dy > mark_radius * mark_radius) return;
    candidate[static_cast<std::size_t>(ix) * ny + iy] = 1;
  };

  for (int r = 0; r < rays; ++r) {
    const double ang = a0 + da * r;
    const Vec2 dir{std::cos(ang), std::sin(ang)};
    const double t_ws = env.ray_clearance(p, dir, spec.range);  // includes obstacles
    double t_obstacle = std::numeric_limits<double>::infinity();
    for (const auto& o : env.obstacles) {
      const auto hit = o.ray_hit(p, dir, spec.range);
      if (hit) t_obstacle = std::min(t_obstacle, *hit);
    }
    for (double t = 0.0; t < t_ws; t += step) try_mark({p[0] + t * dir[0], p[1] + t * dir[1]});
    try_mark({p[0] + t_ws * dir[0] * (1.0 - 1e-9), p[1] + t_ws * dir[1] * (1.0 - 1e-9)});

    // Ray-hit evidence: the cell just past the hit point, when its center is
    // truly occupied.
    if (t_obstacle < spec.range && t_obstacle <= t_ws + 1e-12) {
      const double tq = t_obstacle + 0.5 * hmin;
      const Vec2 q{p[0] + tq * dir[0], p[1] + tq * dir[1]};
      const int ix = static_cast<int>(std::lround((q[0] - g.lower[0]) / g.spacing[0]));
      const int iy = static_cast<int>(std::lround((q[1] - g.lower[1]) / g.spacing[1]));
      if (ix >= 0 && ix < nx && iy >= 0 && iy < ny) {
        const Vec2 c{g.coord(0, ix), g.coord(1, iy)};
        if (env.inside_obstacle(c)) occupied[static_cast<std::size_t>(ix) * ny + iy] = 1;
      }
    }
  }

  // Exact gate: keep only nodes whose center is obstacle-free with a clear
  // line of sight from the sensor.
  for (std::uint32_t f = 0; f < candidate.size(); ++f) {
    if (!candidate[f]) continue;
    const Vec2 c = map.position_of(f);
    if (!env.in_workspace(c)) continue;
    if (env.inside_obstacle(c)) continue;
    if (env.segment_blocked(p, c)) continue;
    result.free_nodes.push_back(f);
  }
  for (std::uint32_t f = 0; f < occupied.size(); ++f)
    if (occupied[f]) result.occupied_nodes.push_back(f);
  return result;
}

std::vector<std::uint32_t> fuse(KnownFreeMap& map, const SenseResult& observed) {
  std::vector<std::uint32_t> delta;
  for (const std::uint32_t f : observed.free_nodes) {
    if (!map.known_free[f]) {
      map.known_free[f] = 1;
      delta.push_back(f);
    }
  }
  for (const std::uint32_t f : observed.occupied_nodes) map.known_occupied[f] = 1;
  return delta;
}

ScalarField implicit_obstacle(const KnownFreeMap& map) {
  const StateGrid& g = *map.grid;
  const std::size_t total = map.position_total();
  std::vector<std::uint8_t> inside(total);

  // Strides over the position sub-grid (row-major, last position dim fastest).
  std::array<std::size_t, kMaxDim> pstride{};
  std::size_t s = 1;
  for (int d = g.position_dims - 1; d >= 0; --d) {
    pstride[d] = s;
    s *= static_cast<std::size_t>(g.node_counts[d]);
  }

  for (std::size_t f = 0; f < total; ++f) {
    bool boundary = false;
    std::size_t rem = f;
    for (int d = 0; d < g.position_dims; ++d) {
      const int i = static_cast<int>(rem / pstride[d]);
      rem %= pstride[d];
      if (!g.periodic[d] && (i == 0 || i == g.node_counts[d] - 1)) boundary = true;
    }
    inside[f] = (!boundary && map.known_free[f]) ? 1 : 0;
  }
  return signed_distance(map.grid, std::span<const std::uint8_t>(inside));
}

void write_map_pbm(const KnownFreeMap& map, const std::string& path) {
  const StateGrid& g = *map.grid;
  if (g.position_dims != 2) throw std::invalid_argument("write_map_pbm: needs a 2D position grid");
  const int nx = g.node_counts[0], ny = g.node_counts[1];
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_map_pbm: cannot open " + path);
  os << "P1\n" << nx << " " << ny << "\n";
  // Image rows top to bottom = decreasing y; 1 = unknown/occupied (dark).
  for (int iy = ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < nx; ++ix) {
      os << (map.known_free[static_cast<std::size_t>(ix) * ny + iy] ? 0 : 1);
      os << (ix + 1 == nx ? '\n' : ' ');
    }
  }
}

}  // namespace hjnav
