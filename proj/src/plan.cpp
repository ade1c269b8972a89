#include "hjnav/plan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hjnav {

namespace {

double wrap_pi(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace

PlannerKind planner_kind_from_string(const std::string& s) {
  if (s == "rrt") return PlannerKind::Rrt;
  if (s == "spline") return PlannerKind::Spline;
  if (s == "optimistic") return PlannerKind::Optimistic;
  throw std::invalid_argument("unknown planner kind: " + s);
}

std::string to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::Rrt: return "rrt";
    case PlannerKind::Spline: return "spline";
    case PlannerKind::Optimistic: return "optimistic";
  }
  return "?";
}

Planner::Planner(const PlannerConfig& cfg, const Environment& env, const VehicleModel& model)
    : cfg_(cfg), env_(&env), model_(model), rng_(cfg.seed ^ 0x9e3779b97f4a7c15ull) {}

bool Planner::segment_known_blocked(const Vec2& a, const Vec2& b, const KnownFreeMap& map) const {
  const StateGrid& g = *map.grid;
  const double hmin = std::min(g.spacing[0], g.spacing[1]);
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * hmin))));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const Vec2 q{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    if (!env_->in_workspace(q)) return true;
    if (map.known_occupied[map.nearest_position_node(q)]) return true;
  }
  return false;
}

void Planner::replan_rrt(const StateVec& x, const KnownFreeMap& map) {
  const Vec2 start{x[0], x[1]};
  const Vec2 goal = env_->goal.center;
  const double goal_r = env_->goal.radius;

  std::vector<Vec2> nodes{start};
  std::vector<int> parent{-1};
  std::uniform_real_distribution<double> ux(env_->workspace_min[0], env_->workspace_max[0]);
  std::uniform_real_distribution<double> uy(env_->workspace_min[1], env_->workspace_max[1]);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  int goal_node = -1;
  if (std::hypot(goal[0] - start[0], goal[1] - start[1]) <= goal_r) goal_node = 0;

  for (int it = 0; it < cfg_.rrt_max_samples && goal_node < 0; ++it) {
    const Vec2 sample = coin(rng_) < cfg_.rrt_goal_bias ? goal : Vec2{ux(rng_), uy(rng_)};
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      const double dx = nodes[i][0] - sample[0], dy = nodes[i][1] - sample[1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    const double d = std::sqrt(best_d2);
    if (d < 1e-9) continue;
    const double s = std::min(1.0, cfg_.rrt_step / d);
    const Vec2 next{nodes[best][0] + s * (sample[0] - nodes[best][0]),
                    nodes[best][1] + s * (sample[1] - nodes[best][1])};
    // Optimistic collision check: only space the sensor has seen occupied
    // blocks an edge; unknown space is assumed free.
    if (segment_known_blocked(nodes[best], next, map)) continue;
    nodes.push_back(next);
    parent.push_back(best);
    if (std::hypot(goal[0] - next[0], goal[1] - next[1]) <= goal_r)
      goal_node = static_cast<int>(nodes.size()) - 1;
  }

  path_.clear();
  if (goal_node < 0) {
    fallback_flagged_ = true;
    have_path_ = false;
    return;
  }
  for (int i = goal_node; i >= 0; i = parent[i]) path_.push_back(nodes[i]);
  std::reverse(path_.begin(), path_.end());
  have_path_ = true;
}

void Planner::replan_spline(const StateVec& x) {
  // Cubic Hermite from the vehicle pose to the goal pose, tangent magnitudes
  // tied to the separation.
  const Vec2 p0{x[0], x[1]};
  const Vec2 p1 = env_->goal.center;
  const double L = std::max(std::hypot(p1[0] - p0[0], p1[1] - p0[1]), 1e-6);
  const Vec2 m0{L * std::cos(x[2]), L * std::sin(x[2])};
  const Vec2 m1{L * std::cos(env_->goal.heading), L * std::sin(env_->goal.heading)};

  constexpr int kSamples = 100;
  path_.clear();
  path_.reserve(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) {
    const double s = static_cast<double>(i) / kSamples;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    path_.push_back({h00 * p0[0] + h10 * m0[0] + h01 * p1[0] + h11 * m1[0],
                     h00 * p0[1] + h10 * m0[1] + h01 * p1[1] + h11 * m1[1]});
  }
  have_path_ = true;
}

Vec2 Planner::pursuit_target(const Vec2& p) const {
  if (path_.empty()) return env_->goal.center;
  // Walk the path from the closest vertex; target the first point at least
  // one lookahead away.
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path_.size(); ++i) {
    const double d = std::hypot(path_[i][0] - p[0], path_[i][1] - p[1]);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  for (std::size_t i = nearest; i < path_.size(); ++i) {
    if (std::hypot(path_[i][0] - p[0], path_[i][1] - p[1]) >= cfg_.lookahead) return path_[i];
  }
  return path_.back();
}

ControlVec Planner::track_point(const StateVec& x, const Vec2& target) const {
  const double bearing = std::atan2(target[1] - x[1], target[0] - x[0]);
  const double err = wrap_pi(bearing - x[2]);
  ControlVec u{};
  const double omega = std::clamp(cfg_.heading_gain * err, model_.control_lo[1], model_.control_hi[1]);
  if (model_.kind == ModelKind::Dubins3) {
    const double v_lo = model_.control_lo[0], v_hi = model_.control_hi[0];
    u[0] = v_lo + (v_hi - v_lo) * std::max(0.0, std::cos(err));
    u[1] = omega;
  } else if (model_.kind == ModelKind::Dubins4) {
    const double v_des = cfg_.cruise_speed * std::max(0.0, std::cos(err));
    u[0] = std::clamp(v_des - x[3], model_.control_lo[0], model_.control_hi[0]);
    u[1] = omega;
  } else {
    u[0] = std::clamp(target[0] - x[0], model_.control_lo[0], model_.control_hi[0]);
  }
  return u;
}

ControlVec Planner::plan_control(double t, const StateVec& x, const KnownFreeMap& map) {
  if (cfg_.kind != PlannerKind::Optimistic && (!have_path_ || t >= next_replan_ - 1e-12)) {
    if (cfg_.kind == PlannerKind::Rrt)
      replan_rrt(x, map);
    else
      replan_spline(x);
    next_replan_ = t + cfg_.replan_period;
  }
  const Vec2 p{x[0], x[1]};
  const Vec2 target =
      (cfg_.kind == PlannerKind::Optimistic || !have_path_) ? env_->goal.center : pursuit_target(p);
  return track_point(x, target);
}

}  // namespace hjnav
