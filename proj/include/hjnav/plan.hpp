#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hjnav/dynamics.hpp"
#include "hjnav/env.hpp"

namespace hjnav {

enum class PlannerKind { Rrt, Spline, Optimistic };

PlannerKind planner_kind_from_string(const std::string& s);
std::string to_string(PlannerKind k);

struct PlannerConfig {
  PlannerKind kind = PlannerKind::Optimistic;
  double replan_period = 1.0;  // s of sim time
  std::uint64_t seed = 0;
  double heading_gain = 2.0;
  double lookahead = 0.8;      // m, pure-pursuit target distance
  double cruise_speed = 1.0;   // desired speed for acceleration-controlled models
  // RRT only:
  double rrt_step = 0.5;       // m, tree extension step
  int rrt_max_samples = 3000;
  double rrt_goal_bias = 0.1;
};

/// Goal-seeking planners that treat unknown space as free: an RRT over the
/// known-obstacle map, a Hermite-spline tracker, and a scripted
/// head-at-the-goal controller. All are deterministic under a fixed seed.
class Planner {
 public:
  Planner(const PlannerConfig& cfg, const Environment& env, const VehicleModel& model);

  /// Control toward the goal given the current belief map. Always admissible.
  ControlVec plan_control(double t, const StateVec& x, const KnownFreeMap& map);

  const std::vector<Vec2>& current_path() const { return path_; }
  bool fallback_flagged() const { return fallback_flagged_; }

 private:
  void replan_rrt(const StateVec& x, const KnownFreeMap& map);
  void replan_spline(const StateVec& x);
  Vec2 pursuit_target(const Vec2& p) const;
  ControlVec track_point(const StateVec& x, const Vec2& target) const;
  bool segment_known_blocked(const Vec2& a, const Vec2& b, const KnownFreeMap& map) const;

  PlannerConfig cfg_;
  const Environment* env_;
  VehicleModel model_;
  std::mt19937_64 rng_;
  std::vector<Vec2> path_;
  double next_replan_ = 0.0;
  bool have_path_ = false;
  bool fallback_flagged_ = false;
};

}  // namespace hjnav
