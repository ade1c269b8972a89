#pragma once

#include <functional>
#include <vector>

#include "hjnav/scenario.hpp"

namespace hjnav {

struct TrajectorySample {
  double t = 0.0;
  StateVec x{};
  ControlVec u{};       // applied control
  ControlVec u_plan{};  // what the planner asked for
  FilterMode mode = FilterMode::Planner;
  double value = 0.0;
  double snapshot_time = 0.0;
  bool flagged = false;
};

enum class Outcome { ReachedGoal, Collided, Timeout };

std::string to_string(Outcome o);

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Outcome outcome = Outcome::Timeout;
  double min_obstacle_distance = 0.0;
};

struct RebuildRecord {
  double sim_time = 0.0;
  BrsMethod method = BrsMethod::Full;
  SolveReport report;
  std::size_t newly_free_count = 0;
};

struct EpisodeResult {
  Trajectory trajectory;
  std::vector<RebuildRecord> rebuilds;
  SafeSetSnapshot final_snapshot;
  KnownFreeMap final_map;
};

/// Classical 4-stage explicit step of the flow with u, d held constant;
/// heading wrapped to [-pi, pi).
StateVec integrate(const VehicleModel& model, const StateVec& x, const ControlVec& u,
                   const DisturbVec& d, double dt);

double wrap_angle(double a);

/// Rebuild override for the benchmark harness: receives the fused map, the
/// fresh implicit surface, the previous snapshot and the newly freed position
/// nodes, and returns the snapshot the episode continues with.
using RebuildHook =
    std::function<SafeSetSnapshot(const KnownFreeMap& map, const ScalarField& l_t,
                                  const SafeSetSnapshot& last,
                                  const std::vector<std::uint32_t>& newly_free, double sim_time)>;

/// Closed-loop episode: sense, fuse, filter, integrate; rebuild the safe set
/// every safety_horizon seconds with the selected method. Snapshot rebuild
/// wall time is recorded but does not consume simulation time. Throws
/// ConfigError when the start state fails validation.
EpisodeResult run_episode(const Scenario& sc, BrsMethod method,
                          const RebuildHook* hook = nullptr);

}  // namespace hjnav
