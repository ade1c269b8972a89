#pragma once

#include <optional>

#include "hjnav/brs.hpp"
#include "hjnav/dynamics.hpp"

namespace hjnav {

struct SafetyConfig {
  double epsilon_scale = 1.5;              // activation level in position cell diagonals
  std::optional<double> epsilon_override;  // absolute value; 0 recovers the boundary rule
  bool hysteresis = false;                 // exit safety mode only above 1.5 * epsilon
};

/// Activation level in value units for the given grid.
double resolve_epsilon(const StateGrid& grid, const SafetyConfig& cfg);

enum class FilterMode { Planner, Safety };

struct FilterDecision {
  FilterMode mode = FilterMode::Planner;
  ControlVec control{};
  double value_at_state = 0.0;
  double snapshot_time = 0.0;
  bool flagged = false;  // out-of-grid state or gradient plateau
};

/// Central-difference gradient at the 2^n nodes surrounding x, multilinearly
/// interpolated. x must be in bounds on non-periodic dimensions.
Costate value_gradient(const ScalarField& field, const StateVec& x);

/// Reachability-optimal control at x: interpolated value gradient fed to the
/// analytic box maximizer. Plateau (vanishing gradient) falls back to the
/// tie-broken upper-bound control and sets *flagged.
ControlVec safe_control(const SafeSetSnapshot& snapshot, const VehicleModel& model,
                        const StateVec& x, bool* flagged = nullptr);

/// Least-restrictive filter: pass the planner's control through while the
/// state sits strictly inside the safe set, switch to the optimal safe
/// control otherwise. A state outside the grid is treated as value -inf
/// (safety mode, steering toward the grid interior, flagged).
/// `in_safety_mode` carries the hysteresis state between calls.
FilterDecision filter(const SafeSetSnapshot& snapshot, const VehicleModel& model,
                      const StateVec& x, const ControlVec& u_plan, const SafetyConfig& cfg,
                      bool in_safety_mode = false);

}  // namespace hjnav
