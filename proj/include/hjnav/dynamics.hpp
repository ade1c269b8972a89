#pragma once

#include <array>
#include <span>
#include <string>

#include "hjnav/grid.hpp"

namespace hjnav {

enum class ModelKind { Dubins3, Dubins4, Integrator1D };

using StateVec = std::array<double, kMaxDim>;
using ControlVec = std::array<double, 2>;
using DisturbVec = std::array<double, 2>;

/// Gradient of the value function at a state, one component per state dim.
using Costate = std::array<double, kMaxDim>;

/// Vehicle dynamics with box control/disturbance bounds and the closed-form
/// optimizers needed by the reachability Hamiltonian.
///
/// State layouts:
///   Dubins3      (px, py, phi)     controls (v, omega), disturbance (dx, dy)
///   Dubins4      (px, py, phi, v)  controls (a, omega), optional (dx, dy)
///   Integrator1D (x)               control (u), no disturbance
struct VehicleModel {
  ModelKind kind = ModelKind::Dubins3;

  // Per-channel closed intervals. Dubins3: [v, omega]; Dubins4: [a, omega];
  // Integrator1D: [u].
  std::array<double, 2> control_lo{};
  std::array<double, 2> control_hi{};
  double disturbance_radius = 0.0;  // |dx|, |dy| <= d_r

  // Dubins4 only: speed extent of the state grid, used by the global
  // dissipation bound.
  double speed_abs_max = 0.0;

  int state_dims() const;
  int control_dims() const;
  int position_dims() const { return kind == ModelKind::Integrator1D ? 1 : 2; }
  bool heading_periodic() const { return kind != ModelKind::Integrator1D; }
  int heading_dim() const { return 2; }

  static VehicleModel dubins3(double v_min, double v_max, double omega_max, double d_r);
  static VehicleModel dubins4(double a_max, double omega_max, double speed_abs_max,
                              double d_r = 0.0);
  static VehicleModel integrator1d(double u_min = -1.0, double u_max = 1.0);
};

enum class DissipationMode { Local, Global };

/// State derivative f(x, u, d). Throws if u or d violates the bounds.
StateVec flow(const VehicleModel& model, const StateVec& x, const ControlVec& u,
              const DisturbVec& d);

/// argmax over the control box of p . f(x, u, d); bang-bang with ties (zero
/// costate coefficient) resolved to the upper bound of the channel.
ControlVec optimal_control(const VehicleModel& model, const StateVec& x, const Costate& p);

/// argmin over the disturbance box of p . f; zero-coefficient ties resolve to
/// +d_r (value-neutral).
DisturbVec optimal_disturbance(const VehicleModel& model, const StateVec& x, const Costate& p);

/// H(x, p) = max_u min_d  p . f(x, u, d), evaluated at the box optimizers.
double hamiltonian(const VehicleModel& model, const StateVec& x, const Costate& p);

/// Per-dimension dissipation coefficients alpha_i >= max_{u,d} |f_i(x,u,d)|.
/// Local mode uses the state at the node (Dubins4 speed); global modeuses the
/// grid-wide speed envelope.
Costate control_jacobian_bounds(const VehicleModel& model, const StateVec& x,
                                DissipationMode mode = DissipationMode::Local);

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

}  // namespace hjnav
