#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hjnav/dynamics.hpp"
#include "hjnav/grid.hpp"

namespace hjnav {

struct SolverConfig {
  double cfl = 0.5;              // fraction of the stable explicit step
  double convergence_tol = 1e-4; // max |dV| per unit pseudo-time
  int max_iterations = 20000;
  int derivative_order = 1;      // 1 (upwind) or 3 (WENO reconstruction)
  DissipationMode dissipation = DissipationMode::Local;
  bool parallel = true;          // OpenMP sweep; false selects the serial reference
  double time_horizon = 0.0;     // > 0: integrate this much pseudo-time, no residual stop
};

struct SolveReport {
  int iterations = 0;
  double elapsed_seconds = 0.0;
  double final_residual = 0.0;   // max |dV| per unit pseudo-time at the last sweep
  std::size_t nodes_updated_total = 0;
  bool converged = false;
  double pseudo_time = 0.0;
};

/// One-sided difference approximations of the gradient at a node, per
/// dimension. Periodic dimensions wrap; non-periodic edges use linearly
/// extrapolated ghost values (which reduces to the available one-sided
/// difference). Order 3 is a two-candidate weighted reconstruction with a
/// +/-2 node stencil.
void upwind_gradient(const ScalarField& field, const GridIndex& idx, int order,
                     Costate& left, Costate& right);

/// Dissipative closure of the analytic Hamiltonian over a left/right gradient
/// pair: H((left+right)/2) + sum_i alpha_i (right_i - left_i) / 2, with
/// alpha from control_jacobian_bounds. Consistent: left == right recovers
/// hamiltonian() exactly, and the added term upwinds the transport.
double numerical_hamiltonian(const VehicleModel& model, const StateVec& x,
                             const Costate& left, const Costate& right,
                             DissipationMode mode = DissipationMode::Local);

/// Stable pseudo-time step for the configured grid/model: cfl divided by the
/// largest sum_i alpha_i / dx_i over the active nodes (all nodes when the
/// subset is empty). Throws on underflow.
double cfl_time_step(const StateGrid& grid, const VehicleModel& model, const SolverConfig& cfg,
                     std::span<const std::uint32_t> active = {});

/// One stabilized Jacobi step of the variational inequality restricted to
/// `active` (all nodes when empty): V' = min(V + dtau * Hhat, l) at active
/// nodes, V' = V elsewhere. Returns the updated field and max |V' - V|.
std::pair<ScalarField, double> vi_step(const ScalarField& V, const ScalarField& l,
                                       const VehicleModel& model, const SolverConfig& cfg,
                                       std::span<const std::uint32_t> active = {});

/// Iterate vi_step over the whole grid until the residual drops below
/// convergence_tol (or max_iterations / the configured pseudo-time horizon is
/// reached). Results are bit-identical across thread schedules.
std::pair<ScalarField, SolveReport> solve(const ScalarField& V0, const ScalarField& l,
                                          const VehicleModel& model, const SolverConfig& cfg);

namespace detail {

/// Workspace for repeated sweeps on one grid/model pair: per-heading trig
/// tables and cached dissipation bounds.
struct SweepContext {
  const StateGrid* grid = nullptr;
  VehicleModel model;
  int order = 1;
  DissipationMode mode = DissipationMode::Local;
  bool parallel = true;
  std::vector<double> cos_phi, sin_phi;  // per heading index (empty for 1D)

  SweepContext(const StateGrid& g, const VehicleModel& m, const SolverConfig& cfg);

  double max_alpha_over_dx(std::span<const std::uint32_t> active) const;

  /// Jacobi sweep over all nodes: out[i] = min(in[i] + dtau*Hhat_i, l[i]).
  /// Returns max |out - in|.
  double full_sweep(std::span<const double> in, std::span<const double> l,
                    std::span<double> out, double dtau) const;

  /// Jacobi sweep over a node subset; new values land in `out_compact`
  /// (parallel to `active`), deltas in `delta_compact`. Returns max delta.
  double subset_sweep(std::span<const double> in, std::span<const double> l,
                      std::span<const std::uint32_t> active,
                      std::span<double> out_compact, std::span<double> delta_compact,
                      double dtau) const;
};

}  // namespace detail

}  // namespace hjnav
