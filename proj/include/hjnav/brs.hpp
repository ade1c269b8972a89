#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hjnav/hji.hpp"

namespace hjnav {

enum class BrsMethod { Full, Warm, Local };

BrsMethod brs_method_from_string(const std::string& s);
std::string to_string(BrsMethod m);

/// A converged value field together with the activation level the filter
/// queries it at. The safe set is { x : interpolate(value, x) > epsilon }.
struct SafeSetSnapshot {
  ScalarField value;
  double computed_at = 0.0;
  double epsilon = 0.0;
  BrsMethod method = BrsMethod::Full;
  SolveReport report;
};

/// Node ids (full grid) within the derivative stencil radius of idx: +/-1 per
/// axis for first-order derivatives, +/-2 for the third-order scheme.
/// Wrap-aware on periodic dimensions, clipped at non-periodic edges.
std::vector<std::uint32_t> neighbors(const GridIndex& idx, const StateGrid& grid,
                                     int derivative_order = 1);

/// Expand a set of position-node ids to full-grid node ids (all non-position
/// coordinates).
std::vector<std::uint32_t> extrude_position_nodes(const StateGrid& grid,
                                                  std::span<const std::uint32_t> position_nodes);

/// Solve the VI from V0 = l_t over the whole grid.
SafeSetSnapshot full_recompute(const ScalarField& l_t, const VehicleModel& model,
                               const SolverConfig& cfg, double epsilon, double computed_at);

/// Warm-start initialization: l_t on newly freed nodes, V_last elsewhere,
/// then clamped to min(., l_t) so the under-approximation hypothesis holds
/// even where the signed-distance map moved against it.
/// `newly_free` holds position-node ids; extrusion is applied internally.
ScalarField warm_start_init(const ScalarField& V_last, const ScalarField& l_t,
                            std::span<const std::uint32_t> newly_free);

/// Solve from the warm-start initialization over the whole grid.
SafeSetSnapshot warm_solve(const ScalarField& V_last, const ScalarField& l_t,
                           std::span<const std::uint32_t> newly_free, const VehicleModel& model,
                           const SolverConfig& cfg, double epsilon, double computed_at);

struct LocalUpdateStats {
  std::size_t initial_queue = 0;
  std::size_t unique_enqueued = 0;
  std::vector<std::uint8_t> ever_enqueued;  // per full-grid node
};

/// Queue-driven value propagation: seed the queue with the newly freed nodes
/// plus their stencil neighbors, advance the value one CFL step per round,
/// drop nodes whose change stays within delta_tol, keep expanding through the
/// survivors' neighbors until the queue empties. Never-enqueued nodes keep
/// V_last bit-identical. delta_tol = delta_tol_scale * (value range of l_t).
SafeSetSnapshot local_update(const ScalarField& V_last, const ScalarField& l_t,
                             std::span<const std::uint32_t> newly_free, const VehicleModel& model,
                             const SolverConfig& cfg, double delta_tol_scale, double epsilon,
                             double computed_at, LocalUpdateStats* stats = nullptr);

constexpr double kDefaultDeltaTolScale = 1e-5;

}  // namespace hjnav
