#include "hjnav/brs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hjnav {

BrsMethod brs_method_from_string(const std::string& s) {
  if (s == "full") return BrsMethod::Full;
  if (s == "warm") return BrsMethod::Warm;
  if (s == "local") return BrsMethod::Local;
  throw std::invalid_argument("unknown BRS method: " + s);
}

std::string to_string(BrsMethod m) {
  switch (m) {
    case BrsMethod::Full: return "full";
    case BrsMethod::Warm: return "warm";
    case BrsMethod::Local: return "local";
  }
  return "?";
}

std::vector<std::uint32_t> neighbors(const GridIndex& idx, const StateGrid& grid,
                                     int derivative_order) {
  const int radius = derivative_order == 3 ? 2 : 1;
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(2 * radius * grid.dim_count));
  const std::uint32_t self = static_cast<std::uint32_t>(grid.flat(idx));
  for (int d = 0; d < grid.dim_count; ++d) {
    for (int off = -radius; off <= radius; ++off) {
      if (off == 0) continue;
      const int j = grid.shift(d, idx[d], off);
      GridIndex n = idx;
      n[d] = j;
      const std::uint32_t f = static_cast<std::uint32_t>(grid.flat(n));
      if (f != self) out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint32_t> extrude_position_nodes(const StateGrid& grid,
                                                  std::span<const std::uint32_t> position_nodes) {
  const std::size_t extrude = grid.node_total / grid.position_total();
  std::vector<std::uint32_t> out;
  out.reserve(position_nodes.size() * extrude);
  for (const std::uint32_t p : position_nodes) {
    const std::size_t base = static_cast<std::size_t>(p) * extrude;
    for (std::size_t k = 0; k < extrude; ++k) out.push_back(static_cast<std::uint32_t>(base + k));
  }
  return out;
}

SafeSetSnapshot full_recompute(const ScalarField& l_t, const VehicleModel& model,
                               const SolverConfig& cfg, double epsilon, double computed_at) {
  auto [v, report] = solve(l_t, l_t, model, cfg);
  SafeSetSnapshot snap;
  snap.value = std::move(v);
  snap.computed_at = computed_at;
  snap.epsilon = epsilon;
  snap.method = BrsMethod::Full;
  snap.report = report;
  return snap;
}

ScalarField warm_start_init(const ScalarField& V_last, const ScalarField& l_t,
                            std::span<const std::uint32_t> newly_free) {
  if (V_last.grid->node_total != l_t.grid->node_total)
    throw std::invalid_argument("warm_start_init: grid mismatch");
  ScalarField out = V_last;
  for (const std::uint32_t f : extrude_position_nodes(*out.grid, newly_free))
    out.values[f] = l_t.values[f];
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = std::min(out.values[i], l_t.values[i]);
  return out;
}

SafeSetSnapshot warm_solve(const ScalarField& V_last, const ScalarField& l_t,
                           std::span<const std::uint32_t> newly_free, const VehicleModel& model,
                           const SolverConfig& cfg, double epsilon, double computed_at) {
  const ScalarField v0 = warm_start_init(V_last, l_t, newly_free);
  auto [v, report] = solve(v0, l_t, model, cfg);
  SafeSetSnapshot snap;
  snap.value = std::move(v);
  snap.computed_at = computed_at;
  snap.epsilon = epsilon;
  snap.method = BrsMethod::Warm;
  snap.report = report;
  return snap;
}

namespace {

// Append the stencil neighbors of `flat` not yet in the mask.
void push_neighbors(const StateGrid& g, std::uint32_t flat, int radius,
                    std::vector<std::uint8_t>& mask, std::vector<std::uint32_t>& out) {
  const GridIndex c = g.unflatten(flat);
  for (int d = 0; d < g.dim_count; ++d) {
    for (int off = -radius; off <= radius; ++off) {
      if (off == 0) continue;
      const int j = g.shift(d, c[d], off);
      if (j == c[d]) continue;
      const std::uint32_t f = static_cast<std::uint32_t>(
          static_cast<std::size_t>(flat) +
          (static_cast<std::ptrdiff_t>(j) - c[d]) * static_cast<std::ptrdiff_t>(g.stride[d]));
      if (!mask[f]) {
        mask[f] = 1;
        out.push_back(f);
      }
    }
  }
}

}  // namespace

SafeSetSnapshot local_update(const ScalarField& V_last, const ScalarField& l_t,
                             std::span<const std::uint32_t> newly_free, const VehicleModel& model,
                             const SolverConfig& cfg, double delta_tol_scale, double epsilon,
                             double computed_at, LocalUpdateStats* stats) {
  if (V_last.grid->node_total != l_t.grid->node_total)
    throw std::invalid_argument("local_update: grid mismatch");
  const StateGrid& g = *V_last.grid;
  const auto t0 = std::chrono::steady_clock::now();

  SafeSetSnapshot snap;
  snap.computed_at = computed_at;
  snap.epsilon = epsilon;
  snap.method = BrsMethod::Local;
  snap.value = V_last;

  if (stats) {
    stats->initial_queue = 0;
    stats->unique_enqueued = 0;
    stats->ever_enqueued.assign(g.node_total, 0);
  }

  if (newly_free.empty()) {
    snap.report.converged = true;
    snap.report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return snap;
  }

  const auto [l_min, l_max] = std::minmax_element(l_t.values.begin(), l_t.values.end());
  const double delta_tol = delta_tol_scale * (*l_max - *l_min);

  detail::SweepContext ctx(g, model, cfg);
  const int radius = cfg.derivative_order == 3 ? 2 : 1;

  // Seed queue: newly freed nodes plus one stencil halo.
  std::vector<std::uint8_t> in_queue(g.node_total, 0);
  std::vector<std::uint8_t> ever(g.node_total, 0);
  std::vector<std::uint32_t> active;
  const std::vector<std::uint32_t> seeds = extrude_position_nodes(g, newly_free);
  for (const std::uint32_t f : seeds) {
    if (!in_queue[f]) {
      in_queue[f] = 1;
      active.push_back(f);
    }
  }
  {
    std::vector<std::uint32_t> halo;
    for (const std::uint32_t f : seeds) push_neighbors(g, f, radius, in_queue, halo);
    active.insert(active.end(), halo.begin(), halo.end());
  }
  std::sort(active.begin(), active.end());

  std::vector<double>& v = snap.value.values;
  // Warm-start values on the queue only; everything else keeps V_last bits.
  for (const std::uint32_t f : seeds) v[f] = l_t.values[f];
  for (const std::uint32_t f : active) v[f] = std::min(v[f], l_t.values[f]);
  for (const std::uint32_t f : active) ever[f] = 1;

  if (stats) stats->initial_queue = active.size();

  std::vector<double> compact, delta;
  std::vector<std::uint32_t> survivors, next_active;
  int rounds = 0;
  while (!active.empty()) {
    if (rounds >= cfg.max_iterations)
      throw std::runtime_error(
          "local_update: queue failed to empty within max_iterations (delta_tol too small)");
    const double dtau = cfl_time_step(g, model, cfg, active);
    compact.resize(active.size());
    delta.resize(active.size());

    if (cfg.derivative_order == 1) {
      ctx.subset_sweep(v, l_t.values, active, compact, delta, dtau);
    } else {
      std::vector<double> stage1(active.size()), saved(active.size());
      ctx.subset_sweep(v, l_t.values, active, stage1, delta, dtau);
      for (std::size_t k = 0; k < active.size(); ++k) {
        saved[k] = v[active[k]];
        v[active[k]] = stage1[k];
      }
      ctx.subset_sweep(v, l_t.values, active, compact, delta, dtau);
      for (std::size_t k = 0; k < active.size(); ++k) {
        const std::uint32_t f = active[k];
        v[f] = saved[k];
        compact[k] = std::min(0.5 * (saved[k] + compact[k]), l_t.values[f]);
        delta[k] = std::abs(compact[k] - saved[k]);
      }
    }

    for (std::size_t k = 0; k < active.size(); ++k) v[active[k]] = compact[k];
    snap.report.nodes_updated_total += active.size();
    ++rounds;

    survivors.clear();
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (delta[k] > delta_tol) survivors.push_back(active[k]);
    }

    for (const std::uint32_t f : active) in_queue[f] = 0;
    next_active.clear();
    for (const std::uint32_t f : survivors) {
      if (!in_queue[f]) {
        in_queue[f] = 1;
        next_active.push_back(f);
      }
    }
    for (const std::uint32_t f : survivors) push_neighbors(g, f, radius, in_queue, next_active);
    std::sort(next_active.begin(), next_active.end());
    active.swap(next_active);
    for (const std::uint32_t f : active) ever[f] = 1;
  }

  snap.report.iterations = rounds;
  snap.report.converged = true;
  snap.report.final_residual = 0.0;
  snap.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (stats) {
    std::size_t unique = 0;
    for (const std::uint8_t b : ever) unique += b;
    stats->unique_enqueued = unique;
    stats->ever_enqueued = std::move(ever);
  }
  return snap;
}

}  // namespace hjnav
