#include "hjnav/hji.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hjnav {

namespace {

// Value at coordinate offset `off` along `dim`, wrapping periodic dimensions
// and linearly extrapolating ghost nodes past non-periodic edges (so that an
// edge node sees its one available one-sided difference on both sides).
inline double neighbor_value(const double* v, const StateGrid& g, int coord, std::size_t flat,
                             int dim, int off) {
  const int n = g.node_counts[dim];
  const std::size_t s = g.stride[dim];
  int j = coord + off;
  if (g.periodic[dim]) {
    j %= n;
    if (j < 0) j += n;
    return v[flat + (static_cast<std::ptrdiff_t>(j) - coord) * static_cast<std::ptrdiff_t>(s)];
  }
  if (j >= 0 && j < n) {
    return v[flat + static_cast<std::ptrdiff_t>(off) * static_cast<std::ptrdiff_t>(s)];
  }
  const std::size_t line_base = flat - static_cast<std::size_t>(coord) * s;
  if (j < 0) {
    const double v0 = v[line_base];
    const double v1 = v[line_base + s];
    return v0 + j * (v1 - v0);
  }
  const double vn1 = v[line_base + static_cast<std::size_t>(n - 1) * s];
  const double vn2 = v[line_base + static_cast<std::size_t>(n - 2) * s];
  return vn1 + (j - (n - 1)) * (vn1 - vn2);
}

inline double weno_pair(double a, double b, double c) {
  // Weighted blend of the biased candidate (3b - a)/2 and the central
  // candidate (b + c)/2, weights from local smoothness.
  const double beta0 = (b - a) * (b - a);
  const double beta1 = (c - b) * (c - b);
  const double eps = 1e-6 * std::max({a * a, b * b, c * c}) + 1e-99;
  const double w0 = (1.0 / 3.0) / ((eps + beta0) * (eps + beta0));
  const double w1 = (2.0 / 3.0) / ((eps + beta1) * (eps + beta1));
  return (w0 * (1.5 * b - 0.5 * a) + w1 * 0.5 * (b + c)) / (w0 + w1);
}

inline void gradient_at(const double* v, const StateGrid& g, const GridIndex& c,
                        std::size_t flat, int order, Costate& left, Costate& right) {
  const double center = v[flat];
  for (int d = 0; d < g.dim_count; ++d) {
    const double h = g.spacing[d];
    const double vm1 = neighbor_value(v, g, c[d], flat, d, -1);
    const double vp1 = neighbor_value(v, g, c[d], flat, d, +1);
    if (order == 1) {
      left[d] = (center - vm1) / h;
      right[d] = (vp1 - center) / h;
    } else {
      const double vm2 = neighbor_value(v, g, c[d], flat, d, -2);
      const double vp2 = neighbor_value(v, g, c[d], flat, d, +2);
      const double d1 = (vm1 - vm2) / h;
      const double d2 = (center - vm1) / h;
      const double d3 = (vp1 - center) / h;
      const double e1 = (vp2 - vp1) / h;
      left[d] = weno_pair(d1, d2, d3);
      right[d] = weno_pair(e1, d3, d2);
    }
  }
}

// Analytic Hamiltonian with precomputed heading trig; must agree with
// dynamics::hamiltonian (cross-checked in tests).
inline double model_hamiltonian(const VehicleModel& m, double cph, double sph, double speed,
                                const Costate& p) {
  switch (m.kind) {
    case ModelKind::Dubins3: {
      const double cv = p[0] * cph + p[1] * sph;
      const double v = cv >= 0.0 ? m.control_hi[0] : m.control_lo[0];
      const double omega_term = p[2] >= 0.0 ? p[2] * m.control_hi[1] : p[2] * m.control_lo[1];
      return cv * v + omega_term - m.disturbance_radius * (std::abs(p[0]) + std::abs(p[1]));
    }
    case ModelKind::Dubins4: {
      const double cv = p[0] * cph + p[1] * sph;
      const double omega_term = p[2] >= 0.0 ? p[2] * m.control_hi[1] : p[2] * m.control_lo[1];
      const double accel_term = p[3] >= 0.0 ? p[3] * m.control_hi[0] : p[3] * m.control_lo[0];
      return cv * speed + omega_term + accel_term -
             m.disturbance_radius * (std::abs(p[0]) + std::abs(p[1]));
    }
    case ModelKind::Integrator1D:
      return p[0] >= 0.0 ? p[0] * m.control_hi[0] : p[0] * m.control_lo[0];
  }
  return 0.0;
}

inline void model_alpha(const VehicleModel& m, double speed, DissipationMode mode, Costate& a) {
  switch (m.kind) {
    case ModelKind::Dubins3:
      a[0] = m.control_hi[0] + m.disturbance_radius;
      a[1] = a[0];
      a[2] = std::max(std::abs(m.control_lo[1]), std::abs(m.control_hi[1]));
      break;
    case ModelKind::Dubins4: {
      const double s = mode == DissipationMode::Local ? std::abs(speed) : m.speed_abs_max;
      a[0] = s + m.disturbance_radius;
      a[1] = a[0];
      a[2] = std::max(std::abs(m.control_lo[1]), std::abs(m.control_hi[1]));
      a[3] = std::max(std::abs(m.control_lo[0]), std::abs(m.control_hi[0]));
      break;
    }
    case ModelKind::Integrator1D:
      a[0] = std::max(std::abs(m.control_lo[0]), std::abs(m.control_hi[0]));
      break;
  }
}

}  // namespace

namespace detail {

SweepContext::SweepContext(const StateGrid& g, const VehicleModel& m, const SolverConfig& cfg)
    : grid(&g), model(m), order(cfg.derivative_order), mode(cfg.dissipation),
      parallel(cfg.parallel) {
  if (order != 1 && order != 3)
    throw std::invalid_argument("solver: derivative_order must be 1 or 3");
  if (m.state_dims() != g.dim_count)
    throw std::invalid_argument("solver: grid/model dimension mismatch");
  if (m.heading_periodic()) {
    const int hd = m.heading_dim();
    const int n = g.node_counts[hd];
    cos_phi.resize(n);
    sin_phi.resize(n);
    for (int i = 0; i < n; ++i) {
      cos_phi[i] = std::cos(g.coord(hd, i));
      sin_phi[i] = std::sin(g.coord(hd, i));
    }
  }
}

double SweepContext::max_alpha_over_dx(std::span<const std::uint32_t> active) const {
  const StateGrid& g = *grid;
  // Only the Dubins4 local bound varies across nodes (through the speed
  // coordinate); everything else is a single evaluation.
  if (model.kind == ModelKind::Dubins4 && mode == DissipationMode::Local) {
    double worst = 0.0;
    auto node_sum = [&](std::size_t flat) {
      const GridIndex c = g.unflatten(flat);
      Costate a{};
      model_alpha(model, g.coord(3, c[3]), mode, a);
      double s = 0.0;
      for (int d = 0; d < g.dim_count; ++d) s += a[d] / g.spacing[d];
      return s;
    };
    if (active.empty()) {
      // The speed axis alone determines the bound; scan it once.
      for (int i = 0; i < g.node_counts[3]; ++i) {
        GridIndex c{};
        c[3] = i;
        worst = std::max(worst, node_sum(g.flat(c)));
      }
    } else {
      for (const std::uint32_t f : active) worst = std::max(worst, node_sum(f));
    }
    return worst;
  }
  Costate a{};
  model_alpha(model, 0.0, mode, a);
  double s = 0.0;
  for (int d = 0; d < g.dim_count; ++d) s += a[d] / g.spacing[d];
  return s;
}

double SweepContext::full_sweep(std::span<const double> in, std::span<const double> l,
                                std::span<double> out, double dtau) const {
  const StateGrid& g = *grid;
  const double* v = in.data();
  const double* lv = l.data();
  double* o = out.data();
  const int last = g.dim_count - 1;
  const int n_last = g.node_counts[last];
  const std::int64_t n_lines = static_cast<std::int64_t>(g.node_total) / n_last;
  double max_change = 0.0;

  // Parallelize over grid lines along the fastest dimension; each line walks
  // its nodes incrementally.
#pragma omp parallel for schedule(static) reduction(max : max_change) if (parallel)
  for (std::int64_t line = 0; line < n_lines; ++line) {
    GridIndex c{};
    std::size_t rem = static_cast<std::size_t>(line);
    for (int d = last - 1; d >= 0; --d) {
      c[d] = static_cast<int>(rem % static_cast<std::size_t>(g.node_counts[d]));
      rem /= static_cast<std::size_t>(g.node_counts[d]);
    }
    std::size_t flat = 0;
    for (int d = 0; d < last; ++d) flat += g.stride[d] * static_cast<std::size_t>(c[d]);
    const bool speed_axis = model.kind == ModelKind::Dubins4;  // speed is the last dim
    const double cph0 = cos_phi.empty() ? 1.0 : (last == 2 ? 0.0 : cos_phi[c[2]]);
    const double sph0 = sin_phi.empty() ? 0.0 : (last == 2 ? 0.0 : sin_phi[c[2]]);
    Costate alpha{};
    if (!speed_axis) model_alpha(model, 0.0, mode, alpha);

    for (int k = 0; k < n_last; ++k, ++flat) {
      c[last] = k;
      Costate left{}, right{}, avg{};
      gradient_at(v, g, c, flat, order, left, right);
      const double cph = (last == 2 && !cos_phi.empty()) ? cos_phi[k] : cph0;
      const double sph = (last == 2 && !sin_phi.empty()) ? sin_phi[k] : sph0;
      const double speed = speed_axis ? g.coord(3, k) : 0.0;
      if (speed_axis) model_alpha(model, speed, mode, alpha);
      for (int d = 0; d < g.dim_count; ++d) avg[d] = 0.5 * (left[d] + right[d]);
      double hh = model_hamiltonian(model, cph, sph, speed, avg);
      for (int d = 0; d < g.dim_count; ++d) hh += 0.5 * alpha[d] * (right[d] - left[d]);
      const double cand = v[flat] + dtau * hh;
      const double nv = std::min(cand, lv[flat]);
      o[flat] = nv;
      max_change = std::max(max_change, std::abs(nv - v[flat]));
    }
  }
  return max_change;
}

double SweepContext::subset_sweep(std::span<const double> in, std::span<const double> l,
                                  std::span<const std::uint32_t> active,
                                  std::span<double> out_compact,
                                  std::span<double> delta_compact, double dtau) const {
  const StateGrid& g = *grid;
  const double* v = in.data();
  const double* lv = l.data();
  const std::int64_t n = static_cast<std::int64_t>(active.size());
  double max_change = 0.0;

#pragma omp parallel for schedule(static) reduction(max : max_change) if (parallel)
  for (std::int64_t k = 0; k < n; ++k) {
    const std::size_t flat = active[static_cast<std::size_t>(k)];
    const GridIndex c = g.unflatten(flat);
    Costate left{}, right{}, avg{}, alpha{};
    gradient_at(v, g, c, flat, order, left, right);
    const double cph = cos_phi.empty() ? 1.0 : cos_phi[c[2]];
    const double sph = sin_phi.empty() ? 0.0 : sin_phi[c[2]];
    const double speed = model.kind == ModelKind::Dubins4 ? g.coord(3, c[3]) : 0.0;
    for (int d = 0; d < g.dim_count; ++d) avg[d] = 0.5 * (left[d] + right[d]);
    model_alpha(model, speed, mode, alpha);
    double hh = model_hamiltonian(model, cph, sph, speed, avg);
    for (int d = 0; d < g.dim_count; ++d) hh += 0.5 * alpha[d] * (right[d] - left[d]);
    const double cand = v[flat] + dtau * hh;
    const double nv = std::min(cand, lv[flat]);
    out_compact[static_cast<std::size_t>(k)] = nv;
    const double ch = std::abs(nv - v[flat]);
    delta_compact[static_cast<std::size_t>(k)] = ch;
    max_change = std::max(max_change, ch);
  }
  return max_change;
}

}  // namespace detail

void upwind_gradient(const ScalarField& field, const GridIndex& idx, int order,
                     Costate& left, Costate& right) {
  const StateGrid& g = *field.grid;
  if (order != 1 && order != 3)
    throw std::invalid_argument("upwind_gradient: order must be 1 or 3");
  gradient_at(field.values.data(), g, idx, g.flat(idx), order, left, right);
}

double numerical_hamiltonian(const VehicleModel& model, const StateVec& x,
                             const Costate& left, const Costate& right, DissipationMode mode) {
  Costate avg{};
  for (int d = 0; d < model.state_dims(); ++d) avg[d] = 0.5 * (left[d] + right[d]);
  const Costate alpha = control_jacobian_bounds(model, x, mode);
  double hh = hamiltonian(model, x, avg);
  for (int d = 0; d < model.state_dims(); ++d) hh += 0.5 * alpha[d] * (right[d] - left[d]);
  return hh;
}

double cfl_time_step(const StateGrid& grid, const VehicleModel& model, const SolverConfig& cfg,
                     std::span<const std::uint32_t> active) {
  if (!(cfg.cfl > 0.0) || cfg.cfl > 1.0)
    throw std::invalid_argument("solver: cfl must lie in (0, 1]");
  detail::SweepContext ctx(grid, model, cfg);
  const double denom = ctx.max_alpha_over_dx(active);
  if (denom == 0.0) return 1.0;  // static dynamics: any step is stable
  const double dtau = cfg.cfl / denom;
  if (!(dtau > 1e-15)) throw std::runtime_error("solver: CFL time step underflow");
  return dtau;
}

namespace {

// One logical VI step on full-grid buffers; order 3 runs the two-stage
// strong-stability form. Returns max |out - in|.
double step_buffers(const detail::SweepContext& ctx, std::span<const double> in,
                    std::span<const double> l, std::span<double> out,
                    std::span<double> scratch, double dtau) {
  if (ctx.order == 1) return ctx.full_sweep(in, l, out, dtau);
  ctx.full_sweep(in, l, scratch, dtau);
  ctx.full_sweep(scratch, l, out, dtau);
  const std::int64_t n = static_cast<std::int64_t>(in.size());
  double max_change = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_change) if (ctx.parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const double nv = std::min(0.5 * (in[i] + out[i]), l[i]);
    out[i] = nv;
    max_change = std::max(max_change, std::abs(nv - in[i]));
  }
  return max_change;
}

}  // namespace

std::pair<ScalarField, double> vi_step(const ScalarField& V, const ScalarField& l,
                                       const VehicleModel& model, const SolverConfig& cfg,
                                       std::span<const std::uint32_t> active) {
  if (V.grid.get() != l.grid.get() && V.grid->node_total != l.grid->node_total)
    throw std::invalid_argument("vi_step: V and l must share a grid");
  const StateGrid& g = *V.grid;
  detail::SweepContext ctx(g, model, cfg);
  const double dtau = cfl_time_step(g, model, cfg, active);

  ScalarField out = V;
  if (active.empty()) {
    std::vector<double> scratch(cfg.derivative_order == 3 ? g.node_total : 0);
    const double mc = step_buffers(ctx, V.values, l.values, out.values, scratch, dtau);
    return {std::move(out), mc};
  }

  std::vector<double> compact(active.size()), delta(active.size());
  double mc = 0.0;
  if (cfg.derivative_order == 1) {
    mc = ctx.subset_sweep(V.values, l.values, active, compact, delta, dtau);
    for (std::size_t k = 0; k < active.size(); ++k) out.values[active[k]] = compact[k];
  } else {
    // Two-stage form with staged write-back on the subset.
    std::vector<double> stage1(active.size());
    ctx.subset_sweep(V.values, l.values, active, stage1, delta, dtau);
    std::vector<double> work = V.values;
    for (std::size_t k = 0; k < active.size(); ++k) work[active[k]] = stage1[k];
    ctx.subset_sweep(work, l.values, active, compact, delta, dtau);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t f = active[k];
      const double nv = std::min(0.5 * (V.values[f] + compact[k]), l.values[f]);
      out.values[f] = nv;
      mc = std::max(mc, std::abs(nv - V.values[f]));
    }
  }
  return {std::move(out), mc};
}

std::pair<ScalarField, SolveReport> solve(const ScalarField& V0, const ScalarField& l,
                                          const VehicleModel& model, const SolverConfig& cfg) {
  const StateGrid& g = *V0.grid;
  detail::SweepContext ctx(g, model, cfg);
  const double base_dtau = cfl_time_step(g, model, cfg);

  ScalarField current = V0;
  std::vector<double> next(g.node_total);
  std::vector<double> scratch(cfg.derivative_order == 3 ? g.node_total : 0);

  SolveReport report;
  report.final_residual = std::numeric_limits<double>::infinity();
  const auto t0 = std::chrono::steady_clock::now();

  while (report.iterations < cfg.max_iterations) {
    double dtau = base_dtau;
    if (cfg.time_horizon > 0.0) {
      const double remaining = cfg.time_horizon - report.pseudo_time;
      if (remaining <= 0.0) break;
      dtau = std::min(dtau, remaining);
    }
    const double mc = step_buffers(ctx, current.values, l.values, next, scratch, dtau);
    current.values.swap(next);
    ++report.iterations;
    report.nodes_updated_total += g.node_total;
    report.pseudo_time += dtau;
    report.final_residual = mc / dtau;
    if (cfg.time_horizon > 0.0) {
      if (report.pseudo_time >= cfg.time_horizon - 1e-12) {
        report.converged = true;
        break;
      }
    } else if (report.final_residual <= cfg.convergence_tol) {
      report.converged = true;
      break;
    }
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(current), report};
}

}  // namespace hjnav
