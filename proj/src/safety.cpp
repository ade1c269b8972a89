#include "hjnav/safety.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hjnav {

double resolve_epsilon(const StateGrid& grid, const SafetyConfig& cfg) {
  if (cfg.epsilon_override) {
    if (*cfg.epsilon_override < 0.0)
      throw std::invalid_argument("safety: epsilon must be non-negative");
    return *cfg.epsilon_override;
  }
  double diag2 = 0.0;
  for (int d = 0; d < grid.position_dims; ++d) diag2 += grid.spacing[d] * grid.spacing[d];
  return cfg.epsilon_scale * std::sqrt(diag2);
}

namespace {

// Central-difference gradient at a node; one-sided at non-periodic edges.
void node_gradient(const ScalarField& f, const GridIndex& idx, Costate& out) {
  const StateGrid& g = *f.grid;
  const std::size_t flat = g.flat(idx);
  for (int d = 0; d < g.dim_count; ++d) {
    const int im = g.shift(d, idx[d], -1);
    const int ip = g.shift(d, idx[d], +1);
    const double vm = f.values[flat + (static_cast<std::ptrdiff_t>(im) - idx[d]) *
                                          static_cast<std::ptrdiff_t>(g.stride[d])];
    const double vp = f.values[flat + (static_cast<std::ptrdiff_t>(ip) - idx[d]) *
                                          static_cast<std::ptrdiff_t>(g.stride[d])];
    const double span = (ip - im + (ip < im ? g.node_counts[d] : 0)) * g.spacing[d];
    out[d] = span > 0.0 ? (vp - vm) / span : 0.0;
  }
}

}  // namespace

Costate value_gradient(const ScalarField& field, const StateVec& x) {
  const StateGrid& g = *field.grid;

  std::array<int, kMaxDim> base{}, next{};
  std::array<double, kMaxDim> frac{};
  for (int d = 0; d < g.dim_count; ++d) {
    const int n = g.node_counts[d];
    double u = (x[d] - g.lower[d]) / g.spacing[d];
    if (g.periodic[d]) {
      u = std::fmod(u, static_cast<double>(n));
      if (u < 0) u += n;
      int i0 = static_cast<int>(std::floor(u));
      if (i0 >= n) i0 = 0;
      base[d] = i0;
      next[d] = (i0 + 1) % n;
      frac[d] = u - i0;
    } else {
      if (u < 0.0 || u > n - 1) throw std::out_of_range("value_gradient: state outside grid");
      int i0 = std::min(static_cast<int>(std::floor(u)), n - 2);
      base[d] = i0;
      next[d] = i0 + 1;
      frac[d] = u - i0;
    }
  }

  Costate acc{};
  GridIndex idx{};
  const int corners = 1 << g.dim_count;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int d = 0; d < g.dim_count; ++d) {
      const bool hi = (c >> d) & 1;
      idx[d] = hi ? next[d] : base[d];
      w *= hi ? frac[d] : (1.0 - frac[d]);
    }
    if (w == 0.0) continue;
    Costate grad{};
    node_gradient(field, idx, grad);
    for (int d = 0; d < g.dim_count; ++d) acc[d] += w * grad[d];
  }
  return acc;
}

ControlVec safe_control(const SafeSetSnapshot& snapshot, const VehicleModel& model,
                        const StateVec& x, bool* flagged) {
  const Costate grad = value_gradient(snapshot.value, x);
  double norm = 0.0;
  for (int d = 0; d < model.state_dims(); ++d) norm += grad[d] * grad[d];
  if (flagged) *flagged = norm < 1e-24;
  return optimal_control(model, x, grad);
}

FilterDecision filter(const SafeSetSnapshot& snapshot, const VehicleModel& model,
                      const StateVec& x, const ControlVec& u_plan, const SafetyConfig& cfg,
                      bool in_safety_mode) {
  const StateGrid& g = *snapshot.value.grid;
  FilterDecision dec;
  dec.snapshot_time = snapshot.computed_at;

  std::span<const double> xs(x.data(), static_cast<std::size_t>(g.dim_count));
  if (!in_bounds(g, xs)) {
    // Outside the mapped domain: treat as unsafe and steer toward the grid
    // interior through a synthetic position costate.
    dec.mode = FilterMode::Safety;
    dec.value_at_state = -std::numeric_limits<double>::infinity();
    dec.flagged = true;
    Costate p{};
    double norm = 0.0;
    for (int d = 0; d < g.position_dims; ++d) {
      p[d] = 0.5 * (g.lower[d] + g.upper[d]) - x[d];
      norm += p[d] * p[d];
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (int d = 0; d < g.position_dims; ++d) p[d] /= norm;
    dec.control = optimal_control(model, x, p);
    return dec;
  }

  dec.value_at_state = interpolate(snapshot.value, xs);
  const double exit_level =
      cfg.hysteresis && in_safety_mode ? 1.5 * snapshot.epsilon : snapshot.epsilon;
  if (dec.value_at_state > exit_level) {
    dec.mode = FilterMode::Planner;
    dec.control = u_plan;
    return dec;
  }
  dec.mode = FilterMode::Safety;
  bool plateau = false;
  dec.control = safe_control(snapshot, model, x, &plateau);
  dec.flagged = plateau;
  return dec;
}

}  // namespace hjnav
