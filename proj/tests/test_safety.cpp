#include <doctest.h>

#include <cmath>

#include "hjnav/safety.hpp"

using namespace hjnav;

namespace {

GridPtr dubins_grid(int nxy, int nphi, double extent = 10.0) {
  const std::vector<double> lo{0, 0, -M_PI}, hi{extent, extent, M_PI};
  const std::vector<int> c{nxy, nxy, nphi};
  const std::vector<char> p{0, 0, 1};
  return build_grid_ptr(lo, hi, c, p, 2);
}

const VehicleModel kDubins = VehicleModel::dubins3(0.1, 1.0, 1.0, 0.1);

SafeSetSnapshot snapshot_from(GridPtr g, const std::function<double(double, double)>& fn,
                              double epsilon) {
  SafeSetSnapshot snap;
  snap.value = ScalarField(g);
  snap.epsilon = epsilon;
  snap.computed_at = 2.0;
  const int ny = g->node_counts[1], nphi = g->node_counts[2];
  for (int i = 0; i < g->node_counts[0]; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nphi; ++k)
        snap.value.values[(static_cast<std::size_t>(i) * ny + j) * nphi + k] =
            fn(g->coord(0, i), g->coord(1, j));
  return snap;
}

}  // namespace

TEST_SUITE("safety") {

TEST_CASE("epsilon defaults to one and a half position cell diagonals") {
  GridPtr g = dubins_grid(81, 41);
  SafetyConfig cfg;
  const double diag = std::hypot(g->spacing[0], g->spacing[1]);
  CHECK(resolve_epsilon(*g, cfg) == doctest::Approx(1.5 * diag));
  cfg.epsilon_override = 0.0;
  CHECK(resolve_epsilon(*g, cfg) == 0.0);
}

TEST_CASE("filter passes the planner through strictly inside the safe set") {
  GridPtr g = dubins_grid(21, 9);
  const SafeSetSnapshot snap = snapshot_from(g, [](double, double) { return 2.0; }, 0.05);
  const ControlVec u_plan{0.47, -0.31};
  const FilterDecision dec = filter(snap, kDubins, {5, 5, 0.3}, u_plan, SafetyConfig{});
  CHECK(dec.mode == FilterMode::Planner);
  CHECK(dec.control[0] == u_plan[0]);
  CHECK(dec.control[1] == u_plan[1]);
  CHECK(dec.value_at_state == doctest::Approx(2.0));
  CHECK(dec.snapshot_time == doctest::Approx(2.0));
}

TEST_CASE("filter overrides at or below the activation level") {
  GridPtr g = dubins_grid(21, 9);
  const SafeSetSnapshot snap = snapshot_from(g, [](double x, double) { return 0.002 * x; }, 0.05);
  const FilterDecision dec = filter(snap, kDubins, {5, 5, 0.0}, {1.0, 0.0}, SafetyConfig{});
  CHECK(dec.mode == FilterMode::Safety);
  // Value grows in +x and the vehicle faces +x: full speed ahead.
  CHECK(dec.control[0] == doctest::Approx(1.0));
}

TEST_CASE("filter treats out-of-grid states as unsafe and steers inward") {
  GridPtr g = dubins_grid(21, 9);
  const SafeSetSnapshot snap = snapshot_from(g, [](double, double) { return 1.0; }, 0.05);
  const StateVec outside{12.0, 5.0, 0.0};  // beyond the +x face, looking away
  const FilterDecision dec = filter(snap, kDubins, outside, {0.5, 0.0}, SafetyConfig{});
  CHECK(dec.mode == FilterMode::Safety);
  CHECK(dec.flagged);
  CHECK(dec.value_at_state == -std::numeric_limits<double>::infinity());
  // Costate points toward the grid center (-x): facing +x, crawl.
  CHECK(dec.control[0] == doctest::Approx(0.1));
}

TEST_CASE("safe_control follows the interpolated gradient") {
  GridPtr g = dubins_grid(21, 9);
  const SafeSetSnapshot snap = snapshot_from(g, [](double x, double) { return x; }, 0.05);
  bool flagged = true;
  ControlVec u = safe_control(snap, kDubins, {5, 5, 0.0}, &flagged);
  CHECK_FALSE(flagged);
  CHECK(u[0] == doctest::Approx(1.0));  // moving +x increases V at phi = 0
  u = safe_control(snap, kDubins, {5, 5, M_PI}, &flagged);
  CHECK(u[0] == doctest::Approx(0.1));  // moving forward at phi = pi decreases V
}

TEST_CASE("uniform field is a flagged plateau with the upper-bound control") {
  GridPtr g = dubins_grid(21, 9);
  const SafeSetSnapshot snap = snapshot_from(g, [](double, double) { return 0.0; }, 0.05);
  bool flagged = false;
  const ControlVec u = safe_control(snap, kDubins, {5, 5, 0.7}, &flagged);
  CHECK(flagged);
  CHECK(u[0] == doctest::Approx(1.0));
  CHECK(u[1] == doctest::Approx(1.0));
}

TEST_CASE("steering sign matches the heading derivative of the value") {
  // Value improves toward +y; at phi = 0 turning left (+omega) raises V.
  GridPtr g = dubins_grid(21, 17);
  SafeSetSnapshot snap;
  snap.value = ScalarField(g);
  snap.epsilon = 0.05;
  const int ny = 21, nphi = 17;
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nphi; ++k) {
        const double phi = g->coord(2, k);
        snap.value.values[(static_cast<std::size_t>(i) * ny + j) * nphi + k] =
            0.1 * std::sin(phi);  // dV/dphi > 0 at phi = 0
      }
  const StateVec x{5, 5, 0.0};
  const Costate grad = value_gradient(snap.value, x);
  CHECK(grad[2] > 0.0);
  bool flagged = false;
  const ControlVec u = safe_control(snap, kDubins, x, &flagged);
  CHECK(u[1] == doctest::Approx(1.0));  // omega steers toward increasing V
}

TEST_CASE("hysteresis holds safety mode until well above the activation level") {
  GridPtr g = dubins_grid(21, 9);
  SafetyConfig cfg;
  cfg.hysteresis = true;
  const double eps = 0.2;
  const SafeSetSnapshot mid = snapshot_from(g, [](double, double) { return 0.25; }, eps);

  // 0.25 is above eps but below 1.5 * eps: stays in safety mode when already
  // there, passes the planner through otherwise.
  CHECK(filter(mid, kDubins, {5, 5, 0}, {0.5, 0}, cfg, true).mode == FilterMode::Safety);
  CHECK(filter(mid, kDubins, {5, 5, 0}, {0.5, 0}, cfg, false).mode == FilterMode::Planner);

  const SafeSetSnapshot high = snapshot_from(g, [](double, double) { return 0.35; }, eps);
  CHECK(filter(high, kDubins, {5, 5, 0}, {0.5, 0}, cfg, true).mode == FilterMode::Planner);

  // Disabled hysteresis exits immediately above epsilon.
  cfg.hysteresis = false;
  CHECK(filter(mid, kDubins, {5, 5, 0}, {0.5, 0}, cfg, true).mode == FilterMode::Planner);
}

TEST_CASE("an older snapshot is at most more conservative on a replay") {
  GridPtr g = dubins_grid(21, 9);
  // Older map -> smaller values everywhere.
  const SafeSetSnapshot older = snapshot_from(
      g, [](double x, double y) { return std::min(x, y) - 3.0; }, 0.2);
  const SafeSetSnapshot newer = snapshot_from(
      g, [](double x, double y) { return std::min(x, y) - 2.0; }, 0.2);

  int safety_old = 0, safety_new = 0;
  for (int s = 0; s < 40; ++s) {
    const StateVec x{2.0 + 0.15 * s, 3.0 + 0.1 * s, 0.0};
    const auto d_old = filter(older, kDubins, x, {0.5, 0}, SafetyConfig{});
    const auto d_new = filter(newer, kDubins, x, {0.5, 0}, SafetyConfig{});
    safety_old += d_old.mode == FilterMode::Safety;
    safety_new += d_new.mode == FilterMode::Safety;
    if (d_new.mode == FilterMode::Safety) CHECK(d_old.mode == FilterMode::Safety);
  }
  CHECK(safety_old >= safety_new);
}

}  // TEST_SUITE
