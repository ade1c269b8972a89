#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "hjnav/brs.hpp"
#include "hjnav/env.hpp"

using namespace hjnav;

namespace {

GridPtr dubins_grid(int nxy, int nphi, double extent = 10.0) {
  const std::vector<double> lo{0, 0, -M_PI}, hi{extent, extent, M_PI};
  const std::vector<int> c{nxy, nxy, nphi};
  const std::vector<char> p{0, 0, 1};
  return build_grid_ptr(lo, hi, c, p, 2);
}

const VehicleModel kDubins = VehicleModel::dubins3(0.1, 1.0, 1.0, 0.1);
const VehicleModel kIntegrator = VehicleModel::integrator1d();

ScalarField disk_l(const GridPtr& g, double cx, double cy, double r) {
  const int ny = g->node_counts[1];
  return signed_distance(g, [&](std::size_t f) {
    const double x = g->coord(0, static_cast<int>(f / ny));
    const double y = g->coord(1, static_cast<int>(f % ny));
    return std::hypot(x - cx, y - cy) <= r;
  });
}

std::vector<std::uint32_t> mask_delta(const std::vector<std::uint8_t>& before,
                                      const std::vector<std::uint8_t>& after) {
  std::vector<std::uint32_t> delta;
  for (std::uint32_t i = 0; i < before.size(); ++i)
    if (!before[i] && after[i]) delta.push_back(i);
  return delta;
}

}  // namespace

TEST_SUITE("brs") {

TEST_CASE("neighbors stencil counts and wrapping") {
  GridPtr g3 = dubins_grid(9, 8);
  CHECK(neighbors(GridIndex{4, 4, 3}, *g3, 1).size() == 6);

  const std::vector<double> lo{0, 0}, hi{1, 1};
  const std::vector<int> c{5, 5};
  const std::vector<char> p{0, 0};
  GridPtr g2 = build_grid_ptr(lo, hi, c, p);
  CHECK(neighbors(GridIndex{0, 0}, *g2, 1).size() == 2);

  // Periodic heading wraps: the phi = 0 plane neighbors the last plane.
  const auto n = neighbors(GridIndex{4, 4, 0}, *g3, 1);
  GridIndex wrapped{4, 4, 7};
  CHECK(std::find(n.begin(), n.end(), static_cast<std::uint32_t>(g3->flat(wrapped))) != n.end());
}

TEST_CASE("full_recompute on the integrator avoid problem") {
  const std::vector<double> lo{-5}, hi{5};
  const std::vector<int> c{101};
  const std::vector<char> p{0};
  GridPtr g = build_grid_ptr(lo, hi, c, p);
  ScalarField l(g);
  for (int i = 0; i < 101; ++i) l.values[i] = g->coord(0, i);

  SolverConfig cfg;
  cfg.convergence_tol = 1e-8;
  const SafeSetSnapshot snap = full_recompute(l, kIntegrator, cfg, 0.0, 0.0);
  CHECK(snap.method == BrsMethod::Full);
  CHECK(snap.report.converged);
  for (int i = 0; i < 101; ++i) {
    const double x = g->coord(0, i);
    if (x > g->spacing[0]) CHECK(snap.value.values[i] > 0.0);
    if (x < -g->spacing[0]) CHECK(snap.value.values[i] < 0.0);
  }
}

TEST_CASE("warm_start_init branches of the initialization rule") {
  GridPtr g = dubins_grid(11, 6, 4.0);
  const ScalarField l1 = disk_l(g, 2.0, 2.0, 1.0);
  const ScalarField l2 = disk_l(g, 2.0, 2.0, 1.4);

  SolverConfig cfg;
  cfg.convergence_tol = 1e-7;
  const SafeSetSnapshot base = full_recompute(l1, kDubins, cfg, 0.0, 0.0);

  SUBCASE("no newly freed nodes keeps the previous field") {
    const ScalarField out = warm_start_init(base.value, l1, {});
    for (std::size_t i = 0; i < out.values.size(); ++i)
      CHECK(out.values[i] == base.value.values[i]);
  }

  SUBCASE("all nodes newly freed degenerates to the fresh initialization") {
    std::vector<std::uint32_t> all(g->position_total());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    const ScalarField out = warm_start_init(base.value, l2, all);
    for (std::size_t i = 0; i < out.values.size(); ++i) CHECK(out.values[i] == l2.values[i]);
  }

  SUBCASE("a single freed cell changes exactly its extrusion column plus the clamp") {
    // Use the same l on both sides so the clamp is inert away from the cell.
    const std::vector<std::uint32_t> one{static_cast<std::uint32_t>(5 * 11 + 5)};
    const ScalarField out = warm_start_init(base.value, l1, one);
    const std::size_t extrude = g->node_total / g->position_total();
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < out.values.size(); ++i)
      if (out.values[i] != base.value.values[i]) ++diffs;
    CHECK(diffs <= extrude);
  }
}

TEST_CASE("warm_solve with no new information converges immediately") {
  GridPtr g = dubins_grid(15, 8, 4.0);
  const ScalarField l = disk_l(g, 2.0, 2.0, 1.2);
  SolverConfig cfg;
  cfg.convergence_tol = 1e-7;
  const SafeSetSnapshot base = full_recompute(l, kDubins, cfg, 0.0, 0.0);
  const SafeSetSnapshot warm = warm_solve(base.value, l, {}, kDubins, cfg, 0.0, 1.0);
  CHECK(warm.report.converged);
  CHECK(warm.report.iterations <= 2);
  CHECK(warm.method == BrsMethod::Warm);
}

TEST_CASE("warm_solve under-approximates the full solution") {
  GridPtr g = dubins_grid(25, 13, 6.0);
  const int ny = 25;
  KnownFreeMap m1(g), m2(g);
  for (std::uint32_t f = 0; f < m1.position_total(); ++f) {
    const double x = g->coord(0, static_cast<int>(f / ny));
    const double y = g->coord(1, static_cast<int>(f % ny));
    const bool in_disk = std::hypot(x - 2.5, y - 2.5) <= 1.6;
    const bool in_wedge = x > 2.5 && x < 5.2 && std::abs(y - 2.5) < 0.9;
    m1.known_free[f] = in_disk ? 1 : 0;
    m2.known_free[f] = (in_disk || in_wedge) ? 1 : 0;
  }
  const ScalarField l1 = implicit_obstacle(m1);
  const ScalarField l2 = implicit_obstacle(m2);

  SolverConfig cfg;
  cfg.convergence_tol = 1e-7;
  const SafeSetSnapshot base = full_recompute(l1, kDubins, cfg, 0.0, 0.0);
  const auto delta = mask_delta(m1.known_free, m2.known_free);
  REQUIRE(!delta.empty());

  const SafeSetSnapshot warm = warm_solve(base.value, l2, delta, kDubins, cfg, 0.0, 1.0);
  const SafeSetSnapshot full = full_recompute(l2, kDubins, cfg, 0.0, 1.0);

  double max_excess = -1e300;
  std::size_t over = 0;
  const double eps = 0.25;
  for (std::size_t i = 0; i < warm.value.values.size(); ++i) {
    max_excess = std::max(max_excess, warm.value.values[i] - full.value.values[i]);
    if (warm.value.values[i] <= eps && full.value.values[i] > eps) ++over;
  }
  CHECK(max_excess <= 1e-6);
  CHECK(100.0 * over / warm.value.values.size() < 2.0);
}

TEST_CASE("monotone map growth only grows the safe set") {
  GridPtr g = dubins_grid(21, 11, 6.0);
  const ScalarField l1 = disk_l(g, 3.0, 3.0, 1.2);
  const ScalarField l2 = disk_l(g, 3.0, 3.0, 2.0);
  SolverConfig cfg;
  cfg.convergence_tol = 1e-7;
  const SafeSetSnapshot s1 = full_recompute(l1, kDubins, cfg, 0.0, 0.0);
  const SafeSetSnapshot s2 = full_recompute(l2, kDubins, cfg, 0.0, 1.0);
  for (std::size_t i = 0; i < s1.value.values.size(); ++i)
    CHECK(s1.value.values[i] <= s2.value.values[i] + 1e-9);
}

TEST_CASE("local_update with an empty delta does no work") {
  GridPtr g = dubins_grid(15, 8, 4.0);
  const ScalarField l = disk_l(g, 2.0, 2.0, 1.2);
  SolverConfig cfg;
  cfg.convergence_tol = 1e-7;
  const SafeSetSnapshot base = full_recompute(l, kDubins, cfg, 0.0, 0.0);
  LocalUpdateStats stats;
  const SafeSetSnapshot local =
      local_update(base.value, l, {}, kDubins, cfg, 1e-6, 0.0, 1.0, &stats);
  CHECK(local.report.nodes_updated_total == 0);
  CHECK(stats.unique_enqueued == 0);
  CHECK(std::memcmp(local.value.values.data(), base.value.values.data(),
                    l.values.size() * sizeof(double)) == 0);
}

TEST_CASE("sealed pocket confines the queue to the pocket and its halo") {
  // 1D free space with a three-node gap: wall, pocket, wall. Freeing the
  // single pocket node leaves l untouched outside it, so propagation stops
  // dead at the pinned walls.
  const std::vector<double> lo{0}, hi{10};
  const std::vector<int> c{101};
  const std::vector<char> p{0};
  GridPtr g = build_grid_ptr(lo, hi, c, p);

  KnownFreeMap m1(g), m2(g);
  for (std::uint32_t i = 0; i < 101; ++i) {
    const bool gap = i >= 50 && i <= 52;
    m1.known_free[i] = gap ? 0 : 1;
    m2.known_free[i] = (i == 51 || !gap) ? 1 : 0;
  }
  const ScalarField l1 = implicit_obstacle(m1);
  const ScalarField l2 = implicit_obstacle(m2);
  for (std::uint32_t i = 0; i < 101; ++i) {
    if (i != 51) CHECK(l1.values[i] == l2.values[i]);
  }

  SolverConfig cfg;
  cfg.convergence_tol = 1e-9;
  const SafeSetSnapshot base = full_recompute(l1, kIntegrator, cfg, 0.0, 0.0);

  LocalUpdateStats stats;
  const auto delta = mask_delta(m1.known_free, m2.known_free);
  const SafeSetSnapshot local =
      local_update(base.value, l2, delta, kIntegrator, cfg, 1e-9, 0.0, 1.0, &stats);

  const std::set<std::uint32_t> allowed{50, 51, 52};
  for (std::uint32_t i = 0; i < 101; ++i) {
    if (!allowed.count(i)) {
      CHECK(stats.ever_enqueued[i] == 0);
      CHECK(local.value.values[i] == base.value.values[i]);
    }
  }
  CHECK(stats.unique_enqueued == 3);
}

TEST_CASE("local_update tracks warm_solve membership on a sensing step") {
  GridPtr g = dubins_grid(25, 13, 6.0);
  const int ny = 25;
  KnownFreeMap m1(g), m2(g);
  for (std::uint32_t f = 0; f < m1.position_total(); ++f) {
    const double x = g->coord(0, static_cast<int>(f / ny));
    const double y = g->coord(1, static_cast<int>(f % ny));
    const bool in_disk = std::hypot(x - 2.5, y - 2.5) <= 1.6;
    const bool in_wedge = x > 2.5 && x < 4.6 && std::abs(y - 2.5) < 0.8;
    m1.known_free[f] = in_disk ? 1 : 0;
    m2.known_free[f] = (in_disk || in_wedge) ? 1 : 0;
  }
  const ScalarField l1 = implicit_obstacle(m1);
  const ScalarField l2 = implicit_obstacle(m2);

  SolverConfig cfg;
  cfg.convergence_tol = 1e-7;
  const SafeSetSnapshot base = full_recompute(l1, kDubins, cfg, 0.0, 0.0);
  const auto delta = mask_delta(m1.known_free, m2.known_free);

  const SafeSetSnapshot warm = warm_solve(base.value, l2, delta, kDubins, cfg, 0.25, 1.0);
  LocalUpdateStats stats;
  const SafeSetSnapshot local =
      local_update(base.value, l2, delta, kDubins, cfg, 1e-9, 0.25, 1.0, &stats);

  std::size_t agree = 0;
  const std::size_t n = warm.value.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool sw = warm.value.values[i] > warm.epsilon;
    const bool sl = local.value.values[i] > local.epsilon;
    if (sw == sl) ++agree;
  }
  CHECK(static_cast<double>(agree) / n >= 0.98);

  // Never-enqueued nodes keep the previous field bit-identical.
  for (std::size_t i = 0; i < n; ++i) {
    if (!stats.ever_enqueued[i]) CHECK(local.value.values[i] == base.value.values[i]);
  }
}

}  // TEST_SUITE
