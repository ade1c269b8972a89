// Acceptance suite: one checked criterion per section, one PASS/FAIL line
// each, nonzero exit if anything fails. Criteria 1-3 share two full-grid
// benchmark episodes; criteria 4 and 8 share the episode matrix.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "hjnav/bench.hpp"
#include "hjnav/config.hpp"

using namespace hjnav;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
  if (!pass) ++g_failures;
}

Scenario with_counts(Scenario sc, int nx, int ny, int nphi) {
  const std::vector<double> lo{sc.env.workspace_min[0], sc.env.workspace_min[1], -M_PI};
  const std::vector<double> hi{sc.env.workspace_max[0], sc.env.workspace_max[1], M_PI};
  const std::vector<int> counts{nx, ny, nphi};
  const std::vector<char> per{0, 0, 1};
  sc.grid = build_grid_ptr(lo, hi, counts, per, 2);
  return sc;
}

struct EpisodeOutcome {
  std::string label;
  Outcome outcome;
  double min_distance;
  double epsilon;
  std::vector<TrajectorySample> samples;
};

}  // namespace

int main(int argc, char** argv) {
  std::string scenario_dir = "scenarios";
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--scenario-dir") scenario_dir = argv[i + 1];
  }

  // ---------------------------------------------------------------- 1, 2, 3
  // Benchmark both sensors at the pinned 81x81x41 grid: every rebuild runs
  // full, warm and local on identical inputs.
  {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<BenchReport> reports;
    for (const std::string file :
         {"running_example_camera_spline.json", "running_example_lidar_rrt.json"}) {
      const Scenario sc = load_scenario(scenario_dir + "/" + file);
      const std::vector<std::uint64_t> seeds{1};
      const auto r = run_benchmark(sc, seeds);
      reports.insert(reports.end(), r.begin(), r.end());
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool lemma_ok = true, over_ok = true, order_ok = true;
    double worst_excess = 0.0, worst_over = 0.0, worst_mean_over = 0.0;
    double min_speedup = 1e300;
    std::ostringstream order_detail;
    for (const auto& rep : reports) {
      const MethodSummary* full = nullptr;
      const MethodSummary* warm = nullptr;
      const MethodSummary* local = nullptr;
      for (const auto& row : rep.rows) {
        if (row.method == BrsMethod::Full) full = &row;
        if (row.method == BrsMethod::Warm) warm = &row;
        if (row.method == BrsMethod::Local) local = &row;
      }
      for (const MethodSummary* row : {warm, local}) {
        lemma_ok = lemma_ok && row->under_nodes_total == 0 && row->max_value_excess <= 1e-6;
        worst_excess = std::max(worst_excess, row->max_value_excess);
        over_ok = over_ok && row->max_over_pct < 2.0 && row->mean_over_pct < 1.0;
        worst_over = std::max(worst_over, row->max_over_pct);
        worst_mean_over = std::max(worst_mean_over, row->mean_over_pct);
      }
      order_ok = order_ok && local->mean_seconds < warm->mean_seconds &&
                 warm->mean_seconds < full->mean_seconds && local->speedup_vs_full >= 5.0;
      min_speedup = std::min(min_speedup, local->speedup_vs_full);
      order_detail << " [" << rep.sensor << "/" << rep.planner << " full " << full->mean_seconds
                   << "s warm " << warm->mean_seconds << "s local " << local->mean_seconds
                   << "s]";
    }

    {
      std::ostringstream os;
      os << "warm/local conservatism on every rebuild (both sensors, 81x81x41): "
         << "under-conservative nodes = 0, max value excess " << worst_excess
         << " <= 1e-6, matrix wall time " << wall << " s < 1800 s";
      report(1, lemma_ok && wall < 1800.0, os.str());
    }
    {
      std::ostringstream os;
      os << "over-conservative volume: per-rebuild max " << worst_over
         << "% < 2%, episode mean " << worst_mean_over << "% < 1%";
      report(2, over_ok, os.str());
    }
    {
      std::ostringstream os;
      os << "rebuild time ordering local < warm < full with local speedup >= 5x (min "
         << min_speedup << "x):" << order_detail.str();
      report(3, order_ok, os.str());
    }
  }

  // ------------------------------------------------------------------- 4, 8
  // 2 planners x 2 sensors x 3 methods x (5 random seeds + 1 adversarial)
  // episodes of the running example; collision checked against exact
  // geometry. Episode grid is reduced to keep the matrix tractable.
  std::vector<EpisodeOutcome> episodes;
  {
    const int nx = 41, nphi = 21;
    bool all_safe = true, all_reached = true;
    int count = 0;
    for (const std::string file :
         {"running_example_lidar_rrt.json", "running_example_lidar_spline.json",
          "running_example_camera_rrt.json", "running_example_camera_spline.json"}) {
      const Scenario base = with_counts(load_scenario(scenario_dir + "/" + file), nx, nx, nphi);
      for (const BrsMethod method : {BrsMethod::Full, BrsMethod::Warm, BrsMethod::Local}) {
        for (int variant = 0; variant < 6; ++variant) {
          Scenario sc = base;
          if (variant < 5) {
            sc.episode.disturbance_mode = DisturbanceMode::Random;
            sc.episode.seed = static_cast<std::uint64_t>(variant + 1);
          } else {
            sc.episode.disturbance_mode = DisturbanceMode::Adversarial;
            sc.episode.seed = 1;
          }
          sc.planner.seed = sc.episode.seed;
          const EpisodeResult r = run_episode(sc, method);
          std::ostringstream label;
          label << sc.name << "/" << to_string(method) << "/"
                << to_string(sc.episode.disturbance_mode) << "/seed" << sc.episode.seed;
          episodes.push_back({label.str(), r.trajectory.outcome,
                              r.trajectory.min_obstacle_distance,
                              resolve_epsilon(*sc.grid, sc.safety),
                              r.trajectory.samples});
          ++count;
          if (r.trajectory.outcome == Outcome::Collided ||
              r.trajectory.min_obstacle_distance <= 0.0) {
            all_safe = false;
            std::cout << "  collision: " << label.str() << "\n";
          }
          if (r.trajectory.outcome != Outcome::ReachedGoal) {
            all_reached = false;
            std::cout << "  did not reach goal: " << label.str() << " ("
                      << to_string(r.trajectory.outcome) << ")\n";
          }
        }
      }
    }
    std::ostringstream os;
    os << count << " episodes (2 planners x 2 sensors x 3 methods x 6 realizations, grid "
       << nx << "x" << nx << "x" << nphi << "): zero collisions"
       << (all_safe ? "" : " VIOLATED") << ", all reached the goal"
       << (all_reached ? "" : " VIOLATED");
    report(4, count == 72 && all_safe && all_reached, os.str());
  }

  // --------------------------------------------------------------------- 5
  {
    const VehicleModel integrator = VehicleModel::integrator1d();
    const VehicleModel drift = VehicleModel::integrator1d(-1.0, -1.0);

    const std::vector<char> np{0};
    GridPtr g = build_grid_ptr(std::vector<double>{-5.0}, std::vector<double>{5.0},
                               std::vector<int>{101}, np);
    ScalarField l(g);
    for (int i = 0; i < 101; ++i) l.values[i] = g->coord(0, i);
    SolverConfig cfg;
    cfg.convergence_tol = 1e-8;
    auto [v, rep] = solve(l, l, integrator, cfg);
    double avoid_err = 0.0;
    for (int i = 0; i < 101; ++i)
      avoid_err = std::max(avoid_err, std::abs(v.values[i] - g->coord(0, i)));
    const bool avoid_ok = rep.converged && avoid_err <= g->spacing[0];

    const auto lfun = [](double x) { return x + 0.3 * std::sin(1.7 * x); };
    const auto oracle = [&](double x, double T) {
      double best = 1e300;
      for (int i = 0; i <= 4000; ++i) best = std::min(best, lfun(x - T * i / 4000.0));
      return best;
    };
    auto horizon_error = [&](int n) {
      GridPtr gd = build_grid_ptr(std::vector<double>{-2.0}, std::vector<double>{3.0},
                                  std::vector<int>{n}, np);
      ScalarField ld(gd);
      for (int i = 0; i < n; ++i) ld.values[i] = lfun(gd->coord(0, i));
      SolverConfig hcfg;
      hcfg.time_horizon = 1.0;
      auto [vd, rd] = solve(ld, ld, drift, hcfg);
      double err = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = gd->coord(0, i);
        if (x < -0.7) continue;
        err = std::max(err, std::abs(vd.values[i] - oracle(x, 1.0)));
      }
      return std::pair<double, double>(err, gd->spacing[0]);
    };
    const auto [e81, h81] = horizon_error(81);
    const auto [e161, h161] = horizon_error(161);
    const double ratio = e161 / e81;

    std::ostringstream os;
    os << "integrator avoid max error " << avoid_err << " <= 1 cell; drift horizon errors "
       << e81 << " <= " << 2 * h81 << " and " << e161 << " <= " << 2 * h161
       << "; refinement ratio " << ratio << " <= 0.6";
    report(5, avoid_ok && e81 <= 2 * h81 && e161 <= 2 * h161 && ratio <= 0.6, os.str());
  }

  // --------------------------------------------------------------------- 6
  {
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0, worst_bound = 1e300;
    bool ok = true;
    for (int layout = 0; layout < 20; ++layout) {
      const int nx = 12 + static_cast<int>(unit(rng) * 14);
      const int ny = 10 + static_cast<int>(unit(rng) * 14);
      const std::vector<double> lo{0, 0}, hi{1.0 + 5.0 * unit(rng), 1.0 + 4.0 * unit(rng)};
      const std::vector<int> c{nx, ny};
      const std::vector<char> p{0, 0};
      GridPtr g = build_grid_ptr(lo, hi, c, p);
      std::vector<std::uint8_t> inside(g->position_total(), 0);
      const int blobs = 1 + static_cast<int>(unit(rng) * 3);
      for (int b = 0; b < blobs; ++b) {
        const double bx = hi[0] * unit(rng), by = hi[1] * unit(rng);
        const double r = (0.1 + 0.35 * unit(rng)) * std::max(hi[0], hi[1]);
        for (int i = 0; i < nx; ++i)
          for (int j = 0; j < ny; ++j)
            if (std::hypot(g->coord(0, i) - bx, g->coord(1, j) - by) <= r)
              inside[i * ny + j] = 1;
      }
      const ScalarField sd = signed_distance(g, std::span<const std::uint8_t>(inside));
      const std::vector<double> oracle = signed_distance_brute_force(*g, inside);
      const double diag = std::hypot(g->spacing[0], g->spacing[1]);
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        const double err = std::abs(sd.values[i] - oracle[i]);
        worst = std::max(worst, err);
        ok = ok && err <= diag;
      }
      worst_bound = std::min(worst_bound, diag);
    }
    std::ostringstream os;
    os << "signed distance vs brute-force oracle over 20 random layouts: max error " << worst
       << " <= one cell diagonal (smallest diagonal " << worst_bound << ")";
    report(6, ok, os.str());
  }

  // --------------------------------------------------------------------- 7
  {
    const VehicleModel integrator = VehicleModel::integrator1d();
    const std::vector<char> np{0};
    GridPtr g = build_grid_ptr(std::vector<double>{0.0}, std::vector<double>{10.0},
                               std::vector<int>{101}, np);
    KnownFreeMap m1(g), m2(g);
    for (std::uint32_t i = 0; i < 101; ++i) {
      const bool gap = i >= 50 && i <= 52;
      m1.known_free[i] = gap ? 0 : 1;
      m2.known_free[i] = (i == 51 || !gap) ? 1 : 0;
    }
    const ScalarField l1 = implicit_obstacle(m1);
    const ScalarField l2 = implicit_obstacle(m2);
    SolverConfig cfg;
    cfg.convergence_tol = 1e-9;
    const SafeSetSnapshot base = full_recompute(l1, integrator, cfg, 0.0, 0.0);

    LocalUpdateStats none_stats;
    const SafeSetSnapshot none =
        local_update(base.value, l1, {}, integrator, cfg, 1e-9, 0.0, 1.0, &none_stats);
    const bool empty_ok =
        none.report.nodes_updated_total == 0 &&
        std::memcmp(none.value.values.data(), base.value.values.data(),
                    base.value.values.size() * sizeof(double)) == 0;

    std::vector<std::uint32_t> delta{51};
    LocalUpdateStats stats;
    const SafeSetSnapshot local =
        local_update(base.value, l2, delta, integrator, cfg, 1e-9, 0.0, 1.0, &stats);
    bool pocket_ok = true;
    for (std::uint32_t i = 0; i < 101; ++i) {
      const bool allowed = i >= 50 && i <= 52;  // pocket + one-stencil halo
      if (!allowed && (stats.ever_enqueued[i] ||
                       local.value.values[i] != base.value.values[i]))
        pocket_ok = false;
    }
    std::ostringstream os;
    os << "empty delta: zero updates, field bit-identical (" << (empty_ok ? "yes" : "NO")
       << "); sealed pocket: touched nodes confined to pocket + one-stencil halo ("
       << stats.unique_enqueued << " nodes enqueued)";
    report(7, empty_ok && pocket_ok, os.str());
  }

  // --------------------------------------------------------------------- 8
  {
    bool ok = true;
    std::size_t planner_steps = 0, checked = 0;
    for (const auto& ep : episodes) {
      for (const auto& s : ep.samples) {
        ++checked;
        if (s.value > ep.epsilon) {
          const bool pass_through = s.mode == FilterMode::Planner &&
                                    s.u[0] == s.u_plan[0] && s.u[1] == s.u_plan[1];
          if (!pass_through) {
            ok = false;
            std::cout << "  non-least-restrictive step in " << ep.label << " at t=" << s.t
                      << "\n";
          }
          ++planner_steps;
        }
      }
    }
    std::ostringstream os;
    os << "least-restrictive filter: " << planner_steps << " of " << checked
       << " logged steps sat strictly inside the safe set and all carried the planner's "
          "control unchanged";
    report(8, ok && planner_steps > 0, os.str());
  }

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << " ("
            << (8 - g_failures) << "/8)" << std::endl;
  return g_failures == 0 ? 0 : 1;
}
