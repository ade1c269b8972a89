#pragma once

#include <string>
#include <vector>

#include "hjnav/sim.hpp"

namespace hjnav {

/// Node-wise safe-set membership comparison of `a` against the reference `b`:
/// (over_conservative_pct, under_conservative_pct) as percentages of all grid
/// nodes. Over-conservative: a unsafe where b safe; under: a safe where b
/// unsafe. Requires matching grid and epsilon.
std::pair<double, double> diff_safe_sets(const SafeSetSnapshot& a, const SafeSetSnapshot& b);

struct MethodSummary {
  BrsMethod method = BrsMethod::Full;
  int rebuilds = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
  double mean_over_pct = 0.0;      // vs full on the same map
  double max_over_pct = 0.0;
  std::size_t under_nodes_total = 0;
  double max_value_excess = 0.0;   // max over rebuilds of max(V_method - V_full)
  double speedup_vs_full = 1.0;
  bool all_converged = true;
};

struct BenchReport {
  std::string scenario;
  std::string sensor;
  std::string planner;
  std::string grid_desc;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int rebuild_events = 0;
  Outcome outcome = Outcome::Timeout;
  std::vector<MethodSummary> rows;  // full, warm, local
};

/// Drive one episode per seed on the full-method snapshot chain; at every
/// rebuild event, run all three methods on identical (V_last, l_t) inputs and
/// compare against the full solution. Only solver work is timed.
std::vector<BenchReport> run_benchmark(const Scenario& sc, std::span<const std::uint64_t> seeds);

void write_bench_csv(std::span<const BenchReport> reports, const std::string& path);
std::string format_bench_table(std::span<const BenchReport> reports);

/// True when every warm/local row in every report has zero under-conservative
/// nodes (the conservatism guarantee).
bool all_conservative(std::span<const BenchReport> reports);

}  // namespace hjnav
