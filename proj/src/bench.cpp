#include "hjnav/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace hjnav {

std::pair<double, double> diff_safe_sets(const SafeSetSnapshot& a, const SafeSetSnapshot& b) {
  if (a.value.grid->node_total != b.value.grid->node_total)
    throw std::invalid_argument("diff_safe_sets: grid mismatch");
  if (std::abs(a.epsilon - b.epsilon) > 1e-12)
    throw std::invalid_argument("diff_safe_sets: epsilon mismatch");
  const std::size_t n = a.value.values.size();
  std::size_t over = 0, under = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool sa = a.value.values[i] > a.epsilon;
    const bool sb = b.value.values[i] > b.epsilon;
    if (!sa && sb) ++over;
    if (sa && !sb) ++under;
  }
  const double scale = 100.0 / static_cast<double>(n);
  return {over * scale, under * scale};
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct MethodAccum {
  std::vector<double> seconds;
  std::vector<double> over_pct;
  std::size_t under_nodes = 0;
  double max_value_excess = -std::numeric_limits<double>::infinity();
  bool all_converged = true;
};

MethodSummary summarize(BrsMethod m, const MethodAccum& acc, double full_mean) {
  MethodSummary s;
  s.method = m;
  s.rebuilds = static_cast<int>(acc.seconds.size());
  double mean = 0.0;
  for (const double v : acc.seconds) mean += v;
  mean = s.rebuilds ? mean / s.rebuilds : 0.0;
  double var = 0.0;
  for (const double v : acc.seconds) var += (v - mean) * (v - mean);
  s.mean_seconds = mean;
  s.stddev_seconds = s.rebuilds > 1 ? std::sqrt(var / (s.rebuilds - 1)) : 0.0;
  double osum = 0.0, omax = 0.0;
  for (const double v : acc.over_pct) {
    osum += v;
    omax = std::max(omax, v);
  }
  s.mean_over_pct = acc.over_pct.empty() ? 0.0 : osum / acc.over_pct.size();
  s.max_over_pct = omax;
  s.under_nodes_total = acc.under_nodes;
  s.max_value_excess =
      acc.seconds.empty() ? 0.0 : std::max(acc.max_value_excess, 0.0) * 1.0;
  s.speedup_vs_full = mean > 0.0 ? full_mean / mean : 1.0;
  s.all_converged = acc.all_converged;
  return s;
}

}  // namespace

std::vector<BenchReport> run_benchmark(const Scenario& sc, std::span<const std::uint64_t> seeds) {
  std::vector<BenchReport> reports;
  const std::vector<std::uint64_t> default_seed{sc.episode.seed};
  std::span<const std::uint64_t> use_seeds = seeds.empty() ? default_seed : seeds;

  for (const std::uint64_t seed : use_seeds) {
    Scenario run = sc;
    run.episode.seed = seed;
    run.planner.seed = seed;

    MethodAccum full_acc, warm_acc, local_acc;
    std::size_t under_events = 0;

    RebuildHook hook = [&](const KnownFreeMap&, const ScalarField& l_t,
                           const SafeSetSnapshot& last,
                           const std::vector<std::uint32_t>& newly_free,
                           double sim_time) -> SafeSetSnapshot {
      SafeSetSnapshot full =
          full_recompute(l_t, run.model, run.solver, last.epsilon, sim_time);
      SafeSetSnapshot warm = warm_solve(last.value, l_t, newly_free, run.model, run.solver,
                                        last.epsilon, sim_time);
      SafeSetSnapshot local = local_update(last.value, l_t, newly_free, run.model, run.solver,
                                           run.local_delta_tol_scale, last.epsilon, sim_time);

      full_acc.seconds.push_back(full.report.elapsed_seconds);
      full_acc.over_pct.push_back(0.0);
      full_acc.all_converged &= full.report.converged;

      for (auto* pair : {&warm_acc, &local_acc}) {
        const SafeSetSnapshot& snap = pair == &warm_acc ? warm : local;
        const auto [over, under] = diff_safe_sets(snap, full);
        pair->seconds.push_back(snap.report.elapsed_seconds);
        pair->over_pct.push_back(over);
        pair->all_converged &= snap.report.converged;
        const std::size_t n = snap.value.values.size();
        std::size_t under_nodes =
            static_cast<std::size_t>(std::llround(under * n / 100.0));
        pair->under_nodes += under_nodes;
        if (under_nodes > 0) ++under_events;
        double excess = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
          excess = std::max(excess, snap.value.values[i] - full.value.values[i]);
        pair->max_value_excess = std::max(pair->max_value_excess, excess);
      }
      return full;  // the episode continues on the full chain
    };

    const EpisodeResult er = run_episode(run, BrsMethod::Full, &hook);

    BenchReport rep;
    rep.scenario = run.name;
    rep.sensor = run.sensor.kind == SensorKind::Lidar ? "lidar" : "camera";
    rep.planner = to_string(run.planner.kind);
    {
      std::ostringstream os;
      for (int d = 0; d < run.grid->dim_count; ++d)
        os << (d ? "x" : "") << run.grid->node_counts[d];
      rep.grid_desc = os.str();
    }
    {
      std::ostringstream os;
      os << run.name << "|" << rep.grid_desc << "|" << rep.sensor << "|" << rep.planner << "|"
         << run.solver.convergence_tol << "|" << run.local_delta_tol_scale;
      rep.config_hash = fnv1a(os.str());
    }
    rep.seed = seed;
    rep.rebuild_events = static_cast<int>(full_acc.seconds.size());
    rep.outcome = er.trajectory.outcome;

    const double full_mean =
        full_acc.seconds.empty()
            ? 0.0
            : std::accumulate(full_acc.seconds.begin(), full_acc.seconds.end(), 0.0) /
                  full_acc.seconds.size();
    rep.rows.push_back(summarize(BrsMethod::Full, full_acc, full_mean));
    rep.rows.push_back(summarize(BrsMethod::Warm, warm_acc, full_mean));
    rep.rows.push_back(summarize(BrsMethod::Local, local_acc, full_mean));
    reports.push_back(std::move(rep));
  }
  return reports;
}

void write_bench_csv(std::span<const BenchReport> reports, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_bench_csv: cannot open " + path);
  os << "scenario,sensor,planner,grid,seed,config_hash,rebuilds,outcome,method,"
        "mean_seconds,stddev_seconds,mean_over_pct,max_over_pct,under_nodes_total,"
        "max_value_excess,speedup_vs_full,all_converged\n";
  os << std::setprecision(12);
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      os << r.scenario << ',' << r.sensor << ',' << r.planner << ',' << r.grid_desc << ','
         << r.seed << ',' << r.config_hash << ',' << r.rebuild_events << ','
         << to_string(r.outcome) << ',' << to_string(row.method) << ',' << row.mean_seconds
         << ',' << row.stddev_seconds << ',' << row.mean_over_pct << ',' << row.max_over_pct
         << ',' << row.under_nodes_total << ',' << row.max_value_excess << ','
         << row.speedup_vs_full << ',' << (row.all_converged ? 1 : 0) << '\n';
    }
  }
}

std::string format_bench_table(std::span<const BenchReport> reports) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "scenario" << std::setw(8) << "sensor" << std::setw(8)
     << "planner" << std::setw(7) << "method" << std::right << std::setw(12) << "mean s"
     << std::setw(12) << "over %" << std::setw(12) << "max over %" << std::setw(10) << "under"
     << std::setw(10) << "speedup" << "\n";
  os << std::string(103, '-') << "\n";
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      os << std::left << std::setw(24) << r.scenario << std::setw(8) << r.sensor << std::setw(8)
         << r.planner << std::setw(7) << to_string(row.method) << std::right << std::fixed
         << std::setprecision(4) << std::setw(12) << row.mean_seconds << std::setw(12)
         << row.mean_over_pct << std::setw(12) << row.max_over_pct << std::setw(10)
         << row.under_nodes_total << std::setprecision(1) << std::setw(10)
         << row.speedup_vs_full << "\n";
      os.unsetf(std::ios::fixed);
    }
  }
  return os.str();
}

bool all_conservative(std::span<const BenchReport> reports) {
  for (const auto& r : reports)
    for (const auto& row : r.rows)
      if (row.method != BrsMethod::Full && row.under_nodes_total > 0) return false;
  return true;
}

}  // namespace hjnav
