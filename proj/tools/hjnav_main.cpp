#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hjnav/bench.hpp"
#include "hjnav/config.hpp"
#include "hjnav/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hjnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCollision = 3;
constexpr int kExitTimeout = 4;
constexpr int kExitUnderConservative = 5;

std::string default_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("HJNAV_OUT")) return env;
  return "out";
}

void write_trajectory_csv(const Scenario& sc, const Trajectory& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << std::setprecision(12);
  const bool four = sc.model.kind == ModelKind::Dubins4;
  os << "t,px,py,phi" << (four ? ",v" : "") << ",u0,u1,mode,V\n";
  for (const auto& s : traj.samples) {
    os << s.t << ',' << s.x[0] << ',' << s.x[1] << ',' << s.x[2];
    if (four) os << ',' << s.x[3];
    os << ',' << s.u[0] << ',' << s.u[1] << ','
       << (s.mode == FilterMode::Planner ? "planner" : "safety") << ',' << s.value << '\n';
  }
  os << "# outcome=" << to_string(traj.outcome)
     << " min_obstacle_distance=" << traj.min_obstacle_distance << '\n';
}

void write_decision_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << std::setprecision(12);
  os << "t,px,py,phi,mode,u0,u1,V,snapshot_time,flagged\n";
  for (const auto& s : traj.samples) {
    os << s.t << ',' << s.x[0] << ',' << s.x[1] << ',' << s.x[2] << ','
       << (s.mode == FilterMode::Planner ? "planner" : "safety") << ',' << s.u[0] << ','
       << s.u[1] << ',' << s.value << ',' << s.snapshot_time << ',' << (s.flagged ? 1 : 0)
       << '\n';
  }
}

void write_snapshot(const SafeSetSnapshot& snap, const std::string& stem) {
  write_field(snap.value, stem + ".fld");
  json j;
  j["method"] = to_string(snap.method);
  j["epsilon"] = snap.epsilon;
  j["computed_at"] = snap.computed_at;
  j["iterations"] = snap.report.iterations;
  j["elapsed_seconds"] = snap.report.elapsed_seconds;
  j["final_residual"] = snap.report.final_residual;
  j["nodes_updated_total"] = snap.report.nodes_updated_total;
  j["converged"] = snap.report.converged;
  std::ofstream os(stem + ".json");
  os << j.dump(2) << "\n";
}

int cmd_run(const std::string& config_path, const std::string& method_str, std::uint64_t seed,
            bool seed_given, const std::string& out_flag) {
  Scenario sc;
  BrsMethod method;
  try {
    sc = load_scenario(config_path);
    method = brs_method_from_string(method_str);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (seed_given) {
    sc.episode.seed = seed;
    sc.planner.seed = seed;
  }
  const fs::path out_dir = default_out_dir(out_flag.empty() ? sc.output_dir : out_flag);

  EpisodeResult result;
  try {
    fs::create_directories(out_dir);
    result = run_episode(sc, method);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const Trajectory& traj = result.trajectory;
  write_trajectory_csv(sc, traj, (out_dir / "trajectory.csv").string());
  write_decision_csv(traj, (out_dir / "decisions.csv").string());
  plot_trajectory(sc.env, traj, {sc.episode.start[0], sc.episode.start[1]},
                  sc.episode.init_free_radius, (out_dir / "trajectory.svg").string());
  write_snapshot(result.final_snapshot, (out_dir / "snapshot_final").string());
  write_map_pbm(result.final_map, (out_dir / "map.pbm").string());

  {
    json j;
    j["scenario"] = sc.name;
    j["method"] = to_string(method);
    j["seed"] = sc.episode.seed;
    j["outcome"] = to_string(traj.outcome);
    j["min_obstacle_distance"] = traj.min_obstacle_distance;
    j["steps"] = traj.samples.size();
    j["rebuilds"] = result.rebuilds.size();
    double rebuild_seconds = 0.0;
    for (const auto& r : result.rebuilds) rebuild_seconds += r.report.elapsed_seconds;
    j["rebuild_wall_seconds_total"] = rebuild_seconds;
    std::ofstream os(out_dir / "summary.json");
    os << j.dump(2) << "\n";
  }

  std::cout << sc.name << " [" << to_string(method) << ", seed " << sc.episode.seed
            << "]: " << to_string(traj.outcome)
            << " (min obstacle distance " << traj.min_obstacle_distance << " m, "
            << traj.samples.size() << " steps, " << result.rebuilds.size() << " rebuilds)\n";

  switch (traj.outcome) {
    case Outcome::ReachedGoal: return kExitOk;
    case Outcome::Collided: return kExitCollision;
    case Outcome::Timeout: return kExitTimeout;
  }
  return kExitConfig;
}

bool glob_match(const std::string& pattern, const std::string& name) {
  // Greedy '*' / '?' matcher, enough for scenario file patterns.
  std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  const fs::path pat(pattern);
  std::vector<std::string> out;
  if (pattern.find('*') == std::string::npos && pattern.find('?') == std::string::npos) {
    if (fs::exists(pat)) out.push_back(pattern);
    return out;
  }
  const fs::path dir = pat.parent_path().empty() ? fs::path(".") : pat.parent_path();
  if (!fs::is_directory(dir)) return out;
  const std::string leaf = pat.filename().string();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (glob_match(leaf, entry.path().filename().string()))
      out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_bench(const std::string& glob, const std::vector<std::string>& methods,
              const std::vector<std::uint64_t>& seeds, const std::string& out_flag) {
  const std::vector<std::string> files = expand_glob(glob);
  if (files.empty()) {
    std::cerr << "error: no scenario files match '" << glob << "'\n";
    return kExitConfig;
  }
  std::vector<std::string> keep = methods;
  if (keep.empty()) keep = {"full", "warm", "local"};
  for (const auto& m : keep) {
    try {
      brs_method_from_string(m);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }

  const fs::path out_dir = default_out_dir(out_flag);
  std::vector<BenchReport> all;
  try {
    fs::create_directories(out_dir);
    for (const auto& f : files) {
      const Scenario sc = load_scenario(f);
      std::cerr << "benchmarking " << sc.name << " (" << files.size() << " scenario file(s))\n";
      auto reports = run_benchmark(sc, seeds);
      all.insert(all.end(), reports.begin(), reports.end());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const bool conservative = all_conservative(all);

  // Row filter applies to the emitted report only; the conservatism gate
  // always checks every computed method.
  std::vector<BenchReport> filtered = all;
  for (auto& r : filtered) {
    std::vector<MethodSummary> rows;
    for (const auto& row : r.rows) {
      if (std::find(keep.begin(), keep.end(), to_string(row.method)) != keep.end())
        rows.push_back(row);
    }
    r.rows = std::move(rows);
  }

  write_bench_csv(filtered, (out_dir / "bench.csv").string());
  const std::string table = format_bench_table(filtered);
  {
    std::ofstream os(out_dir / "bench.txt");
    os << table;
  }
  std::cout << table;
  if (!conservative) {
    std::cerr << "error: under-conservative nodes detected (conservatism guarantee violated)\n";
    return kExitUnderConservative;
  }
  return kExitOk;
}

int cmd_inspect(const std::string& snapshot_path, const std::string& slice_spec,
                double epsilon_flag, bool epsilon_given, const std::string& out_path) {
  ScalarField field;
  try {
    field = read_field(snapshot_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const StateGrid& g = *field.grid;

  double epsilon = 0.0;
  if (epsilon_given) {
    epsilon = epsilon_flag;
  } else {
    const fs::path sidecar = fs::path(snapshot_path).replace_extension(".json");
    if (fs::exists(sidecar)) {
      std::ifstream is(sidecar);
      json j;
      is >> j;
      epsilon = j.value("epsilon", 0.0);
    }
  }

  // Fixed indices for the non-position dimensions from "name=value" pairs.
  std::array<int, kMaxDim> fixed{};
  std::vector<bool> have(static_cast<std::size_t>(g.dim_count), false);
  have[0] = have[1] = true;
  if (!slice_spec.empty()) {
    std::istringstream ss(slice_spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: bad slice spec '" << item << "' (want name=value)\n";
        return kExitConfig;
      }
      const std::string name = item.substr(0, eq);
      double value = 0.0;
      try {
        value = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        std::cerr << "error: bad slice value in '" << item << "'\n";
        return kExitConfig;
      }
      int dim = -1;
      if (name == "phi") dim = 2;
      else if (name == "v") dim = 3;
      if (dim < 0 || dim >= g.dim_count) {
        std::cerr << "error: unknown slice dimension '" << name << "'\n";
        return kExitConfig;
      }
      double u = (value - g.lower[dim]) / g.spacing[dim];
      if (g.periodic[dim]) {
        u = std::fmod(u, static_cast<double>(g.node_counts[dim]));
        if (u < 0) u += g.node_counts[dim];
      } else if (u < -0.5 || u > g.node_counts[dim] - 0.5) {
        std::cerr << "error: slice value " << value << " outside grid on '" << name << "'\n";
        return kExitConfig;
      }
      int idx = static_cast<int>(std::lround(u));
      if (idx >= g.node_counts[dim]) idx = g.periodic[dim] ? 0 : g.node_counts[dim] - 1;
      fixed[dim] = idx;
      have[static_cast<std::size_t>(dim)] = true;
    }
  }
  for (int d = 2; d < g.dim_count; ++d) {
    if (!have[static_cast<std::size_t>(d)]) {
      std::cerr << "error: missing slice value for dimension " << d
                << " (use --slice, e.g. phi=1.57)\n";
      return kExitConfig;
    }
  }

  const std::string out = out_path.empty()
                              ? fs::path(snapshot_path).replace_extension(".svg").string()
                              : out_path;
  const SliceRender r = plot_value_slice(field, fixed, epsilon, nullptr, out);
  std::cout << "slice written to " << out << ": " << r.contour_segment_count
            << " contour segment(s)"
            << (r.entire_slice_safe ? ", entire slice above the activation level" : "") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-based reachability safety filter and navigation simulator"};
  app.require_subcommand(1);

  std::string config_path, method_str = "local", out_flag, glob, slice_spec, snapshot_path,
              inspect_out;
  std::uint64_t seed = 0;
  double epsilon_flag = 0.0;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;

  auto* run = app.add_subcommand("run", "Run one closed-loop navigation episode");
  run->add_option("config", config_path, "Scenario file")->required();
  auto* mopt = run->add_option("--method", method_str, "BRS update method: full|warm|local");
  mopt->check(CLI::IsMember({"full", "warm", "local"}));
  auto* sopt = run->add_option("--seed", seed, "Disturbance/planner seed");
  run->add_option("--out", out_flag, "Output directory (default: config output_dir or $HJNAV_OUT)");

  auto* bench = app.add_subcommand("bench", "Compare BRS update methods on scenario files");
  bench->add_option("glob", glob, "Scenario file or glob pattern")->required();
  bench->add_option("--methods", methods, "Methods to report")->delimiter(',');
  bench->add_option("--seeds", seeds, "Episode seeds")->delimiter(',');
  bench->add_option("--out", out_flag, "Output directory");

  auto* inspect = app.add_subcommand("inspect", "Render a value-snapshot slice");
  inspect->add_option("snapshot", snapshot_path, "Snapshot .fld file")->required();
  inspect->add_option("--slice", slice_spec, "Fixed coordinates, e.g. \"phi=1.57\"");
  auto* eopt = inspect->add_option("--epsilon", epsilon_flag, "Activation level override");
  inspect->add_option("--out", inspect_out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (run->parsed()) return cmd_run(config_path, method_str, seed, sopt->count() > 0, out_flag);
  if (bench->parsed()) return cmd_bench(glob, methods, seeds, out_flag);
  if (inspect->parsed())
    return cmd_inspect(snapshot_path, slice_spec, epsilon_flag, eopt->count() > 0, inspect_out);
  return kExitConfig;
}
