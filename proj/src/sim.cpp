#include "hjnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hjnav {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::ReachedGoal: return "reached_goal";
    case Outcome::Collided: return "collided";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

DisturbanceMode disturbance_mode_from_string(const std::string& s) {
  if (s == "none") return DisturbanceMode::None;
  if (s == "random") return DisturbanceMode::Random;
  if (s == "adversarial") return DisturbanceMode::Adversarial;
  throw std::invalid_argument("unknown disturbance mode: " + s);
}

std::string to_string(DisturbanceMode m) {
  switch (m) {
    case DisturbanceMode::None: return "none";
    case DisturbanceMode::Random: return "random";
    case DisturbanceMode::Adversarial: return "adversarial";
  }
  return "?";
}

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

namespace {

StateVec add_scaled(const VehicleModel& m, const StateVec& x, const StateVec& k, double s) {
  StateVec y = x;
  for (int d = 0; d < m.state_dims(); ++d) y[d] += s * k[d];
  return y;
}

}  // namespace

StateVec integrate(const VehicleModel& model, const StateVec& x, const ControlVec& u,
                   const DisturbVec& d, double dt) {
  const StateVec k1 = flow(model, x, u, d);
  const StateVec k2 = flow(model, add_scaled(model, x, k1, 0.5 * dt), u, d);
  const StateVec k3 = flow(model, add_scaled(model, x, k2, 0.5 * dt), u, d);
  const StateVec k4 = flow(model, add_scaled(model, x, k3, dt), u, d);
  StateVec y = x;
  for (int i = 0; i < model.state_dims(); ++i)
    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  if (model.heading_periodic()) y[model.heading_dim()] = wrap_angle(y[model.heading_dim()]);
  return y;
}

EpisodeResult run_episode(const Scenario& sc, BrsMethod method, const RebuildHook* hook) {
  const Environment& env = sc.env;
  const VehicleModel& model = sc.model;
  const EpisodeConfig& ep = sc.episode;
  const StateGrid& grid = *sc.grid;

  if (model.position_dims() != 2)
    throw ConfigError("episode: closed-loop navigation requires a planar model");
  const Vec2 p0{ep.start[0], ep.start[1]};
  if (!env.in_workspace(p0)) throw ConfigError("episode: start position outside the workspace");
  if (env.inside_obstacle(p0)) throw ConfigError("episode: start position inside an obstacle");
  for (const auto& o : env.obstacles) {
    if (o.distance(p0) < ep.init_free_radius) {
      std::ostringstream os;
      os << "episode: an obstacle intrudes into the initial free disk (distance "
         << o.distance(p0) << " < " << ep.init_free_radius << ")";
      throw ConfigError(os.str());
    }
  }
  if (!(ep.control_dt > 0.0) || ep.control_dt > ep.safety_horizon)
    throw ConfigError("episode: control_dt must be positive and at most the safety horizon");
  if (!(ep.goal_radius > 0.0)) throw ConfigError("episode: goal radius must be positive");

  EpisodeResult result;
  KnownFreeMap map(sc.grid);
  for (std::uint32_t f = 0; f < map.position_total(); ++f) {
    const Vec2 c = map.position_of(f);
    const double dx = c[0] - p0[0], dy = c[1] - p0[1];
    if (dx * dx + dy * dy <= ep.init_free_radius * ep.init_free_radius) map.known_free[f] = 1;
  }

  const double epsilon = resolve_epsilon(grid, sc.safety);
  SafeSetSnapshot snapshot;
  {
    const ScalarField l0 = implicit_obstacle(map);
    snapshot = full_recompute(l0, model, sc.solver, epsilon, 0.0);
    result.rebuilds.push_back({0.0, BrsMethod::Full, snapshot.report, map.free_count()});
  }

  StateVec x = ep.start;
  {
    std::span<const double> xs(x.data(), static_cast<std::size_t>(grid.dim_count));
    if (!(interpolate(snapshot.value, xs) > epsilon))
      throw ConfigError("episode: start state outside the initial safe set");
  }

  Planner planner(sc.planner, env, model);
  std::mt19937_64 rng(ep.seed * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  Trajectory& traj = result.trajectory;
  traj.outcome = Outcome::Timeout;
  traj.min_obstacle_distance = env.obstacle_distance(p0);

  std::vector<std::uint32_t> delta_since_rebuild;
  double next_rebuild = ep.safety_horizon;
  bool in_safety_mode = false;

  const int steps = static_cast<int>(std::llround(ep.max_time / ep.control_dt));
  for (int i = 0; i < steps; ++i) {
    const double t = i * ep.control_dt;

    const SenseResult seen = sense(env, sc.sensor, map, std::span<const double>(x.data(), 2 + 1));
    const std::vector<std::uint32_t> delta = fuse(map, seen);
    delta_since_rebuild.insert(delta_since_rebuild.end(), delta.begin(), delta.end());

    const ControlVec u_plan = planner.plan_control(t, x, map);
    FilterDecision dec;
    if (sc.episode.filter_enabled) {
      dec = filter(snapshot, model, x, u_plan, sc.safety, in_safety_mode);
      in_safety_mode = dec.mode == FilterMode::Safety;
    } else {
      dec.mode = FilterMode::Planner;
      dec.control = u_plan;
      std::span<const double> xs(x.data(), static_cast<std::size_t>(grid.dim_count));
      dec.value_at_state = in_bounds(grid, xs) ? interpolate(snapshot.value, xs)
                                               : -std::numeric_limits<double>::infinity();
      dec.snapshot_time = snapshot.computed_at;
    }

    DisturbVec d{};
    switch (ep.disturbance_mode) {
      case DisturbanceMode::None:
        break;
      case DisturbanceMode::Random:
        d[0] = model.disturbance_radius * unif(rng);
        d[1] = model.disturbance_radius * unif(rng);
        break;
      case DisturbanceMode::Adversarial: {
        std::span<const double> xs(x.data(), static_cast<std::size_t>(grid.dim_count));
        if (in_bounds(grid, xs)) {
          d = optimal_disturbance(model, x, value_gradient(snapshot.value, x));
        }
        break;
      }
    }

    traj.samples.push_back({t, x, dec.control, u_plan, dec.mode, dec.value_at_state,
                            dec.snapshot_time, dec.flagged});

    // Integrate the control period in substeps with an exact geometric
    // collision check on every substep segment.
    bool collided = false;
    const int nsub = std::max(1, static_cast<int>(std::ceil(ep.control_dt / ep.integrate_substep)));
    const double h = ep.control_dt / nsub;
    for (int s = 0; s < nsub; ++s) {
      const StateVec xn = integrate(model, x, dec.control, d, h);
      const Vec2 a{x[0], x[1]}, b{xn[0], xn[1]};
      traj.min_obstacle_distance = std::min(traj.min_obstacle_distance, env.obstacle_distance(b));
      if (env.inside_obstacle(b) || env.segment_blocked(a, b)) {
        traj.min_obstacle_distance = std::min(traj.min_obstacle_distance, 0.0);
        collided = true;
      }
      x = xn;
      if (collided) break;
    }
    const double t_next = t + ep.control_dt;
    if (collided) {
      traj.outcome = Outcome::Collided;
      break;
    }
    const double goal_d = std::hypot(x[0] - env.goal.center[0], x[1] - env.goal.center[1]);
    if (goal_d <= ep.goal_radius) {
      traj.outcome = Outcome::ReachedGoal;
      break;
    }

    if (t_next >= next_rebuild - 1e-9) {
      std::sort(delta_since_rebuild.begin(), delta_since_rebuild.end());
      delta_since_rebuild.erase(
          std::unique(delta_since_rebuild.begin(), delta_since_rebuild.end()),
          delta_since_rebuild.end());
      const ScalarField l_t = implicit_obstacle(map);
      SafeSetSnapshot next_snapshot;
      if (hook) {
        next_snapshot = (*hook)(map, l_t, snapshot, delta_since_rebuild, t_next);
      } else {
        switch (method) {
          case BrsMethod::Full:
            next_snapshot = full_recompute(l_t, model, sc.solver, epsilon, t_next);
            break;
          case BrsMethod::Warm:
            next_snapshot = warm_solve(snapshot.value, l_t, delta_since_rebuild, model, sc.solver,
                                       epsilon, t_next);
            break;
          case BrsMethod::Local:
            next_snapshot = local_update(snapshot.value, l_t, delta_since_rebuild, model,
                                         sc.solver, sc.local_delta_tol_scale, epsilon, t_next);
            break;
        }
      }
      result.rebuilds.push_back(
          {t_next, next_snapshot.method, next_snapshot.report, delta_since_rebuild.size()});
      snapshot = std::move(next_snapshot);
      delta_since_rebuild.clear();
      next_rebuild += ep.safety_horizon;
    }
  }

  result.final_snapshot = std::move(snapshot);
  result.final_map = std::move(map);
  return result;
}

}  // namespace hjnav
