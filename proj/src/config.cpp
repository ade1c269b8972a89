#include "hjnav/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hjnav {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key, const char* where) {
  const auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(std::string("config: missing '") + key + "' in " + where);
  return *it;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

Vec2 vec2(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(std::string("config: expected [x, y] for ") + where);
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }

  Scenario sc;
  sc.name = get_or<std::string>(j, "name", "scenario");
  sc.output_dir = get_or<std::string>(j, "output_dir", "out");

  // Environment
  {
    const json& je = need(j, "environment", "scenario");
    const json& jw = need(je, "workspace", "environment");
    sc.env.workspace_min = vec2(need(jw, "min", "workspace"), "workspace.min");
    sc.env.workspace_max = vec2(need(jw, "max", "workspace"), "workspace.max");
    if (!(sc.env.workspace_min[0] < sc.env.workspace_max[0]) ||
        !(sc.env.workspace_min[1] < sc.env.workspace_max[1]))
      throw ConfigError("config: degenerate workspace rectangle");
    if (je.contains("obstacles")) {
      for (const auto& jo : je["obstacles"]) {
        const std::string type = need(jo, "type", "obstacle").get<std::string>();
        if (type == "rect") {
          sc.env.obstacles.push_back(Obstacle::rect(vec2(need(jo, "min", "rect"), "rect.min"),
                                                    vec2(need(jo, "max", "rect"), "rect.max")));
        } else if (type == "circle") {
          sc.env.obstacles.push_back(Obstacle::circle(
              vec2(need(jo, "center", "circle"), "circle.center"),
              need(jo, "radius", "circle").get<double>()));
        } else {
          throw ConfigError("config: unknown obstacle type '" + type + "'");
        }
      }
    }
    const json& jg = need(je, "goal", "environment");
    sc.env.goal.center = vec2(need(jg, "center", "goal"), "goal.center");
    sc.env.goal.radius = get_or<double>(jg, "radius", 0.3);
    sc.env.goal.heading = get_or<double>(jg, "heading", 0.0);
  }

  // Model
  std::array<double, 2> speed_bounds{0.0, 0.0};
  {
    const json& jm = need(j, "model", "scenario");
    const std::string kind = need(jm, "kind", "model").get<std::string>();
    if (kind == "dubins3") {
      sc.model = VehicleModel::dubins3(
          get_or<double>(jm, "v_min", 0.1), get_or<double>(jm, "v_max", 1.0),
          get_or<double>(jm, "omega_max", 1.0), get_or<double>(jm, "disturbance_radius", 0.1));
    } else if (kind == "dubins4") {
      speed_bounds[0] = get_or<double>(jm, "speed_min", 0.0);
      speed_bounds[1] = get_or<double>(jm, "speed_max", 1.2);
      if (!(speed_bounds[0] < speed_bounds[1]))
        throw ConfigError("config: dubins4 speed bounds must satisfy speed_min < speed_max");
      sc.model = VehicleModel::dubins4(
          get_or<double>(jm, "a_max", 0.4), get_or<double>(jm, "omega_max", 1.1),
          std::max(std::abs(speed_bounds[0]), std::abs(speed_bounds[1])),
          get_or<double>(jm, "disturbance_radius", 0.0));
    } else {
      throw ConfigError("config: episodes support dubins3/dubins4, got '" + kind + "'");
    }
  }

  // Sensor
  {
    const json& js = need(j, "sensor", "scenario");
    const std::string kind = need(js, "kind", "sensor").get<std::string>();
    if (kind == "lidar") {
      sc.sensor = SensorSpec::lidar(get_or<double>(js, "range", 3.0),
                                    get_or<int>(js, "ray_count", 360));
    } else if (kind == "camera") {
      sc.sensor = SensorSpec::camera(get_or<double>(js, "range", 20.0),
                                     get_or<double>(js, "fov", M_PI / 3.0),
                                     get_or<int>(js, "ray_count", 120));
    } else {
      throw ConfigError("config: unknown sensor kind '" + kind + "'");
    }
    if (!(sc.sensor.range > 0.0)) throw ConfigError("config: sensor range must be positive");
    if (sc.sensor.kind == SensorKind::Camera &&
        !(sc.sensor.fov > 0.0 && sc.sensor.fov < 2.0 * M_PI))
      throw ConfigError("config: camera fov must lie in (0, 2*pi)");
  }

  // Planner
  {
    const json& jp = need(j, "planner", "scenario");
    sc.planner.kind = planner_kind_from_string(need(jp, "kind", "planner").get<std::string>());
    sc.planner.replan_period = get_or<double>(jp, "replan_period", 1.0);
    sc.planner.heading_gain = get_or<double>(jp, "heading_gain", 2.0);
    sc.planner.lookahead = get_or<double>(jp, "lookahead", 0.8);
    sc.planner.cruise_speed = get_or<double>(jp, "cruise_speed", 1.0);
    sc.planner.rrt_step = get_or<double>(jp, "rrt_step", 0.5);
    sc.planner.rrt_max_samples = get_or<int>(jp, "rrt_max_samples", 3000);
    sc.planner.rrt_goal_bias = get_or<double>(jp, "rrt_goal_bias", 0.1);
  }

  // Grid
  {
    const json& jg = need(j, "grid", "scenario");
    const json& jc = need(jg, "counts", "grid");
    const int nd = sc.model.state_dims();
    if (static_cast<int>(jc.size()) != nd)
      throw ConfigError("config: grid counts must match the model state dimension");
    std::vector<double> lo{sc.env.workspace_min[0], sc.env.workspace_min[1]};
    std::vector<double> hi{sc.env.workspace_max[0], sc.env.workspace_max[1]};
    std::vector<char> per{0, 0};
    lo.push_back(-M_PI);
    hi.push_back(M_PI);
    per.push_back(1);
    if (sc.model.kind == ModelKind::Dubins4) {
      lo.push_back(speed_bounds[0]);
      hi.push_back(speed_bounds[1]);
      per.push_back(0);
    }
    std::vector<int> counts;
    for (const auto& c : jc) counts.push_back(c.get<int>());
    try {
      sc.grid = build_grid_ptr(lo, hi, counts, per, 2);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  // Solver
  if (j.contains("solver")) {
    const json& js = j["solver"];
    sc.solver.cfl = get_or<double>(js, "cfl", 0.5);
    sc.solver.convergence_tol = get_or<double>(js, "convergence_tol", 1e-4);
    sc.solver.max_iterations = get_or<int>(js, "max_iterations", 20000);
    sc.solver.derivative_order = get_or<int>(js, "derivative_order", 1);
    const std::string diss = get_or<std::string>(js, "dissipation", "local");
    if (diss == "local")
      sc.solver.dissipation = DissipationMode::Local;
    else if (diss == "global")
      sc.solver.dissipation = DissipationMode::Global;
    else
      throw ConfigError("config: dissipation must be 'local' or 'global'");
    sc.solver.parallel = get_or<bool>(js, "parallel", true);
    if (!(sc.solver.cfl > 0.0 && sc.solver.cfl <= 1.0))
      throw ConfigError("config: cfl must lie in (0, 1]");
    if (!(sc.solver.convergence_tol > 0.0))
      throw ConfigError("config: convergence_tol must be positive");
    if (sc.solver.derivative_order != 1 && sc.solver.derivative_order != 3)
      throw ConfigError("config: derivative_order must be 1 or 3");
  }

  // Safety
  if (j.contains("safety")) {
    const json& js = j["safety"];
    sc.safety.epsilon_scale = get_or<double>(js, "epsilon_scale", 1.5);
    if (js.contains("epsilon_override"))
      sc.safety.epsilon_override = js["epsilon_override"].get<double>();
    sc.safety.hysteresis = get_or<bool>(js, "hysteresis", false);
  }

  if (j.contains("brs"))
    sc.local_delta_tol_scale =
        get_or<double>(j["brs"], "local_delta_tol_scale", kDefaultDeltaTolScale);

  // Episode
  {
    const json& je = need(j, "episode", "scenario");
    const json& jstart = need(je, "start", "episode");
    if (static_cast<int>(jstart.size()) != sc.model.state_dims())
      throw ConfigError("config: episode start must match the model state dimension");
    for (std::size_t d = 0; d < jstart.size(); ++d) sc.episode.start[d] = jstart[d].get<double>();
    sc.episode.control_dt = get_or<double>(je, "control_dt", 0.05);
    sc.episode.safety_horizon = get_or<double>(je, "safety_horizon", 1.0);
    sc.episode.max_time = get_or<double>(je, "max_time", 60.0);
    sc.episode.disturbance_mode =
        disturbance_mode_from_string(get_or<std::string>(je, "disturbance_mode", "random"));
    sc.episode.seed = get_or<std::uint64_t>(je, "seed", 1);
    sc.episode.goal_radius = sc.env.goal.radius;
    sc.episode.init_free_radius = get_or<double>(je, "init_free_radius", 1.5);
    sc.episode.integrate_substep = get_or<double>(je, "integrate_substep", 0.01);
    sc.episode.filter_enabled = get_or<bool>(je, "filter_enabled", true);
    sc.planner.seed = sc.episode.seed;
  }

  // Cross-validation
  for (std::size_t i = 0; i < sc.env.obstacles.size(); ++i) {
    const Obstacle& o = sc.env.obstacles[i];
    const bool ok = o.shape == Obstacle::Shape::Rect
                        ? sc.env.in_workspace(o.rect_min) && sc.env.in_workspace(o.rect_max)
                        : sc.env.in_workspace({o.center[0] - o.radius, o.center[1] - o.radius}) &&
                              sc.env.in_workspace({o.center[0] + o.radius, o.center[1] + o.radius});
    if (!ok)
      throw ConfigError("config: obstacle " + std::to_string(i) + " extends outside the workspace");
  }
  if (!sc.env.in_workspace(sc.env.goal.center))
    throw ConfigError("config: goal center outside the workspace");
  if (sc.env.inside_obstacle(sc.env.goal.center))
    throw ConfigError("config: goal center inside an obstacle");
  {
    const Vec2 p0{sc.episode.start[0], sc.episode.start[1]};
    if (!sc.env.in_workspace(p0)) throw ConfigError("config: start position outside the workspace");
    if (sc.env.inside_obstacle(p0)) throw ConfigError("config: start position inside an obstacle");
  }
  if (!(sc.episode.control_dt > 0.0) || sc.episode.control_dt > sc.episode.safety_horizon)
    throw ConfigError("config: control_dt must be positive and at most safety_horizon");
  if (!(sc.episode.goal_radius > 0.0)) throw ConfigError("config: goal radius must be positive");
  if (!(sc.episode.init_free_radius > 0.0))
    throw ConfigError("config: init_free_radius must be positive");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["output_dir"] = sc.output_dir;

  json jw;
  jw["min"] = {sc.env.workspace_min[0], sc.env.workspace_min[1]};
  jw["max"] = {sc.env.workspace_max[0], sc.env.workspace_max[1]};
  json jobs = json::array();
  for (const auto& o : sc.env.obstacles) {
    json jo;
    if (o.shape == Obstacle::Shape::Rect) {
      jo["type"] = "rect";
      jo["min"] = {o.rect_min[0], o.rect_min[1]};
      jo["max"] = {o.rect_max[0], o.rect_max[1]};
    } else {
      jo["type"] = "circle";
      jo["center"] = {o.center[0], o.center[1]};
      jo["radius"] = o.radius;
    }
    jobs.push_back(jo);
  }
  j["environment"] = {{"workspace", jw},
                      {"obstacles", jobs},
                      {"goal",
                       {{"center", {sc.env.goal.center[0], sc.env.goal.center[1]}},
                        {"radius", sc.env.goal.radius},
                        {"heading", sc.env.goal.heading}}}};

  json jm;
  jm["kind"] = to_string(sc.model.kind);
  if (sc.model.kind == ModelKind::Dubins3) {
    jm["v_min"] = sc.model.control_lo[0];
    jm["v_max"] = sc.model.control_hi[0];
    jm["omega_max"] = sc.model.control_hi[1];
    jm["disturbance_radius"] = sc.model.disturbance_radius;
  } else {
    jm["a_max"] = sc.model.control_hi[0];
    jm["omega_max"] = sc.model.control_hi[1];
    jm["speed_min"] = sc.grid->lower[3];
    jm["speed_max"] = sc.grid->upper[3];
    jm["disturbance_radius"] = sc.model.disturbance_radius;
  }
  j["model"] = jm;

  json js;
  js["kind"] = sc.sensor.kind == SensorKind::Lidar ? "lidar" : "camera";
  js["range"] = sc.sensor.range;
  if (sc.sensor.kind == SensorKind::Camera) js["fov"] = sc.sensor.fov;
  js["ray_count"] = sc.sensor.ray_count;
  j["sensor"] = js;

  j["planner"] = {{"kind", to_string(sc.planner.kind)},
                  {"replan_period", sc.planner.replan_period},
                  {"heading_gain", sc.planner.heading_gain},
                  {"lookahead", sc.planner.lookahead},
                  {"cruise_speed", sc.planner.cruise_speed},
                  {"rrt_step", sc.planner.rrt_step},
                  {"rrt_max_samples", sc.planner.rrt_max_samples},
                  {"rrt_goal_bias", sc.planner.rrt_goal_bias}};

  json jc = json::array();
  for (int d = 0; d < sc.grid->dim_count; ++d) jc.push_back(sc.grid->node_counts[d]);
  j["grid"] = {{"counts", jc}};

  j["solver"] = {{"cfl", sc.solver.cfl},
                 {"convergence_tol", sc.solver.convergence_tol},
                 {"max_iterations", sc.solver.max_iterations},
                 {"derivative_order", sc.solver.derivative_order},
                 {"dissipation",
                  sc.solver.dissipation == DissipationMode::Local ? "local" : "global"},
                 {"parallel", sc.solver.parallel}};

  json jsf;
  jsf["epsilon_scale"] = sc.safety.epsilon_scale;
  if (sc.safety.epsilon_override) jsf["epsilon_override"] = *sc.safety.epsilon_override;
  jsf["hysteresis"] = sc.safety.hysteresis;
  j["safety"] = jsf;

  j["brs"] = {{"local_delta_tol_scale", sc.local_delta_tol_scale}};

  json je;
  json jstart = json::array();
  for (int d = 0; d < sc.model.state_dims(); ++d) jstart.push_back(sc.episode.start[d]);
  je["start"] = jstart;
  je["control_dt"] = sc.episode.control_dt;
  je["safety_horizon"] = sc.episode.safety_horizon;
  je["max_time"] = sc.episode.max_time;
  je["disturbance_mode"] = to_string(sc.episode.disturbance_mode);
  je["seed"] = sc.episode.seed;
  je["init_free_radius"] = sc.episode.init_free_radius;
  je["integrate_substep"] = sc.episode.integrate_substep;
  je["filter_enabled"] = sc.episode.filter_enabled;
  j["episode"] = je;

  return j.dump(2);
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("config: cannot open " + path + " for writing");
  os << scenario_to_json_text(sc) << "\n";
}

}  // namespace hjnav
