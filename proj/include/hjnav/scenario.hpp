#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "hjnav/brs.hpp"
#include "hjnav/dynamics.hpp"
#include "hjnav/env.hpp"
#include "hjnav/hji.hpp"
#include "hjnav/plan.hpp"
#include "hjnav/safety.hpp"

namespace hjnav {

/// Scenario/configuration problems: reported to the CLI as exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DisturbanceMode { None, Random, Adversarial };

DisturbanceMode disturbance_mode_from_string(const std::string& s);
std::string to_string(DisturbanceMode m);

struct EpisodeConfig {
  double control_dt = 0.05;      // s
  double safety_horizon = 1.0;   // s between snapshot rebuilds
  double max_time = 60.0;        // s
  DisturbanceMode disturbance_mode = DisturbanceMode::Random;
  std::uint64_t seed = 1;
  double goal_radius = 0.3;      // m
  double init_free_radius = 1.5; // m, radius of the known obstacle-free disk
  StateVec start{};
  double integrate_substep = 0.01;  // s
  bool filter_enabled = true;       // test hook; the planner runs unguarded when false
};

/// Everything one episode needs, cross-validated on load.
struct Scenario {
  std::string name;
  Environment env;
  VehicleModel model;
  SensorSpec sensor;
  PlannerConfig planner;
  GridPtr grid;
  SolverConfig solver;
  SafetyConfig safety;
  EpisodeConfig episode;
  double local_delta_tol_scale = kDefaultDeltaTolScale;
  std::string output_dir = "out";
};

}  // namespace hjnav
