#pragma once

#include <string>

#include "hjnav/scenario.hpp"

namespace hjnav {

/// Parse and cross-validate a scenario file. Throws ConfigError with the name
/// of the violated check.
Scenario load_scenario(const std::string& path);

Scenario scenario_from_json_text(const std::string& text);

/// Serialize the effective parameters (every default made explicit). A
/// serialize -> parse round trip reproduces the same effective scenario.
std::string scenario_to_json_text(const Scenario& sc);

void save_scenario(const Scenario& sc, const std::string& path);

}  // namespace hjnav
