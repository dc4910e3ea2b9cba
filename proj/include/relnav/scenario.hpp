#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relnav/almanac.hpp"
#include "relnav/planner.hpp"
#include "relnav/relmap.hpp"
#include "relnav/scene.hpp"

namespace relnav::scenario {

// One configuration document drives every command; unset keys fall back to
// the defaults visible via default_scenario_text().
struct Scenario {
  scene::Scene scene{orbits::GeodeticPosition{}, {}, {}, "empty"};
  std::vector<orbits::AlmanacRecord> almanac;
  std::string almanac_id;
  std::vector<double> epochs;
  relmap::MapConfig map;
  planner::PlannerConfig plan;
  std::string plan_start;
  std::string plan_target;

  // Receiver placement for the measurement-simulation command.
  std::string sim_node;           // empty = first network node
  double sim_lateral_offset = 0.0;  // m from the centerline
  std::uint64_t sim_seed = 1;

  std::string config_hash;  // over the fully-merged configuration document
};

Scenario load_scenario(const std::string& path);
Scenario load_scenario_text(const std::string& text, const std::string& base_dir);

std::string default_scenario_text();

// FNV-1a over the canonical (sorted-key) dump; stable across runs.
std::string fnv1a_hex(const std::string& data);

}  // namespace relnav::scenario
