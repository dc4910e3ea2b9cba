#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relnav/almanac.hpp"
#include "relnav/araim.hpp"
#include "relnav/scene.hpp"
#include "relnav/signal.hpp"

namespace relnav::relmap {

using orbits::AlmanacRecord;
using orbits::SatelliteState;
using orbits::SatId;
using orbits::Vec3;
using scene::ReceptionCondition;
using scene::Scene;
using scene::Vec2;

struct MapNode {
  std::string node_id;
  Vec3 position;                        // scene frame, road surface
  Vec2 lateral_dir{0.0, 1.0};           // unit; offsets are applied along it
  std::vector<double> lateral_offsets;  // m, signed, lane centers and road edges
};

// Road centerlines resampled into map nodes plus the adjacency the planner
// consumes.  Nodes closer than 1 mm are merged, which joins crossing roads.
struct RoadNetwork {
  std::vector<MapNode> nodes;
  std::vector<std::pair<int, int>> edges;
};

struct MapConfig {
  double mask = deg2rad(33.0);
  double antenna_height = 1.7;  // m
  double node_spacing = 10.0;   // m along centerlines
  bool include_road_edges = true;
  int n_threads = 0;  // 0 = hardware concurrency
  signal::ChipParams chip;
  signal::ErrorModelConfig error_model;
  araim::IntegrityConfig integrity;
  scene::QueryOptions query;
  std::string almanac_id;
  std::string config_hash;
};

struct ConservativeView {
  ReceptionCondition condition = ReceptionCondition::kNoSignal;
  double bias = 0.0;       // m, worst applicable range bias across offsets
  double elevation = 0.0;  // rad, lowest across offsets (drives the noise sigma)
};

struct HplCell {
  std::string node_id;
  double x = 0.0, y = 0.0;  // scene frame, m
  double epoch = 0.0;
  std::optional<double> value;  // m; empty = UNAVAILABLE
  int n_visible = 0;
  std::vector<std::pair<SatId, ReceptionCondition>> conditions;
};

struct HplMap {
  std::vector<HplCell> cells;
  std::vector<double> epochs;
  double mask = 0.0;
  std::string scene_id;
  std::string almanac_id;
  std::string config_hash;

  const HplCell* find(const std::string& node_id, double epoch) const;
  void save(const std::string& csv_path) const;  // plus <csv_path>.meta.json
  static HplMap load(const std::string& csv_path);

 private:
  mutable std::unordered_map<std::string, size_t> index_;
  void build_index() const;
};

int severity(ReceptionCondition c);

RoadNetwork build_network(const Scene& scene, const MapConfig& cfg);

// Worst reception condition, bias, and elevation over the node's lateral
// offsets: a satellite lost at any lateral position is treated as lost, and
// the largest bias across positions is kept.
ConservativeView conservative_visibility(const Scene& scene, const MapNode& node,
                                         const SatelliteState& sat, const MapConfig& cfg);

HplCell predict_cell(const Scene& scene, const MapNode& node,
                     const std::vector<SatelliteState>& sats, double epoch,
                     const MapConfig& cfg);

// Same pipeline pinned to a single lateral offset (no conservative sweep).
HplCell predict_cell_at_offset(const Scene& scene, const MapNode& node, double offset,
                               const std::vector<SatelliteState>& sats, double epoch,
                               const MapConfig& cfg);

struct MeasuredCell {
  double epoch = 0.0;
  std::optional<double> value;  // m; empty = unavailable (FDE failed or short)
  int n_used = 0;               // measurements in the final consistent set
  std::vector<SatId> excluded;
};

// What a receiver parked at one lateral offset would see: lane-specific
// visibility and biases, seeded measurement noise, then the detection,
// exclusion, and protection-level chain on those measurements.
MeasuredCell simulate_measured_cell(const Scene& scene, const MapNode& node, double offset,
                                    const std::vector<SatelliteState>& sats, double epoch,
                                    const MapConfig& cfg, std::uint64_t seed);

HplMap generate_map(const Scene& scene, const std::vector<MapNode>& nodes,
                    const std::vector<AlmanacRecord>& almanac, const std::vector<double>& epochs,
                    const MapConfig& cfg);

}  // namespace relnav::relmap
