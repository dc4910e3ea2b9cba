#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relnav/relmap.hpp"

namespace relnav::planner {

using relmap::HplMap;
using scene::Vec2;

struct GraphNode {
  std::string id;
  Vec2 position;  // scene frame, m
};

struct GraphEdge {
  int a = 0;
  int b = 0;
  double length = 0.0;  // m, must equal the node distance
};

struct RoadGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  int index_of(const std::string& id) const;  // -1 when absent
  std::vector<std::vector<std::pair<int, double>>> adjacency() const;
  void validate() const;

  static RoadGraph from_network(const relmap::RoadNetwork& net);
  static RoadGraph from_json_text(const std::string& text);
  static RoadGraph from_json_file(const std::string& path);
  std::string to_json_text() const;
};

struct PlannerConfig {
  double t_hpl = 20.0;   // m; nodes at or above are unacceptable
  double t_safe = 0.95;  // required ratio of safe nodes, in (0, 1]
  double d_safe = 150.0; // m; max tolerated continuous unacceptable stretch
  double epoch = 0.0;    // s; map slice the plan reads
  // Finite stand-in multiplier for UNAVAILABLE nodes in the cost sum.
  double unavailable_penalty_factor = 10.0;
  // Re-keys search states by (node, outage distance) for completeness.
  bool strict_mode = false;

  void validate() const;
};

struct PathResult {
  std::vector<std::string> path;  // node ids, start to target
  double cost = 0.0;              // sum of edge length x destination HPL, m^2
  double travel_distance = 0.0;   // m
  double avg_hpl = 0.0;           // m, over nodes with an available HPL
  double safe_ratio = 0.0;        // percent of nodes below t_hpl
  double max_continuous_unacceptable = 0.0;  // m
  bool feasible = false;
};

// HPL used in the cost sum: the cell value, or the unavailable penalty.
double node_cost_hpl(const HplMap& map, const std::string& node_id, const PlannerConfig& cfg);
bool node_safe(const HplMap& map, const std::string& node_id, const PlannerConfig& cfg);

double path_cost(const RoadGraph& graph, const std::vector<std::string>& path,
                 const HplMap& map, const PlannerConfig& cfg);

struct Feasibility {
  double safe_ratio = 0.0;  // percent
  double max_continuous_unacceptable = 0.0;
  bool feasible = false;
};

Feasibility path_feasibility(const RoadGraph& graph, const std::vector<std::string>& path,
                             const HplMap& map, const PlannerConfig& cfg);

PathResult summarize_path(const RoadGraph& graph, const std::vector<std::string>& path,
                          const HplMap& map, const PlannerConfig& cfg);

// Best-first search minimizing the HPL-weighted length under the safe-ratio
// and outage-distance constraints, with straight-line distance as the
// heuristic.  Empty result = no acceptable path found.
std::optional<PathResult> astar_plan(const RoadGraph& graph, const HplMap& map,
                                     const std::string& start, const std::string& target,
                                     const PlannerConfig& cfg);

// Exhaustive simple-path enumeration for small graphs; reference optimum.
std::optional<PathResult> exhaustive_oracle(const RoadGraph& graph, const HplMap& map,
                                            const std::string& start, const std::string& target,
                                            const PlannerConfig& cfg,
                                            std::size_t max_expansions = 2'000'000);

std::string report(const std::vector<PathResult>& results);

}  // namespace relnav::planner
