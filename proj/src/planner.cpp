#include "relnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "relnav/error.hpp"

namespace relnav::planner {

namespace {

constexpr double kEdgeLengthTol = 1e-6;  // m
constexpr double kRatioTol = 1e-12;      // slack so a 100% safe path passes t_safe = 1

double dist(const GraphNode& a, const GraphNode& b) { return (a.position - b.position).norm(); }

}  // namespace

int RoadGraph::index_of(const std::string& id) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::vector<std::pair<int, double>>> RoadGraph::adjacency() const {
  std::vector<std::vector<std::pair<int, double>>> adj(nodes.size());
  for (const GraphEdge& e : edges) {
    adj[e.a].emplace_back(e.b, e.length);
    adj[e.b].emplace_back(e.a, e.length);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

void RoadGraph::validate() const {
  std::unordered_map<std::string, int> seen;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id.empty()) throw Error("graph node with empty id");
    if (!seen.emplace(nodes[i].id, static_cast<int>(i)).second) {
      throw Error("duplicate graph node id: " + nodes[i].id);
    }
  }
  for (const GraphEdge& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= static_cast<int>(nodes.size()) ||
        e.b >= static_cast<int>(nodes.size()) || e.a == e.b) {
      throw Error("graph edge endpoints invalid");
    }
    if (!(e.length > 0.0)) throw Error("graph edge length must be positive");
    if (std::abs(e.length - dist(nodes[e.a], nodes[e.b])) > kEdgeLengthTol) {
      throw Error("edge length disagrees with node positions: " + nodes[e.a].id + "-" +
                  nodes[e.b].id);
    }
  }
}

RoadGraph RoadGraph::from_network(const relmap::RoadNetwork& net) {
  RoadGraph g;
  for (const relmap::MapNode& n : net.nodes) {
    g.nodes.push_back({n.node_id, {n.position.x(), n.position.y()}});
  }
  for (const auto& [a, b] : net.edges) {
    g.edges.push_back({a, b, dist(g.nodes[a], g.nodes[b])});
  }
  g.validate();
  return g;
}

RoadGraph RoadGraph::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("graph JSON parse failure: ") + e.what());
  }
  RoadGraph g;
  try {
    for (const auto& jn : j.at("nodes")) {
      g.nodes.push_back({jn.at("id").get<std::string>(),
                         {jn.at("x_m").get<double>(), jn.at("y_m").get<double>()}});
    }
    for (const auto& je : j.at("edges")) {
      const int a = g.index_of(je.at("a").get<std::string>());
      const int b = g.index_of(je.at("b").get<std::string>());
      if (a < 0 || b < 0) throw Error("graph edge references unknown node");
      double len = je.contains("length_m") ? je.at("length_m").get<double>()
                                           : dist(g.nodes[a], g.nodes[b]);
      g.edges.push_back({a, b, len});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("graph JSON structure: ") + e.what());
  }
  g.validate();
  return g;
}

RoadGraph RoadGraph::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open graph file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str());
}

std::string RoadGraph::to_json_text() const {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const GraphNode& n : nodes) {
    j["nodes"].push_back({{"id", n.id}, {"x_m", n.position.x()}, {"y_m", n.position.y()}});
  }
  j["edges"] = nlohmann::json::array();
  for (const GraphEdge& e : edges) {
    j["edges"].push_back(
        {{"a", nodes[e.a].id}, {"b", nodes[e.b].id}, {"length_m", e.length}});
  }
  return j.dump(2);
}

void PlannerConfig::validate() const {
  if (!(t_hpl > 0.0)) throw Error("t_hpl must be positive");
  if (!(t_safe > 0.0 && t_safe <= 1.0)) throw Error("t_safe must lie in (0, 1]");
  if (!(d_safe > 0.0)) throw Error("d_safe must be positive");
  if (!(unavailable_penalty_factor > 0.0)) throw Error("penalty factor must be positive");
}

double node_cost_hpl(const HplMap& map, const std::string& node_id, const PlannerConfig& cfg) {
  const relmap::HplCell* cell = map.find(node_id, cfg.epoch);
  if (cell != nullptr && cell->value) return *cell->value;
  return cfg.unavailable_penalty_factor * cfg.t_hpl;
}

bool node_safe(const HplMap& map, const std::string& node_id, const PlannerConfig& cfg) {
  const relmap::HplCell* cell = map.find(node_id, cfg.epoch);
  return cell != nullptr && cell->value && *cell->value < cfg.t_hpl;
}

namespace {

// Edge length between two path nodes, or throws.
double edge_length(const std::vector<std::vector<std::pair<int, double>>>& adj, int a, int b,
                   const RoadGraph& graph) {
  for (const auto& [n, len] : adj[a]) {
    if (n == b) return len;
  }
  throw Error("path nodes not adjacent: " + graph.nodes[a].id + ", " + graph.nodes[b].id);
}

std::vector<int> to_indices(const RoadGraph& graph, const std::vector<std::string>& path) {
  std::vector<int> idx;
  for (const std::string& id : path) {
    const int i = graph.index_of(id);
    if (i < 0) throw Error("path references unknown node: " + id);
    idx.push_back(i);
  }
  return idx;
}

}  // namespace

double path_cost(const RoadGraph& graph, const std::vector<std::string>& path,
                 const HplMap& map, const PlannerConfig& cfg) {
  cfg.validate();
  if (path.empty()) throw Error("empty path");
  const auto idx = to_indices(graph, path);
  const auto adj = graph.adjacency();
  double cost = 0.0;
  for (size_t k = 1; k < idx.size(); ++k) {
    cost += edge_length(adj, idx[k - 1], idx[k], graph) *
            node_cost_hpl(map, path[k], cfg);
  }
  return cost;
}

Feasibility path_feasibility(const RoadGraph& graph, const std::vector<std::string>& path,
                             const HplMap& map, const PlannerConfig& cfg) {
  cfg.validate();
  if (path.empty()) throw Error("empty path");
  const auto idx = to_indices(graph, path);
  const auto adj = graph.adjacency();

  int safe = 0;
  double run = 0.0, max_run = 0.0;
  for (size_t k = 0; k < path.size(); ++k) {
    const bool ok = node_safe(map, path[k], cfg);
    if (ok) {
      ++safe;
      run = 0.0;
    } else if (k > 0) {
      // Outage distance accumulates the edge length entering each
      // unacceptable node; the first node contributes no travelled length.
      run += edge_length(adj, idx[k - 1], idx[k], graph);
    }
    max_run = std::max(max_run, run);
  }

  Feasibility out;
  out.safe_ratio = 100.0 * safe / static_cast<double>(path.size());
  out.max_continuous_unacceptable = max_run;
  out.feasible = (out.safe_ratio / 100.0 > cfg.t_safe - kRatioTol) && (max_run < cfg.d_safe);
  return out;
}

PathResult summarize_path(const RoadGraph& graph, const std::vector<std::string>& path,
                          const HplMap& map, const PlannerConfig& cfg) {
  PathResult r;
  r.path = path;
  r.cost = path_cost(graph, path, map, cfg);
  const auto idx = to_indices(graph, path);
  const auto adj = graph.adjacency();
  for (size_t k = 1; k < idx.size(); ++k) {
    r.travel_distance += edge_length(adj, idx[k - 1], idx[k], graph);
  }
  int available = 0;
  double sum_hpl = 0.0;
  for (const std::string& id : path) {
    const relmap::HplCell* cell = map.find(id, cfg.epoch);
    if (cell != nullptr && cell->value) {
      ++available;
      sum_hpl += *cell->value;
    }
  }
  r.avg_hpl = available > 0 ? sum_hpl / available : std::numeric_limits<double>::quiet_NaN();
  const Feasibility f = path_feasibility(graph, path, map, cfg);
  r.safe_ratio = f.safe_ratio;
  r.max_continuous_unacceptable = f.max_continuous_unacceptable;
  r.feasible = f.feasible;
  return r;
}

std::optional<PathResult> astar_plan(const RoadGraph& graph, const HplMap& map,
                                     const std::string& start, const std::string& target,
                                     const PlannerConfig& cfg) {
  cfg.validate();
  graph.validate();
  const int s = graph.index_of(start);
  const int t = graph.index_of(target);
  if (s < 0 || t < 0) throw Error("start or target not in graph");

  const auto adj = graph.adjacency();
  const int n = static_cast<int>(graph.nodes.size());
  const double inf = std::numeric_limits<double>::infinity();

  auto heuristic = [&](int node) { return dist(graph.nodes[node], graph.nodes[t]); };
  auto unacceptable = [&](int node) { return !node_safe(map, graph.nodes[node].id, cfg); };
  auto hpl_of = [&](int node) { return node_cost_hpl(map, graph.nodes[node].id, cfg); };

  // Heap entries: (f, g, node, state) with lazy deletion; the extra keys fix
  // the expansion order for determinism.
  using Entry = std::tuple<double, double, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;

  if (!cfg.strict_mode) {
    std::vector<double> g(n, inf), d_unacc(n, 0.0);
    std::vector<int> parent(n, -1);
    std::vector<char> closed(n, 0);

    g[s] = 0.0;
    d_unacc[s] = 0.0;
    open.push({heuristic(s), 0.0, s, s});

    while (!open.empty()) {
      const auto [f, ge, node, state] = open.top();
      open.pop();
      if (closed[node] || ge > g[node]) continue;
      // Outage-distance guard: drop the node without expanding it.
      if (d_unacc[node] >= cfg.d_safe) continue;
      if (node == t) {
        std::vector<std::string> path;
        for (int cur = t; cur != -1; cur = parent[cur]) {
          path.push_back(graph.nodes[cur].id);
        }
        std::reverse(path.begin(), path.end());
        const PathResult r = summarize_path(graph, path, map, cfg);
        if (r.feasible) return r;
        continue;  // ratio check failed; keep searching
      }
      closed[node] = 1;
      for (const auto& [m, len] : adj[node]) {
        if (closed[m]) continue;
        const double g_new = g[node] + len * hpl_of(m);
        if (g_new < g[m]) {
          g[m] = g_new;
          d_unacc[m] = unacceptable(m) ? d_unacc[node] + len : 0.0;
          parent[m] = node;
          open.push({g_new + heuristic(m), g_new, m, m});
        }
      }
    }
    return std::nullopt;
  }

  // Strict mode: states keyed by (node, quantized outage distance) so a
  // longer-but-cleaner approach to a node is not shadowed by a dirtier one.
  struct State {
    int node;
    long bucket;
    double g = std::numeric_limits<double>::infinity();
    double d_unacc = 0.0;
    int parent = -1;
    bool closed = false;
  };
  std::vector<State> states;
  std::unordered_map<long long, int> state_index;
  auto bucket_of = [](double d) { return static_cast<long>(d / 1e-3); };
  auto get_state = [&](int node, double d) {
    const long bucket = bucket_of(d);
    const long long key = static_cast<long long>(node) * 1000003LL + bucket;
    auto it = state_index.find(key);
    if (it != state_index.end()) return it->second;
    states.push_back({node, bucket});
    state_index.emplace(key, static_cast<int>(states.size()) - 1);
    return static_cast<int>(states.size()) - 1;
  };

  const int s0 = get_state(s, 0.0);
  states[s0].g = 0.0;
  open.push({heuristic(s), 0.0, s, s0});

  while (!open.empty()) {
    const auto [f, ge, node, sid] = open.top();
    open.pop();
    if (states[sid].closed || ge > states[sid].g) continue;
    if (states[sid].d_unacc >= cfg.d_safe) continue;
    if (node == t) {
      std::vector<std::string> path;
      for (int cur = sid; cur != -1; cur = states[cur].parent) {
        path.push_back(graph.nodes[states[cur].node].id);
      }
      std::reverse(path.begin(), path.end());
      const PathResult r = summarize_path(graph, path, map, cfg);
      if (r.feasible) return r;
      states[sid].closed = true;
      continue;
    }
    states[sid].closed = true;
    for (const auto& [m, len] : adj[node]) {
      const double g_new = states[sid].g + len * hpl_of(m);
      const double d_new = unacceptable(m) ? states[sid].d_unacc + len : 0.0;
      const int mid = get_state(m, d_new);
      if (states[mid].closed || g_new >= states[mid].g) continue;
      states[mid].g = g_new;
      states[mid].d_unacc = d_new;
      states[mid].parent = sid;
      open.push({g_new + heuristic(m), g_new, m, mid});
    }
  }
  return std::nullopt;
}

std::optional<PathResult> exhaustive_oracle(const RoadGraph& graph, const HplMap& map,
                                            const std::string& start, const std::string& target,
                                            const PlannerConfig& cfg,
                                            std::size_t max_expansions) {
  cfg.validate();
  graph.validate();
  const int s = graph.index_of(start);
  const int t = graph.index_of(target);
  if (s < 0 || t < 0) throw Error("start or target not in graph");

  const auto adj = graph.adjacency();
  std::vector<char> visited(graph.nodes.size(), 0);
  std::vector<int> current;
  std::size_t expansions = 0;
  std::optional<PathResult> best;

  std::function<void(int)> dfs = [&](int node) {
    if (++expansions > max_expansions) throw Error("path enumeration bound exceeded");
    visited[node] = 1;
    current.push_back(node);
    if (node == t) {
      std::vector<std::string> path;
      for (int i : current) path.push_back(graph.nodes[i].id);
      const PathResult r = summarize_path(graph, path, map, cfg);
      if (r.feasible && (!best || r.cost < best->cost - 1e-12 ||
                         (std::abs(r.cost - best->cost) <= 1e-12 && r.path < best->path))) {
        best = r;
      }
    } else {
      for (const auto& [m, len] : adj[node]) {
        if (!visited[m]) dfs(m);
      }
    }
    current.pop_back();
    visited[node] = 0;
  };
  dfs(s);
  return best;
}

std::string report(const std::vector<PathResult>& results) {
  std::ostringstream out;
  out << "path, travel_distance_m, avg_hpl_m, safe_node_ratio_pct, "
         "max_continuous_unacceptable_m, cost_m2\n";
  char line[256];
  for (size_t i = 0; i < results.size(); ++i) {
    const PathResult& r = results[i];
    std::snprintf(line, sizeof(line), "%zu, %.3f, %.3f, %.2f, %.3f, %.6g\n", i + 1,
                  r.travel_distance, r.avg_hpl, r.safe_ratio, r.max_continuous_unacceptable,
                  r.cost);
    out << line;
  }
  return out.str();
}

}  // namespace relnav::planner
