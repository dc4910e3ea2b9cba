#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relnav/error.hpp"
#include "relnav/planner.hpp"
#include "relnav/relmap.hpp"
#include "relnav/scenario.hpp"

namespace {

using namespace relnav;

constexpr int kOk = 0;
constexpr int kInvalidInput = 1;
constexpr int kNoFeasiblePath = 2;
constexpr int kNumericalFailure = 3;

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::optional<double> epoch;
};

scenario::Scenario load_or_exit(const std::string& path) {
  if (path.empty()) throw Error("missing --scenario");
  return scenario::load_scenario(path);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory: " + dir);
}

std::vector<orbits::SatelliteState> propagate_all(const scenario::Scenario& s, double epoch) {
  std::vector<orbits::SatelliteState> sats;
  for (const auto& rec : s.almanac) sats.push_back(orbits::propagate(rec, epoch));
  return sats;
}

const relmap::MapNode& pick_sim_node(const relmap::RoadNetwork& net, const std::string& id) {
  if (id.empty()) return net.nodes.front();
  for (const auto& n : net.nodes) {
    if (n.node_id == id) return n;
  }
  throw Error("simulation node not found in network: " + id);
}

int cmd_validate(const CommonArgs& args) {
  const scenario::Scenario s = load_or_exit(args.scenario_path);
  const relmap::RoadNetwork net = relmap::build_network(s.scene, s.map);
  std::printf("scenario OK: scene '%s', %zu satellites, %zu epochs, %zu nodes, %zu edges\n",
              s.scene.id().c_str(), s.almanac.size(), s.epochs.size(), net.nodes.size(),
              net.edges.size());
  std::printf("config hash %s\n", s.config_hash.c_str());
  return kOk;
}

int cmd_predict_map(const CommonArgs& args) {
  const scenario::Scenario s = load_or_exit(args.scenario_path);
  ensure_out_dir(args.out_dir);
  const relmap::RoadNetwork net = relmap::build_network(s.scene, s.map);

  const relmap::HplMap map = relmap::generate_map(s.scene, net.nodes, s.almanac, s.epochs, s.map);
  const std::string map_path = args.out_dir + "/map.csv";
  map.save(map_path);

  const planner::RoadGraph graph = planner::RoadGraph::from_network(net);
  std::ofstream gf(args.out_dir + "/graph.json");
  if (!gf) throw Error("cannot write graph file");
  gf << graph.to_json_text() << "\n";

  int unavailable = 0;
  for (const auto& c : map.cells) {
    if (!c.value) ++unavailable;
  }
  std::printf("map written: %s (%zu cells, %d unavailable)\n", map_path.c_str(),
              map.cells.size(), unavailable);
  return kOk;
}

int cmd_plan(const CommonArgs& args, std::string map_path, std::string graph_path,
             std::string start, std::string target) {
  const scenario::Scenario s = load_or_exit(args.scenario_path);
  ensure_out_dir(args.out_dir);
  if (map_path.empty()) map_path = args.out_dir + "/map.csv";
  if (graph_path.empty()) graph_path = args.out_dir + "/graph.json";
  const relmap::HplMap map = relmap::HplMap::load(map_path);
  const planner::RoadGraph graph = planner::RoadGraph::from_json_file(graph_path);

  planner::PlannerConfig cfg = s.plan;
  if (args.epoch) cfg.epoch = *args.epoch;
  if (start.empty()) start = s.plan_start;
  if (target.empty()) target = s.plan_target;
  if (start.empty() || target.empty()) throw Error("plan needs --start and --target");

  const auto result = planner::astar_plan(graph, map, start, target, cfg);
  if (!result) {
    std::fprintf(stderr, "no feasible path\n");
    return kNoFeasiblePath;
  }

  nlohmann::json j;
  j["path"] = result->path;
  j["cost_m2"] = result->cost;
  j["travel_distance_m"] = result->travel_distance;
  j["avg_hpl_m"] = result->avg_hpl;
  j["safe_ratio_pct"] = result->safe_ratio;
  j["max_continuous_unacceptable_m"] = result->max_continuous_unacceptable;
  j["feasible"] = result->feasible;
  std::ofstream pf(args.out_dir + "/plan.json");
  if (!pf) throw Error("cannot write plan file");
  pf << j.dump(2) << "\n";

  const std::string table = planner::report({*result});
  std::ofstream rf(args.out_dir + "/plan_report.csv");
  if (!rf) throw Error("cannot write report file");
  rf << table;
  std::fputs(table.c_str(), stdout);
  return kOk;
}

int cmd_araim(const CommonArgs& args) {
  scenario::Scenario s = load_or_exit(args.scenario_path);
  ensure_out_dir(args.out_dir);
  const std::uint64_t seed = args.seed_set ? args.seed : s.sim_seed;

  const relmap::RoadNetwork net = relmap::build_network(s.scene, s.map);
  const relmap::MapNode& node = pick_sim_node(net, s.sim_node);

  std::ofstream log(args.out_dir + "/araim_log.csv");
  std::ofstream series(args.out_dir + "/hpl_series.csv");
  if (!log || !series) throw Error("cannot write log files");
  log << "epoch_s, n_used, excluded, hpl_m\n";
  series << "epoch_s, predicted_hpl_m, measured_hpl_m\n";

  char buf[256];
  for (size_t e = 0; e < s.epochs.size(); ++e) {
    const double epoch = s.epochs[e];
    const auto sats = propagate_all(s, epoch);

    const relmap::HplCell predicted = relmap::predict_cell(s.scene, node, sats, epoch, s.map);
    const relmap::MeasuredCell measured = relmap::simulate_measured_cell(
        s.scene, node, s.sim_lateral_offset, sats, epoch, s.map, seed + e);

    std::string excluded;
    for (const auto& id : measured.excluded) {
      if (!excluded.empty()) excluded += "|";
      excluded += id.value;
    }
    if (excluded.empty()) excluded = "-";
    if (measured.value) {
      std::snprintf(buf, sizeof(buf), "%.3f, %d, %s, %.6f\n", epoch, measured.n_used,
                    excluded.c_str(), *measured.value);
    } else {
      std::snprintf(buf, sizeof(buf), "%.3f, %d, %s, UNAVAILABLE\n", epoch, measured.n_used,
                    excluded.c_str());
    }
    log << buf;

    const std::string pred_text =
        predicted.value ? std::to_string(*predicted.value) : "UNAVAILABLE";
    const std::string meas_text =
        measured.value ? std::to_string(*measured.value) : "UNAVAILABLE";
    std::snprintf(buf, sizeof(buf), "%.3f, %s, %s\n", epoch, pred_text.c_str(),
                  meas_text.c_str());
    series << buf;
  }
  std::printf("araim log written to %s\n", (args.out_dir + "/araim_log.csv").c_str());
  return kOk;
}

int cmd_plot_data(const CommonArgs& args, const std::string& input) {
  ensure_out_dir(args.out_dir);
  std::ifstream f(input);
  if (!f) throw Error("cannot open input: " + input);
  std::string header;
  std::getline(f, header);
  std::string squashed;
  for (char ch : header) {
    if (ch != ' ' && ch != '\t' && ch != '\r') squashed.push_back(ch);
  }

  if (squashed == "node_id,x_m,y_m,epoch_s,hpl_m|UNAVAILABLE,n_visible") {
    const relmap::HplMap map = relmap::HplMap::load(input);
    std::vector<const relmap::HplCell*> cells;
    for (const auto& c : map.cells) cells.push_back(&c);
    std::sort(cells.begin(), cells.end(),
              [](const relmap::HplCell* a, const relmap::HplCell* b) {
                if (a->node_id.size() != b->node_id.size()) {
                  return a->node_id.size() < b->node_id.size();
                }
                if (a->node_id != b->node_id) return a->node_id < b->node_id;
                return a->epoch < b->epoch;
              });
    std::ofstream out(args.out_dir + "/map_series.csv");
    if (!out) throw Error("cannot write series file");
    out << "node_id, x_m, y_m, epoch_s, hpl_m\n";
    char buf[256];
    for (const auto* c : cells) {
      if (c->value) {
        std::snprintf(buf, sizeof(buf), "%s, %.3f, %.3f, %.3f, %.6f\n", c->node_id.c_str(),
                      c->x, c->y, c->epoch, *c->value);
      } else {
        std::snprintf(buf, sizeof(buf), "%s, %.3f, %.3f, %.3f, UNAVAILABLE\n",
                      c->node_id.c_str(), c->x, c->y, c->epoch);
      }
      out << buf;
    }
    std::printf("map series written (%zu rows)\n", cells.size());
    return kOk;
  }

  if (squashed == "epoch_s,n_used,excluded,hpl_m") {
    std::ofstream out(args.out_dir + "/log_series.csv");
    if (!out) throw Error("cannot write series file");
    out << "epoch_s, hpl_m\n";
    std::string line;
    size_t rows = 0;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      if (fields.size() != 4) throw Error("malformed log line: " + line);
      out << fields[0] << "," << fields[3] << "\n";
      ++rows;
    }
    std::printf("log series written (%zu rows)\n", rows);
    return kOk;
  }
  throw Error("unrecognized input kind (header: " + header + ")");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conservative HPL mapping and safety-constrained route planning"};
  app.require_subcommand(0, 1);

  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults,
               "print the built-in scenario configuration and exit");

  CommonArgs args;
  std::string map_path, graph_path, start, target, plot_input;
  double epoch_value = 0.0;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    auto* opt = cmd->add_option("--scenario", args.scenario_path, "scenario JSON path");
    if (needs_scenario) opt->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "simulation seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--epoch", epoch_value, "epoch override, s")
        ->each([&](const std::string&) { args.epoch = epoch_value; });
  };

  CLI::App* validate = app.add_subcommand("validate", "check a scenario end to end");
  add_common(validate, true);

  CLI::App* predict = app.add_subcommand("predict-map", "generate the HPL map and road graph");
  add_common(predict, true);

  CLI::App* plan = app.add_subcommand("plan", "plan a route over a generated map");
  add_common(plan, true);
  plan->add_option("--map", map_path, "map CSV (default <out>/map.csv)");
  plan->add_option("--graph", graph_path, "graph JSON (default <out>/graph.json)");
  plan->add_option("--start", start, "start node id");
  plan->add_option("--target", target, "target node id");

  CLI::App* araim = app.add_subcommand("araim", "simulate measurements and log HPL/FDE");
  add_common(araim, true);

  CLI::App* plot = app.add_subcommand("plot-data", "emit plottable series from a map or log");
  add_common(plot, false);
  plot->add_option("--in", plot_input, "map CSV or araim log")->required();

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::fputs(relnav::scenario::default_scenario_text().c_str(), stdout);
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    std::fputs(app.help().c_str(), stdout);
    return kOk;
  }

  // Input-phase problems (missing/invalid files, bad config) exit 1; failures
  // inside the numerical pipeline exit 3.
  try {
    if (validate->parsed()) return cmd_validate(args);
    if (predict->parsed()) return cmd_predict_map(args);
    if (plan->parsed()) return cmd_plan(args, map_path, graph_path, start, target);
    if (araim->parsed()) return cmd_araim(args);
    if (plot->parsed()) return cmd_plot_data(args, plot_input);
  } catch (const relnav::Error& e) {
    const std::string what = e.what();
    const bool input_problem = what.find("cannot open") != std::string::npos ||
                               what.find("missing --scenario") != std::string::npos ||
                               what.find("parse failure") != std::string::npos ||
                               what.find("structure") != std::string::npos ||
                               what.find("must") != std::string::npos ||
                               what.find("not found") != std::string::npos ||
                               what.find("unrecognized") != std::string::npos ||
                               what.find("header") != std::string::npos ||
                               what.find("needs --start") != std::string::npos;
    std::fprintf(stderr, "error: %s\n", what.c_str());
    return input_problem ? kInvalidInput : kNumericalFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kNumericalFailure;
  }
  return kOk;
}
