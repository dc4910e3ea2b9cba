#include "relnav/relmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "relnav/error.hpp"
#include "relnav/orbit.hpp"

namespace relnav::relmap {

namespace {

constexpr double kMergeTol = 1e-3;  // m; closer samples collapse into one node

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> node_offsets(const scene::RoadSegment& road, bool include_edges) {
  std::vector<double> offsets;
  const double half = road.width() / 2.0;
  for (int lane = 0; lane < road.lane_count; ++lane) {
    offsets.push_back(-half + road.lane_width * (lane + 0.5));
  }
  if (include_edges) {
    offsets.push_back(-half);
    offsets.push_back(half);
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                offsets.end());
  return offsets;
}

}  // namespace

int severity(ReceptionCondition c) {
  switch (c) {
    case ReceptionCondition::kLosOnly: return 0;
    case ReceptionCondition::kLosNlos: return 1;
    case ReceptionCondition::kNlosOnly: return 2;
    case ReceptionCondition::kNoSignal: return 3;
  }
  return 3;
}

RoadNetwork build_network(const Scene& scene, const MapConfig& cfg) {
  if (!(cfg.node_spacing > 0.0)) throw Error("node_spacing must be positive");
  RoadNetwork net;
  std::set<std::pair<int, int>> edge_set;

  auto merge_or_add = [&](const Vec2& p, const Vec2& lateral,
                          const std::vector<double>& offsets) -> int {
    for (size_t i = 0; i < net.nodes.size(); ++i) {
      if ((Vec2{net.nodes[i].position.x(), net.nodes[i].position.y()} - p).norm() < kMergeTol) {
        return static_cast<int>(i);
      }
    }
    MapNode node;
    node.node_id = "n" + std::to_string(net.nodes.size());
    node.position = {p.x(), p.y(), 0.0};
    node.lateral_dir = lateral;
    node.lateral_offsets = offsets;
    net.nodes.push_back(std::move(node));
    return static_cast<int>(net.nodes.size()) - 1;
  };

  for (const scene::RoadSegment& road : scene.roads()) {
    const std::vector<double> offsets = node_offsets(road, cfg.include_road_edges);

    // Arclength resampling of the centerline polyline.
    std::vector<double> seg_len;
    double total = 0.0;
    for (size_t i = 0; i + 1 < road.centerline.size(); ++i) {
      seg_len.push_back((road.centerline[i + 1] - road.centerline[i]).norm());
      total += seg_len.back();
    }

    std::vector<double> stations;
    for (double s = 0.0; s < total; s += cfg.node_spacing) stations.push_back(s);
    stations.push_back(total);

    int prev = -1;
    for (double s : stations) {
      size_t seg = 0;
      double acc = 0.0;
      while (seg + 1 < seg_len.size() && acc + seg_len[seg] < s) acc += seg_len[seg++];
      const Vec2& a = road.centerline[seg];
      const Vec2& b = road.centerline[seg + 1];
      const Vec2 tangent = (b - a).normalized();
      const double along = std::min(s - acc, seg_len[seg]);
      const Vec2 p = a + along * tangent;
      const Vec2 lateral{-tangent.y(), tangent.x()};

      const int idx = merge_or_add(p, lateral, offsets);
      if (prev >= 0 && prev != idx) {
        edge_set.insert({std::min(prev, idx), std::max(prev, idx)});
      }
      prev = idx;
    }
  }
  net.edges.assign(edge_set.begin(), edge_set.end());
  return net;
}

ConservativeView conservative_visibility(const Scene& scene, const MapNode& node,
                                         const SatelliteState& sat, const MapConfig& cfg) {
  if (node.lateral_offsets.empty()) throw Error("node has no lateral offsets");

  ConservativeView view;
  int worst = -1;
  double max_bias = -std::numeric_limits<double>::infinity();
  double min_elevation = std::numeric_limits<double>::infinity();
  bool any_bias = false;

  for (double offset : node.lateral_offsets) {
    scene::ReceiverPose pose;
    pose.position = node.position + Vec3{node.lateral_dir.x() * offset,
                                         node.lateral_dir.y() * offset, 0.0};
    pose.antenna_height = cfg.antenna_height;
    const scene::Classification cls = scene::classify(scene, pose, sat, cfg.mask, cfg.query);

    worst = std::max(worst, severity(cls.condition));
    min_elevation = std::min(min_elevation, cls.elevation);
    if (cls.condition == ReceptionCondition::kNoSignal) continue;

    double bias = 0.0;
    if (cls.condition == ReceptionCondition::kNlosOnly) {
      bias = signal::nlos_bias(cls.paths);
    } else if (cls.condition == ReceptionCondition::kLosNlos) {
      bias = signal::los_nlos_bias(cls.paths, cfg.chip);
    }
    max_bias = std::max(max_bias, bias);
    any_bias = true;
  }

  view.condition = worst == 0   ? ReceptionCondition::kLosOnly
                   : worst == 1 ? ReceptionCondition::kLosNlos
                   : worst == 2 ? ReceptionCondition::kNlosOnly
                                : ReceptionCondition::kNoSignal;
  view.bias = any_bias ? max_bias : 0.0;
  view.elevation = min_elevation;
  return view;
}

HplCell predict_cell(const Scene& scene, const MapNode& node,
                     const std::vector<SatelliteState>& sats, double epoch,
                     const MapConfig& cfg) {
  HplCell cell;
  cell.node_id = node.node_id;
  cell.x = node.position.x();
  cell.y = node.position.y();
  cell.epoch = epoch;

  std::vector<const SatelliteState*> visible;
  std::vector<ConservativeView> views;
  for (const SatelliteState& sat : sats) {
    const ConservativeView v = conservative_visibility(scene, node, sat, cfg);
    cell.conditions.emplace_back(sat.sat_id, v.condition);
    if (v.condition != ReceptionCondition::kNoSignal) {
      visible.push_back(&sat);
      views.push_back(v);
    }
  }
  cell.n_visible = static_cast<int>(visible.size());

  std::set<char> const_letters;
  for (const auto* sat : visible) const_letters.insert(sat->sat_id.constellation());
  const int c = static_cast<int>(const_letters.size());
  // Detect-and-exclude capability needs the solved states plus two spares.
  if (cell.n_visible < 3 + c + 2) return cell;

  const Vec3 antenna_local = node.position + Vec3{0.0, 0.0, cfg.antenna_height};
  const Vec3 antenna_ecef = scene.to_ecef(antenna_local);
  std::vector<char> letters(const_letters.begin(), const_letters.end());

  std::vector<Vec3> positions;
  std::vector<int> constellation;
  araim::VectorXd sigmas(cell.n_visible), rho(cell.n_visible);
  for (int i = 0; i < cell.n_visible; ++i) {
    positions.push_back(scene.to_local(visible[i]->position_ecef));
    constellation.push_back(static_cast<int>(
        std::find(letters.begin(), letters.end(), visible[i]->sat_id.constellation()) -
        letters.begin()));
    sigmas(i) = signal::sigma_model(views[i].elevation, cfg.error_model);
    const double range = (visible[i]->position_ecef - antenna_ecef).norm();
    rho(i) = range + cfg.error_model.iono_delay + cfg.error_model.tropo_delay + views[i].bias;
  }

  try {
    const araim::FdeResult res =
        araim::fde(positions, constellation, sigmas, rho, cfg.integrity);
    if (!res.outcome.passed) return cell;

    araim::ExclusionContext excl;
    const araim::ExclusionContext* exclp = nullptr;
    if (!res.outcome.excluded.empty()) {
      excl.threshold_q[0] = res.exclusion_threshold_q[0];
      excl.threshold_q[1] = res.exclusion_threshold_q[1];
      excl.p_excluded = res.p_excluded;
      exclp = &excl;
    }
    const araim::HplResult hpl =
        araim::compute_hpl(res.solutions, res.modes, cfg.integrity, res.k_fa, exclp);
    if (hpl.available) cell.value = hpl.hpl;
  } catch (const Error&) {
    // Degenerate geometry or non-convergence: the cell stays UNAVAILABLE.
  }
  return cell;
}

HplCell predict_cell_at_offset(const Scene& scene, const MapNode& node, double offset,
                               const std::vector<SatelliteState>& sats, double epoch,
                               const MapConfig& cfg) {
  MapNode pinned = node;
  pinned.lateral_offsets = {offset};
  return predict_cell(scene, pinned, sats, epoch, cfg);
}

MeasuredCell simulate_measured_cell(const Scene& scene, const MapNode& node, double offset,
                                    const std::vector<SatelliteState>& sats, double epoch,
                                    const MapConfig& cfg, std::uint64_t seed) {
  MeasuredCell cell;
  cell.epoch = epoch;

  scene::ReceiverPose pose;
  pose.position = node.position + Vec3{node.lateral_dir.x() * offset,
                                       node.lateral_dir.y() * offset, 0.0};
  pose.antenna_height = cfg.antenna_height;
  const Vec3 antenna_ecef = scene.to_ecef(pose.antenna());

  std::vector<const SatelliteState*> visible;
  std::vector<signal::PseudorangePrediction> predictions;
  for (const SatelliteState& sat : sats) {
    const scene::Classification cls = scene::classify(scene, pose, sat, cfg.mask, cfg.query);
    if (cls.condition == ReceptionCondition::kNoSignal) continue;
    visible.push_back(&sat);
    predictions.push_back(signal::predict_pseudorange(sat, antenna_ecef, cls.condition,
                                                      cls.paths, cls.elevation, cfg.chip,
                                                      cfg.error_model));
  }
  const int n = static_cast<int>(visible.size());

  std::set<char> const_letters;
  for (const auto* sat : visible) const_letters.insert(sat->sat_id.constellation());
  const int c = static_cast<int>(const_letters.size());
  if (n < 3 + c + 2) return cell;

  const std::vector<signal::MeasurementSample> samples =
      signal::simulate_measurements(predictions, cfg.error_model, seed, epoch);

  std::vector<char> letters(const_letters.begin(), const_letters.end());
  std::vector<Vec3> positions;
  std::vector<int> constellation;
  araim::VectorXd sigmas(n), rho(n);
  for (int i = 0; i < n; ++i) {
    positions.push_back(scene.to_local(visible[i]->position_ecef));
    constellation.push_back(static_cast<int>(
        std::find(letters.begin(), letters.end(), visible[i]->sat_id.constellation()) -
        letters.begin()));
    sigmas(i) = predictions[i].sigma;
    rho(i) = samples[i].pseudorange;
  }

  try {
    const araim::FdeResult res =
        araim::fde(positions, constellation, sigmas, rho, cfg.integrity);
    if (!res.outcome.passed) return cell;
    for (int idx : res.outcome.excluded) cell.excluded.push_back(visible[idx]->sat_id);
    cell.n_used = n - static_cast<int>(res.outcome.excluded.size());

    araim::ExclusionContext excl;
    const araim::ExclusionContext* exclp = nullptr;
    if (!res.outcome.excluded.empty()) {
      excl.threshold_q[0] = res.exclusion_threshold_q[0];
      excl.threshold_q[1] = res.exclusion_threshold_q[1];
      excl.p_excluded = res.p_excluded;
      exclp = &excl;
    }
    const araim::HplResult hpl =
        araim::compute_hpl(res.solutions, res.modes, cfg.integrity, res.k_fa, exclp);
    if (hpl.available) cell.value = hpl.hpl;
  } catch (const Error&) {
    // Leaves the cell unavailable.
  }
  return cell;
}

HplMap generate_map(const Scene& scene, const std::vector<MapNode>& nodes,
                    const std::vector<AlmanacRecord>& almanac, const std::vector<double>& epochs,
                    const MapConfig& cfg) {
  if (epochs.empty()) throw Error("epoch list is empty");
  for (size_t i = 0; i + 1 < epochs.size(); ++i) {
    if (!(epochs[i] < epochs[i + 1])) throw Error("epochs must be strictly increasing");
  }
  if (nodes.empty()) throw Error("node list is empty");

  std::vector<std::vector<SatelliteState>> sats_by_epoch;
  for (double t : epochs) {
    std::vector<SatelliteState> sats;
    for (const AlmanacRecord& rec : almanac) sats.push_back(orbits::propagate(rec, t));
    sats_by_epoch.push_back(std::move(sats));
  }

  HplMap map;
  map.epochs = epochs;
  map.mask = cfg.mask;
  map.scene_id = scene.id();
  map.almanac_id = cfg.almanac_id;
  map.config_hash = cfg.config_hash;
  map.cells.resize(nodes.size() * epochs.size());

  const size_t total = map.cells.size();
  unsigned n_threads = cfg.n_threads > 0 ? static_cast<unsigned>(cfg.n_threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(total));

  auto worker = [&](unsigned tid) {
    for (size_t idx = tid; idx < total; idx += n_threads) {
      const size_t e = idx / nodes.size();
      const size_t n = idx % nodes.size();
      map.cells[idx] =
          predict_cell(scene, nodes[n], sats_by_epoch[e], epochs[e], cfg);
    }
  };
  if (n_threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  return map;
}

void HplMap::build_index() const {
  if (!index_.empty() || cells.empty()) return;
  for (size_t i = 0; i < cells.size(); ++i) {
    char key[352];
    std::snprintf(key, sizeof(key), "%s@%.9f", cells[i].node_id.c_str(), cells[i].epoch);
    index_.emplace(key, i);
  }
}

const HplCell* HplMap::find(const std::string& node_id, double epoch) const {
  build_index();
  // Snap the query to the nearest stored epoch within a microsecond.
  double snapped = epoch;
  double best = 1e-6;
  for (double e : epochs) {
    if (std::abs(e - epoch) <= best) {
      best = std::abs(e - epoch);
      snapped = e;
    }
  }
  char key[352];
  std::snprintf(key, sizeof(key), "%s@%.9f", node_id.c_str(), snapped);
  const auto it = index_.find(key);
  return it == index_.end() ? nullptr : &cells[it->second];
}

void HplMap::save(const std::string& csv_path) const {
  std::ofstream f(csv_path);
  if (!f) throw Error("cannot write map file: " + csv_path);
  f << "node_id, x_m, y_m, epoch_s, hpl_m|UNAVAILABLE, n_visible\n";
  char line[512];
  for (const HplCell& c : cells) {
    if (c.value) {
      std::snprintf(line, sizeof(line), "%s, %.17g, %.17g, %.17g, %.17g, %d\n",
                    c.node_id.c_str(), c.x, c.y, c.epoch, *c.value, c.n_visible);
    } else {
      std::snprintf(line, sizeof(line), "%s, %.17g, %.17g, %.17g, UNAVAILABLE, %d\n",
                    c.node_id.c_str(), c.x, c.y, c.epoch, c.n_visible);
    }
    f << line;
  }

  nlohmann::json meta;
  meta["scene_id"] = scene_id;
  meta["almanac_id"] = almanac_id;
  meta["mask_deg"] = rad2deg(mask);
  meta["config_hash"] = config_hash;
  std::ofstream mf(csv_path + ".meta.json");
  if (!mf) throw Error("cannot write map metadata: " + csv_path + ".meta.json");
  mf << meta.dump(2) << "\n";
}

HplMap HplMap::load(const std::string& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw Error("cannot open map file: " + csv_path);

  HplMap map;
  std::string line;
  if (!std::getline(f, line)) throw Error("empty map file: " + csv_path);
  std::string header;
  for (char ch : line) {
    if (ch != ' ' && ch != '\t' && ch != '\r') header.push_back(ch);
  }
  if (header != "node_id,x_m,y_m,epoch_s,hpl_m|UNAVAILABLE,n_visible") {
    throw Error("unexpected map header: " + line);
  }

  std::set<double> epoch_set;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 6) {
      throw Error("map line " + std::to_string(lineno) + ": expected 6 fields");
    }
    HplCell c;
    c.node_id = fields[0];
    try {
      c.x = std::stod(fields[1]);
      c.y = std::stod(fields[2]);
      c.epoch = std::stod(fields[3]);
      if (fields[4] != "UNAVAILABLE") c.value = std::stod(fields[4]);
      c.n_visible = std::stoi(fields[5]);
    } catch (const std::exception&) {
      throw Error("map line " + std::to_string(lineno) + ": malformed number");
    }
    if (c.value && !(*c.value > 0.0 && std::isfinite(*c.value))) {
      throw Error("map line " + std::to_string(lineno) + ": non-positive value");
    }
    epoch_set.insert(c.epoch);
    map.cells.push_back(std::move(c));
  }
  map.epochs.assign(epoch_set.begin(), epoch_set.end());

  std::ifstream mf(csv_path + ".meta.json");
  if (mf) {
    try {
      nlohmann::json meta = nlohmann::json::parse(mf);
      map.scene_id = meta.value("scene_id", "");
      map.almanac_id = meta.value("almanac_id", "");
      map.mask = deg2rad(meta.value("mask_deg", 0.0));
      map.config_hash = meta.value("config_hash", "");
    } catch (const std::exception& e) {
      throw Error(std::string("map metadata parse failure: ") + e.what());
    }
  }
  return map;
}

}  // namespace relnav::relmap
