#include "relnav/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relnav/error.hpp"

namespace relnav::scenario {

namespace {

using nlohmann::json;

json default_config() {
  json j;
  j["scene"] = "scene.json";
  j["almanac"] = "almanac.alm";
  j["epochs"] = {{"start_s", 0.0}, {"step_s", 60.0}, {"count", 12}};
  j["elevation_mask_deg"] = 33.0;
  j["antenna_height_m"] = 1.7;
  j["map"] = {{"node_spacing_m", 10.0}, {"include_road_edges", true}, {"n_threads", 0}};
  j["signal"] = {{"chip_length_m", kCaChipLength},
                 {"correlator_spacing_chips", 1.0},
                 {"cutoff_chips", 1.5},
                 {"carrier_wavelength_m", kL1Wavelength},
                 {"plane_wave", true}};
  j["error_model"] = {{"sigma_zenith_m", 0.5},  {"elevation_exponent", 1.0},
                      {"sigma_floor_m", 0.25},  {"clock_bias_true_m", 0.0},
                      {"iono_delay_m", 0.0},    {"tropo_delay_m", 0.0}};
  j["integrity"] = {{"phmi_hor", 9.8e-8},
                    {"phmi_vert", 9.8e-8},
                    {"p_sat_fault", 1e-5},
                    {"p_const_fault", 1e-4},
                    {"p_sat_not_monitored", 4e-8},
                    {"p_const_not_monitored", 4e-8},
                    {"mode_probability_floor", 1e-8},
                    {"k_fa", 0.0},
                    {"continuity_budget", 1e-6},
                    {"nominal_bias_m", 0.75},
                    {"hpl_tolerance_m", 1e-6},
                    {"rss_combination", true}};
  j["planner"] = {{"t_hpl_m", 20.0},
                  {"t_safe", 0.95},
                  {"d_safe_m", 150.0},
                  {"epoch_s", nullptr},
                  {"unavailable_penalty_factor", 10.0},
                  {"strict_mode", false},
                  {"start", ""},
                  {"target", ""}};
  j["simulation"] = {{"node", ""}, {"lateral_offset_m", 0.0}, {"seed", 1}};
  return j;
}

// Overlay user keys onto the defaults so every effective value is explicit.
void merge(json& base, const json& overlay) {
  for (const auto& [key, value] : overlay.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

std::string join_path(const std::string& base_dir, const std::string& rel) {
  if (rel.empty() || rel.front() == '/') return rel;
  if (base_dir.empty()) return rel;
  return base_dir + "/" + rel;
}

std::string stem_of(const std::string& path) {
  std::string s = path;
  if (auto slash = s.find_last_of('/'); slash != std::string::npos) s = s.substr(slash + 1);
  if (auto dot = s.find_last_of('.'); dot != std::string::npos) s = s.substr(0, dot);
  return s;
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string default_scenario_text() { return default_config().dump(2) + "\n"; }

Scenario load_scenario_text(const std::string& text, const std::string& base_dir) {
  json user;
  try {
    user = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("scenario JSON parse failure: ") + e.what());
  }
  json cfg = default_config();
  merge(cfg, user);

  Scenario s;
  try {
    const std::string scene_path = join_path(base_dir, cfg.at("scene").get<std::string>());
    s.scene = scene::Scene::from_json_file(scene_path);

    const std::string alm_path = join_path(base_dir, cfg.at("almanac").get<std::string>());
    const auto parsed = orbits::parse_almanac_file(alm_path);
    if (!parsed.diagnostics.empty()) {
      std::string msg = "almanac diagnostics:";
      for (const auto& d : parsed.diagnostics) {
        msg += " [block " + std::to_string(d.block_index) + "] " + d.message + ";";
      }
      throw Error(msg);
    }
    s.almanac = parsed.records;
    s.almanac_id = stem_of(alm_path);

    const auto& je = cfg.at("epochs");
    if (je.is_array()) {
      for (const auto& v : je) s.epochs.push_back(v.get<double>());
    } else {
      const double start = je.at("start_s").get<double>();
      const double step = je.at("step_s").get<double>();
      const int count = je.at("count").get<int>();
      if (count < 1) throw Error("epochs.count must be >= 1");
      if (!(step > 0.0)) throw Error("epochs.step_s must be positive");
      for (int i = 0; i < count; ++i) s.epochs.push_back(start + i * step);
    }

    s.map.mask = deg2rad(cfg.at("elevation_mask_deg").get<double>());
    if (!(s.map.mask >= 0.0 && s.map.mask < std::numbers::pi / 2.0)) {
      throw Error("elevation_mask_deg outside [0, 90)");
    }
    s.map.antenna_height = cfg.at("antenna_height_m").get<double>();
    s.map.node_spacing = cfg.at("map").at("node_spacing_m").get<double>();
    s.map.include_road_edges = cfg.at("map").at("include_road_edges").get<bool>();
    s.map.n_threads = cfg.at("map").at("n_threads").get<int>();

    const auto& js = cfg.at("signal");
    s.map.chip.chip_length = js.at("chip_length_m").get<double>();
    s.map.chip.correlator_spacing = js.at("correlator_spacing_chips").get<double>();
    s.map.chip.cutoff = js.at("cutoff_chips").get<double>();
    s.map.query.carrier_wavelength = js.at("carrier_wavelength_m").get<double>();
    s.map.query.plane_wave = js.at("plane_wave").get<bool>();
    s.map.chip.validate();

    const auto& jm = cfg.at("error_model");
    s.map.error_model.sigma_zenith = jm.at("sigma_zenith_m").get<double>();
    s.map.error_model.elevation_exponent = jm.at("elevation_exponent").get<double>();
    s.map.error_model.sigma_floor = jm.at("sigma_floor_m").get<double>();
    s.map.error_model.clock_bias_true = jm.at("clock_bias_true_m").get<double>();
    s.map.error_model.iono_delay = jm.at("iono_delay_m").get<double>();
    s.map.error_model.tropo_delay = jm.at("tropo_delay_m").get<double>();
    s.map.error_model.validate();

    const auto& ji = cfg.at("integrity");
    s.map.integrity.phmi_hor = ji.at("phmi_hor").get<double>();
    s.map.integrity.phmi_vert = ji.at("phmi_vert").get<double>();
    s.map.integrity.p_sat_fault = ji.at("p_sat_fault").get<double>();
    s.map.integrity.p_const_fault = ji.at("p_const_fault").get<double>();
    s.map.integrity.p_sat_not_monitored = ji.at("p_sat_not_monitored").get<double>();
    s.map.integrity.p_const_not_monitored = ji.at("p_const_not_monitored").get<double>();
    s.map.integrity.mode_probability_floor = ji.at("mode_probability_floor").get<double>();
    s.map.integrity.k_fa = ji.at("k_fa").get<double>();
    s.map.integrity.continuity_budget = ji.at("continuity_budget").get<double>();
    s.map.integrity.nominal_bias = ji.at("nominal_bias_m").get<double>();
    s.map.integrity.hpl_tolerance = ji.at("hpl_tolerance_m").get<double>();
    s.map.integrity.rss_combination = ji.at("rss_combination").get<bool>();
    s.map.integrity.validate();

    const auto& jp = cfg.at("planner");
    s.plan.t_hpl = jp.at("t_hpl_m").get<double>();
    s.plan.t_safe = jp.at("t_safe").get<double>();
    s.plan.d_safe = jp.at("d_safe_m").get<double>();
    s.plan.unavailable_penalty_factor = jp.at("unavailable_penalty_factor").get<double>();
    s.plan.strict_mode = jp.at("strict_mode").get<bool>();
    s.plan.epoch = jp.at("epoch_s").is_null() ? s.epochs.front()
                                              : jp.at("epoch_s").get<double>();
    s.plan_start = jp.at("start").get<std::string>();
    s.plan_target = jp.at("target").get<std::string>();
    s.plan.validate();

    const auto& jsim = cfg.at("simulation");
    s.sim_node = jsim.at("node").get<std::string>();
    s.sim_lateral_offset = jsim.at("lateral_offset_m").get<double>();
    s.sim_seed = jsim.at("seed").get<std::uint64_t>();

    for (const auto& rec : s.almanac) rec.validate();
    if (s.almanac.empty()) throw Error("almanac holds no records");
  } catch (const json::exception& e) {
    throw Error(std::string("scenario structure: ") + e.what());
  }

  s.config_hash = fnv1a_hex(cfg.dump());
  s.map.almanac_id = s.almanac_id;
  s.map.config_hash = s.config_hash;
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  std::string dir;
  if (auto slash = path.find_last_of('/'); slash != std::string::npos) {
    dir = path.substr(0, slash);
  }
  return load_scenario_text(ss.str(), dir);
}

}  // namespace relnav::scenario
