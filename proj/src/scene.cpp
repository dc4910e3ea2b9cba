#include "relnav/scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "relnav/error.hpp"

namespace relnav::scene {

namespace {

constexpr double kBoundaryTol = 1e-9;   // grazing tie-break, m
constexpr double kOcclusionEps = 1e-7;  // endpoint margin for sub-path checks, m

double signed_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * s;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

bool polygon_is_simple(const std::vector<Vec2>& poly) {
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (they share a vertex).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_properly_intersect(poly[i], poly[(i + 1) % n],
                                      poly[j], poly[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p, double tol) {
  for (size_t i = 0; i < poly.size(); ++i) {
    if (point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]) <= tol) return true;
  }
  bool inside = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if ((b.y() > p.y()) != (a.y() > p.y())) {
      const double x = b.x() + (p.y() - b.y()) * (a.x() - b.x()) / (a.y() - b.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

// Distance along the ray (unit dir) to the wall rectangle, or nullopt.
// Boundary tolerance follows the grazing tie-break.
std::optional<double> wall_hit(const WallFacet& f, const Vec3& origin, const Vec3& dir) {
  const Vec2 d2{dir.x(), dir.y()};
  const double denom = f.normal.dot(d2);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const Vec2 o2{origin.x(), origin.y()};
  const double t = f.normal.dot(f.a - o2) / denom;
  if (!(t > 0.0)) return std::nullopt;
  const Vec3 p = origin + t * dir;
  const Vec2 e = f.b - f.a;
  const double len = e.norm();
  const double s = (Vec2{p.x(), p.y()} - f.a).dot(e) / len;
  if (s < -kBoundaryTol || s > len + kBoundaryTol) return std::nullopt;
  if (p.z() < -kBoundaryTol || p.z() > f.height + kBoundaryTol) return std::nullopt;
  return t;
}

std::optional<double> roof_hit(const Building& b, const Vec3& origin, const Vec3& dir) {
  if (std::abs(dir.z()) < 1e-12) return std::nullopt;
  const double t = (b.height - origin.z()) / dir.z();
  if (!(t > 0.0)) return std::nullopt;
  const Vec3 p = origin + t * dir;
  if (!point_in_polygon(b.footprint, {p.x(), p.y()}, kBoundaryTol)) return std::nullopt;
  return t;
}

// Any obstruction along origin + t*dir for t in (t_min, t_max), excluding
// one facet (the reflecting one).
bool obstructed(const Scene& scene, const Vec3& origin, const Vec3& dir,
                double t_min, double t_max, int skip_facet) {
  for (size_t i = 0; i < scene.facets().size(); ++i) {
    if (static_cast<int>(i) == skip_facet) continue;
    if (auto t = wall_hit(scene.facets()[i], origin, dir); t && *t > t_min && *t < t_max) {
      return true;
    }
  }
  for (const Building& b : scene.buildings()) {
    if (auto t = roof_hit(b, origin, dir); t && *t > t_min && *t < t_max) return true;
  }
  return false;
}

}  // namespace

void Building::validate() const {
  if (footprint.size() < 3) throw Error("building footprint needs >= 3 vertices");
  for (size_t i = 0; i < footprint.size(); ++i) {
    if ((footprint[i] - footprint[(i + 1) % footprint.size()]).norm() < 1e-9) {
      throw Error("building footprint has duplicate consecutive vertices");
    }
  }
  if (signed_area(footprint) <= 0.0) throw Error("building footprint must be counterclockwise");
  if (!polygon_is_simple(footprint)) throw Error("building footprint is self-intersecting");
  if (!(height > 0.0)) throw Error("building height must be positive");
  if (!(reflection_coefficient >= 0.0 && reflection_coefficient <= 1.0)) {
    throw Error("reflection coefficient outside [0, 1]");
  }
}

void RoadSegment::validate() const {
  if (centerline.size() < 2) throw Error("road centerline needs >= 2 points");
  for (size_t i = 0; i + 1 < centerline.size(); ++i) {
    if ((centerline[i + 1] - centerline[i]).norm() < 1e-9) {
      throw Error("road centerline has coincident consecutive points");
    }
  }
  if (lane_count < 1) throw Error("lane_count must be >= 1");
  if (!(lane_width > 0.0)) throw Error("lane_width must be positive");
}

void ReceiverPose::validate() const {
  if (!(antenna_height > 0.0)) throw Error("antenna height must be positive");
}

Scene::Scene(GeodeticPosition origin, std::vector<Building> buildings,
             std::vector<RoadSegment> roads, std::string id)
    : origin_(origin), buildings_(std::move(buildings)), roads_(std::move(roads)),
      id_(std::move(id)) {
  origin_.validate();
  for (const Building& b : buildings_) b.validate();
  for (const RoadSegment& r : roads_) r.validate();

  origin_ecef_ = orbits::geodetic_to_ecef(origin_);
  enu_ = orbits::enu_rotation(origin_);

  for (size_t bi = 0; bi < buildings_.size(); ++bi) {
    const Building& b = buildings_[bi];
    const size_t n = b.footprint.size();
    for (size_t i = 0; i < n; ++i) {
      WallFacet f;
      f.a = b.footprint[i];
      f.b = b.footprint[(i + 1) % n];
      const Vec2 e = (f.b - f.a).normalized();
      f.normal = {e.y(), -e.x()};  // outward for a counterclockwise footprint
      f.height = b.height;
      f.building = static_cast<int>(bi);
      f.reflection_coefficient = b.reflection_coefficient;
      facets_.push_back(f);
    }
  }
}

Vec3 Scene::to_local(const Vec3& ecef) const { return enu_ * (ecef - origin_ecef_); }

Vec3 Scene::to_ecef(const Vec3& local) const { return origin_ecef_ + enu_.transpose() * local; }

Vec3 Scene::direction_to(const Vec3& local_point, const SatelliteState& sat) const {
  const Vec3 sat_local = to_local(sat.position_ecef);
  const Vec3 d = sat_local - local_point;
  const double n = d.norm();
  if (n < 1e-6) throw Error("receiver coincides with satellite");
  return d / n;
}

Scene Scene::from_json_text(const std::string& text, const std::string& id) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("scene JSON parse failure: ") + e.what());
  }

  GeodeticPosition origin;
  try {
    const auto& jo = j.at("origin");
    origin.latitude = deg2rad(jo.at("lat_deg").get<double>());
    origin.longitude = deg2rad(jo.at("lon_deg").get<double>());
    origin.height = jo.value("h_m", 0.0);

    std::vector<Building> buildings;
    for (const auto& jb : j.value("buildings", nlohmann::json::array())) {
      Building b;
      for (const auto& v : jb.at("footprint")) {
        b.footprint.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      }
      b.height = jb.at("height_m").get<double>();
      b.reflection_coefficient = jb.value("reflection_coeff", 0.5);
      buildings.push_back(std::move(b));
    }

    std::vector<RoadSegment> roads;
    for (const auto& jr : j.value("roads", nlohmann::json::array())) {
      RoadSegment r;
      for (const auto& v : jr.at("centerline")) {
        r.centerline.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      }
      r.lane_count = jr.value("lane_count", 1);
      r.lane_width = jr.value("lane_width_m", 3.7);
      roads.push_back(std::move(r));
    }

    return Scene(origin, std::move(buildings), std::move(roads),
                 j.value("id", id));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scene JSON structure: ") + e.what());
  }
}

Scene Scene::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open scene file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  std::string id = path;
  if (auto slash = id.find_last_of('/'); slash != std::string::npos) id = id.substr(slash + 1);
  if (auto dot = id.find_last_of('.'); dot != std::string::npos) id = id.substr(0, dot);
  return from_json_text(ss.str(), id);
}

std::string Scene::to_json_text() const {
  nlohmann::json j;
  j["id"] = id_;
  j["origin"] = {{"lat_deg", rad2deg(origin_.latitude)},
                 {"lon_deg", rad2deg(origin_.longitude)},
                 {"h_m", origin_.height}};
  j["buildings"] = nlohmann::json::array();
  for (const Building& b : buildings_) {
    nlohmann::json jb;
    jb["footprint"] = nlohmann::json::array();
    for (const Vec2& v : b.footprint) jb["footprint"].push_back({v.x(), v.y()});
    jb["height_m"] = b.height;
    jb["reflection_coeff"] = b.reflection_coefficient;
    j["buildings"].push_back(jb);
  }
  j["roads"] = nlohmann::json::array();
  for (const RoadSegment& r : roads_) {
    nlohmann::json jr;
    jr["centerline"] = nlohmann::json::array();
    for (const Vec2& v : r.centerline) jr["centerline"].push_back({v.x(), v.y()});
    jr["lane_count"] = r.lane_count;
    jr["lane_width_m"] = r.lane_width;
    j["roads"].push_back(jr);
  }
  return j.dump(2);
}

const char* to_string(ReceptionCondition c) {
  switch (c) {
    case ReceptionCondition::kLosOnly: return "LOS_ONLY";
    case ReceptionCondition::kNlosOnly: return "NLOS_ONLY";
    case ReceptionCondition::kLosNlos: return "LOS_NLOS";
    case ReceptionCondition::kNoSignal: return "NO_SIGNAL";
  }
  return "?";
}

bool los_blocked(const Scene& scene, const ReceiverPose& rx, const Vec3& sat_direction) {
  rx.validate();
  const Vec3 origin = rx.antenna();
  const Vec3 dir = sat_direction.normalized();
  for (const WallFacet& f : scene.facets()) {
    if (auto t = wall_hit(f, origin, dir); t && *t > kBoundaryTol) return true;
  }
  for (const Building& b : scene.buildings()) {
    if (auto t = roof_hit(b, origin, dir); t && *t > kBoundaryTol) return true;
  }
  return false;
}

namespace {

std::vector<ReflectedPath> reflections_impl(const Scene& scene, const ReceiverPose& rx,
                                            const Vec3& sat_dir_or_pos, bool plane_wave,
                                            const QueryOptions& opts) {
  rx.validate();
  const Vec3 r = rx.antenna();
  std::vector<ReflectedPath> out;

  for (size_t fi = 0; fi < scene.facets().size(); ++fi) {
    const WallFacet& f = scene.facets()[fi];
    if (f.reflection_coefficient <= 0.0) continue;  // absorber: blocks but never reflects
    const Vec3 n{f.normal.x(), f.normal.y(), 0.0};
    const double side = (Vec2{r.x(), r.y()} - f.a).dot(f.normal);
    if (side <= kBoundaryTol) continue;  // receiver on or behind the wall plane

    const Vec3 mirrored = r - 2.0 * side * n;

    Vec3 q;             // specular point
    double excess;      // m
    if (plane_wave) {
      const Vec3 s = sat_dir_or_pos.normalized();
      const double incidence = s.dot(n);
      if (incidence <= 1e-12) continue;  // arrives from behind or grazes the wall
      const double t = side / incidence;
      q = mirrored + t * s;
      // Mirror construction with the satellite at infinity.
      excess = (r - q).norm() + s.dot(r - q);
    } else {
      const Vec3 sat = sat_dir_or_pos;
      const double sat_side = (Vec2{sat.x(), sat.y()} - f.a).dot(f.normal);
      if (sat_side <= kBoundaryTol) continue;
      const Vec3 seg = sat - mirrored;
      const double denom = seg.dot(n);
      if (denom <= 1e-12) continue;
      const double t = side / denom;
      if (t <= 0.0 || t >= 1.0) continue;
      q = mirrored + t * seg;
      excess = (sat - q).norm() + (q - r).norm() - (sat - r).norm();
    }

    // Specular point must lie on the facet rectangle.
    const Vec2 e = f.b - f.a;
    const double len = e.norm();
    const double s_along = (Vec2{q.x(), q.y()} - f.a).dot(e) / len;
    if (s_along < -kBoundaryTol || s_along > len + kBoundaryTol) continue;
    if (q.z() < -kBoundaryTol || q.z() > f.height + kBoundaryTol) continue;

    // Both sub-paths must be unobstructed by every other facet and roof.
    const Vec3 to_rx = r - q;
    const double rx_dist = to_rx.norm();
    if (rx_dist < kOcclusionEps) continue;
    if (obstructed(scene, q, to_rx / rx_dist, kOcclusionEps, rx_dist - kOcclusionEps,
                   static_cast<int>(fi))) {
      continue;
    }
    if (plane_wave) {
      const Vec3 s = sat_dir_or_pos.normalized();
      if (obstructed(scene, q, s, kOcclusionEps, std::numeric_limits<double>::infinity(),
                     static_cast<int>(fi))) {
        continue;
      }
    } else {
      const Vec3 to_sat = sat_dir_or_pos - q;
      const double sat_dist = to_sat.norm();
      if (obstructed(scene, q, to_sat / sat_dist, kOcclusionEps, sat_dist - kOcclusionEps,
                     static_cast<int>(fi))) {
        continue;
      }
    }

    if (excess < 0.0) excess = 0.0;  // guard against rounding at grazing incidence

    ReflectedPath path;
    path.facet_id = static_cast<int>(fi);
    path.reflection_point = q;
    path.path_length_excess = excess;
    path.amplitude_ratio = f.reflection_coefficient;
    path.phase_offset = 2.0 * std::numbers::pi *
                        std::fmod(excess, opts.carrier_wavelength) / opts.carrier_wavelength;
    out.push_back(path);
  }
  return out;
}

}  // namespace

std::vector<ReflectedPath> reflections(const Scene& scene, const ReceiverPose& rx,
                                       const Vec3& sat_direction, const QueryOptions& opts) {
  return reflections_impl(scene, rx, sat_direction, /*plane_wave=*/true, opts);
}

std::vector<ReflectedPath> reflections_finite(const Scene& scene, const ReceiverPose& rx,
                                              const Vec3& sat_position_local,
                                              const QueryOptions& opts) {
  return reflections_impl(scene, rx, sat_position_local, /*plane_wave=*/false, opts);
}

Classification classify(const Scene& scene, const ReceiverPose& rx,
                        const SatelliteState& sat, double mask, const QueryOptions& opts) {
  if (!(mask >= 0.0 && mask < std::numbers::pi / 2.0)) {
    throw Error("elevation mask outside [0, pi/2)");
  }
  Classification c;
  const Vec3 dir = scene.direction_to(rx.antenna(), sat);
  c.elevation = std::asin(std::clamp(dir.z(), -1.0, 1.0));
  if (c.elevation < mask) {
    c.condition = ReceptionCondition::kNoSignal;  // nearby-vehicle blockage model
    return c;
  }
  const bool blocked = los_blocked(scene, rx, dir);
  c.paths = opts.plane_wave
                ? reflections(scene, rx, dir, opts)
                : reflections_finite(scene, rx, scene.to_local(sat.position_ecef), opts);
  if (!blocked) {
    c.condition = c.paths.empty() ? ReceptionCondition::kLosOnly : ReceptionCondition::kLosNlos;
  } else {
    c.condition = c.paths.empty() ? ReceptionCondition::kNoSignal : ReceptionCondition::kNlosOnly;
  }
  return c;
}

}  // namespace relnav::scene
