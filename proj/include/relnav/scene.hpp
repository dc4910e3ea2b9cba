#pragma once

#include <string>
#include <vector>

#include "relnav/constants.hpp"
#include "relnav/geodesy.hpp"
#include "relnav/orbit.hpp"

namespace relnav::scene {

using orbits::GeodeticPosition;
using orbits::SatelliteState;
using orbits::Vec3;
using Vec2 = Eigen::Vector2d;

/// Extruded building footprint. The plan polygon is simple, counterclockwise,
/// in meters in the scene's local ENU plan frame.
struct Building {
  std::vector<Vec2> footprint;
  double height = 0.0;                  // m, > 0
  double reflection_coefficient = 0.0;  // amplitude ratio in [0, 1]

  void validate() const;
};

struct RoadSegment {
  std::vector<Vec2> centerline;  // consecutive points distinct
  int lane_count = 1;
  double lane_width = 3.7;  // m

  void validate() const;
  double width() const { return lane_count * lane_width; }
};

/// One vertical wall rectangle of a building, with outward normal.
struct WallFacet {
  Vec2 a, b;        // base edge endpoints (plan)
  Vec2 normal;      // unit outward normal (plan)
  double height = 0.0;
  int building = 0;
  double reflection_coefficient = 0.0;

  double length() const { return (b - a).norm(); }
};

/// Urban scene in a tangent-plane East-North-Up frame anchored at `origin`.
/// Immutable after construction; all queries are pure.
class Scene {
 public:
  Scene() = default;
  Scene(GeodeticPosition origin, std::vector<Building> buildings,
        std::vector<RoadSegment> roads, std::string id = "scene");

  static Scene from_json_text(const std::string& text, const std::string& id = "scene");
  static Scene from_json_file(const std::string& path);
  std::string to_json_text() const;

  const std::vector<Building>& buildings() const { return buildings_; }
  const std::vector<RoadSegment>& roads() const { return roads_; }
  const std::vector<WallFacet>& facets() const { return facets_; }
  const GeodeticPosition& origin() const { return origin_; }
  const std::string& id() const { return id_; }

  /// Local scene-frame coordinates of an ECEF point and back.
  Vec3 to_local(const Vec3& ecef) const;
  Vec3 to_ecef(const Vec3& local) const;

  /// Unit vector (scene frame) from a local point toward a satellite.
  Vec3 direction_to(const Vec3& local_point, const SatelliteState& sat) const;

 private:
  GeodeticPosition origin_;
  std::vector<Building> buildings_;
  std::vector<RoadSegment> roads_;
  std::vector<WallFacet> facets_;
  Vec3 origin_ecef_ = Vec3::Zero();
  Eigen::Matrix3d enu_ = Eigen::Matrix3d::Identity();
  std::string id_;
};

struct ReceiverPose {
  Vec3 position = Vec3::Zero();  // scene frame, m
  double antenna_height = 1.7;   // m, > 0

  Vec3 antenna() const { return position + Vec3{0.0, 0.0, antenna_height}; }
  void validate() const;
};

/// Single-bounce specular path off a wall facet.
struct ReflectedPath {
  int facet_id = -1;
  Vec3 reflection_point = Vec3::Zero();  // scene frame, on the facet
  double path_length_excess = 0.0;       // m, >= 0 (travel minus direct LOS)
  double amplitude_ratio = 0.0;          // [0, 1]
  double phase_offset = 0.0;             // rad, carrier phase lag vs direct
};

enum class ReceptionCondition { kLosOnly, kNlosOnly, kLosNlos, kNoSignal };

const char* to_string(ReceptionCondition c);

struct QueryOptions {
  bool plane_wave = true;  // satellite at infinity for excess-path computation
  double carrier_wavelength = kL1Wavelength;  // m
};

/// True iff the ray from the antenna toward `sat_direction` hits any wall
/// rectangle or roof polygon at positive range. Grazing a facet boundary
/// within 1e-9 m counts as blocked.
bool los_blocked(const Scene& scene, const ReceiverPose& rx, const Vec3& sat_direction);

/// All admissible single-bounce specular paths, by the image method:
/// the receiver is mirrored across each wall facet and the specular point
/// is taken where the ray toward the satellite direction leaves the facet.
/// Paths are kept only when the specular point lies on the facet, both
/// sub-paths are unobstructed, and incidence is from the outward side.
std::vector<ReflectedPath> reflections(const Scene& scene, const ReceiverPose& rx,
                                       const Vec3& sat_direction,
                                       const QueryOptions& opts = {});

/// Finite-range variant of `reflections` with the satellite at an explicit
/// scene-frame position.
std::vector<ReflectedPath> reflections_finite(const Scene& scene, const ReceiverPose& rx,
                                              const Vec3& sat_position_local,
                                              const QueryOptions& opts = {});

struct Classification {
  ReceptionCondition condition = ReceptionCondition::kNoSignal;
  std::vector<ReflectedPath> paths;
  double elevation = 0.0;  // rad
};

/// Reception condition for one satellite at one pose. Satellites below the
/// elevation mask are treated as blocked regardless of geometry.
Classification classify(const Scene& scene, const ReceiverPose& rx,
                        const SatelliteState& sat, double mask,
                        const QueryOptions& opts = {});

}  // namespace relnav::scene
