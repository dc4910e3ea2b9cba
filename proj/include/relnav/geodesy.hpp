#pragma once

#include <Eigen/Dense>

namespace relnav::orbits {

using Vec3 = Eigen::Vector3d;

/// Position on the WGS-84 ellipsoid.
struct GeodeticPosition {
  double latitude = 0.0;   // rad, |lat| <= pi/2
  double longitude = 0.0;  // rad, |lon| <= pi
  double height = 0.0;     // m above ellipsoid

  void validate() const;
};

Vec3 geodetic_to_ecef(const GeodeticPosition& g);

/// Inverse of geodetic_to_ecef; round-trip error is below 1e-6 m.
GeodeticPosition ecef_to_geodetic(const Vec3& ecef);

/// Rotation from ECEF deltas into the local East-North-Up frame at the
/// given origin. Rows are the east, north and up unit vectors.
Eigen::Matrix3d enu_rotation(const GeodeticPosition& origin);

}  // namespace relnav::orbits
