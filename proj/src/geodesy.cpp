#include "relnav/geodesy.hpp"

#include <cmath>
#include <numbers>

#include "relnav/constants.hpp"
#include "relnav/error.hpp"

namespace relnav::orbits {

void GeodeticPosition::validate() const {
  if (!std::isfinite(latitude) || !std::isfinite(longitude) || !std::isfinite(height)) {
    throw Error("geodetic position not finite");
  }
  if (std::abs(latitude) > std::numbers::pi / 2.0 + 1e-12) {
    throw Error("latitude outside [-pi/2, pi/2]");
  }
  if (std::abs(longitude) > std::numbers::pi + 1e-12) {
    throw Error("longitude outside [-pi, pi]");
  }
}

Vec3 geodetic_to_ecef(const GeodeticPosition& g) {
  g.validate();
  const double slat = std::sin(g.latitude);
  const double clat = std::cos(g.latitude);
  // Prime-vertical radius of curvature.
  const double n = kWgs84SemiMajor / std::sqrt(1.0 - kWgs84Ecc2 * slat * slat);
  return {(n + g.height) * clat * std::cos(g.longitude),
          (n + g.height) * clat * std::sin(g.longitude),
          (n * (1.0 - kWgs84Ecc2) + g.height) * slat};
}

GeodeticPosition ecef_to_geodetic(const Vec3& ecef) {
  const double p = std::hypot(ecef.x(), ecef.y());
  GeodeticPosition g;
  g.longitude = (p > 0.0) ? std::atan2(ecef.y(), ecef.x()) : 0.0;

  // Fixed-point iteration on latitude; converges well below 1e-6 m for
  // any point from the surface out to orbital altitudes.  The height uses
  // whichever trig divisor is better conditioned so the poles stay exact.
  double lat = std::atan2(ecef.z(), p * (1.0 - kWgs84Ecc2));
  double h = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double slat = std::sin(lat);
    const double clat = std::cos(lat);
    const double n = kWgs84SemiMajor / std::sqrt(1.0 - kWgs84Ecc2 * slat * slat);
    h = (std::abs(slat) > std::abs(clat))
            ? ecef.z() / slat - n * (1.0 - kWgs84Ecc2)
            : p / clat - n;
    const double next = std::atan2(ecef.z(), p * (1.0 - kWgs84Ecc2 * n / (n + h)));
    if (std::abs(next - lat) < 1e-14) {
      lat = next;
      break;
    }
    lat = next;
  }
  g.latitude = lat;
  g.height = h;
  return g;
}

Eigen::Matrix3d enu_rotation(const GeodeticPosition& origin) {
  const double sl = std::sin(origin.latitude), cl = std::cos(origin.latitude);
  const double so = std::sin(origin.longitude), co = std::cos(origin.longitude);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return r;
}

}  // namespace relnav::orbits
