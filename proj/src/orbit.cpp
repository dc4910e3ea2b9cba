#include "relnav/orbit.hpp"

#include <cmath>
#include <numbers>

#include "relnav/constants.hpp"
#include "relnav/error.hpp"

namespace relnav::orbits {

double solve_kepler(double mean_anomaly, double eccentricity) {
  // Newton iteration; E = M is an adequate start for almanac eccentricities.
  double e_anom = mean_anomaly;
  for (int i = 0; i < 50; ++i) {
    const double f = e_anom - eccentricity * std::sin(e_anom) - mean_anomaly;
    if (std::abs(f) < 1e-13) return e_anom;
    e_anom -= f / (1.0 - eccentricity * std::cos(e_anom));
  }
  if (std::abs(e_anom - eccentricity * std::sin(e_anom) - mean_anomaly) < 1e-12) {
    return e_anom;
  }
  throw Error("Kepler solver did not converge");
}

SatelliteState propagate(const AlmanacRecord& rec, double t) {
  rec.validate();
  const double a = rec.sqrt_semimajor * rec.sqrt_semimajor;
  const double n = std::sqrt(kEarthGm / (a * a * a));  // mean motion

  double tk = t - rec.toa;
  // Account for week rollover; callers keep |t - toa| within one week.
  if (tk > kSecondsPerWeek / 2.0) tk -= kSecondsPerWeek;
  if (tk < -kSecondsPerWeek / 2.0) tk += kSecondsPerWeek;

  const double m = rec.mean_anomaly_at_epoch + n * tk;
  const double e_anom = solve_kepler(m, rec.eccentricity);

  const double nu = std::atan2(std::sqrt(1.0 - rec.eccentricity * rec.eccentricity) * std::sin(e_anom),
                               std::cos(e_anom) - rec.eccentricity);
  const double r = a * (1.0 - rec.eccentricity * std::cos(e_anom));
  const double u = nu + rec.arg_perigee;  // argument of latitude

  const double x_orb = r * std::cos(u);
  const double y_orb = r * std::sin(u);

  // RAAN referenced to the ECEF frame: corrected for earth rotation since
  // the week epoch (t is seconds within the week).
  const double raan = rec.raan_at_week_epoch +
                      (rec.raan_rate - kEarthRotationRate) * tk -
                      kEarthRotationRate * rec.toa;

  const double so = std::sin(raan), co = std::cos(raan);
  const double si = std::sin(rec.inclination), ci = std::cos(rec.inclination);

  SatelliteState state;
  state.sat_id = rec.sat_id;
  state.epoch = t;
  state.position_ecef = {x_orb * co - y_orb * ci * so,
                         x_orb * so + y_orb * ci * co,
                         y_orb * si};
  return state;
}

TopocentricView topocentric(const Vec3& rx_ecef, const SatelliteState& sat) {
  const Vec3 d = sat.position_ecef - rx_ecef;
  const double range = d.norm();
  if (range < 1e-6) throw Error("receiver coincides with satellite");

  const GeodeticPosition g = ecef_to_geodetic(rx_ecef);
  const Vec3 enu = enu_rotation(g) * d;

  TopocentricView view;
  view.range = range;
  view.elevation = std::asin(std::clamp(enu.z() / range, -1.0, 1.0));
  view.azimuth = std::atan2(enu.x(), enu.y());
  if (view.azimuth < 0.0) view.azimuth += 2.0 * std::numbers::pi;
  // A hair west of due north lands on 2*pi after the wrap; keep [0, 2*pi).
  if (view.azimuth >= 2.0 * std::numbers::pi) view.azimuth = 0.0;
  return view;
}

}  // namespace relnav::orbits
