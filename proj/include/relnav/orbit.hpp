#pragma once

#include "relnav/almanac.hpp"
#include "relnav/geodesy.hpp"

namespace relnav::orbits {

struct SatelliteState {
  SatId sat_id;
  Vec3 position_ecef = Vec3::Zero();  // m
  double epoch = 0.0;                 // s within week
};

/// Receiver-relative look geometry in the local East-North-Up frame.
struct TopocentricView {
  double azimuth = 0.0;    // rad, [0, 2*pi), clockwise from north
  double elevation = 0.0;  // rad, [-pi/2, pi/2]
  double range = 0.0;      // m, > 0
};

/// Solves Kepler's equation M = E - e*sin(E) for the eccentric anomaly.
/// Residual is below 1e-12 rad; throws after the iteration cap.
double solve_kepler(double mean_anomaly, double eccentricity);

/// Propagates an almanac record to ECEF at time t (seconds within the
/// record's week). Standard almanac-grade model: no harmonic corrections,
/// RAAN advanced by the earth-rotation-corrected rate.
SatelliteState propagate(const AlmanacRecord& rec, double t);

/// Elevation/azimuth/range of a satellite as seen from an ECEF receiver
/// position. Throws if the receiver coincides with the satellite.
TopocentricView topocentric(const Vec3& rx_ecef, const SatelliteState& sat);

}  // namespace relnav::orbits
