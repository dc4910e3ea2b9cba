#pragma once

#include <cstdint>
#include <vector>

#include "relnav/constants.hpp"
#include "relnav/orbit.hpp"
#include "relnav/scene.hpp"

namespace relnav::signal {

using orbits::SatelliteState;
using orbits::SatId;
using orbits::Vec3;

// Code-tracking loop parameters. Lengths in meters, delays in chips.
struct ChipParams {
  double chip_length = kCaChipLength;
  double correlator_spacing = 1.0;  // chips, in (0, 1]
  double cutoff = 1.5;              // chips; delays at or beyond this leave no bias

  void validate() const;
};

struct ErrorModelConfig {
  double sigma_zenith = 0.5;        // m, noise sigma at zenith
  double elevation_exponent = 1.0;  // sigma grows as 1/sin(el)^k
  double sigma_floor = 0.25;        // m
  double clock_bias_true = 0.0;     // m, receiver clock offset used in simulation
  double iono_delay = 0.0;          // m, residual after differential corrections
  double tropo_delay = 0.0;         // m

  void validate() const;
};

struct PseudorangePrediction {
  SatId sat_id;
  scene::ReceptionCondition condition = scene::ReceptionCondition::kLosOnly;
  double r_los = 0.0;        // m, geometric range plus modeled delays
  double rho_bias = 0.0;     // m, multipath/NLOS bias; 0 for LOS_ONLY
  double sigma = 0.0;        // m
  double iono_delay = 0.0;   // m
  double tropo_delay = 0.0;  // m

  double predicted() const { return r_los + rho_bias; }
};

struct MeasurementSample {
  SatId sat_id;
  double pseudorange = 0.0;  // m
  double epoch = 0.0;        // s
};

// Ranging delay when only reflections arrive: the loop locks onto the
// earliest correlation peak, so the smallest path-length excess wins.
double nlos_bias(const std::vector<scene::ReflectedPath>& paths);

// Tracking offset when the direct signal and reflections superpose.  Each
// reflection shifts the zero crossing of a coherent early-late discriminator
// run over the triangular code autocorrelation; delays past `cutoff` chips
// fall outside the correlator and contribute nothing.  Per-path offsets are
// summed and the total is clamped to the single-path worst case
// (chip_length * correlator_spacing / 2).
double los_nlos_bias(const std::vector<scene::ReflectedPath>& paths, const ChipParams& chip);

// Tracking offset caused by one echo of relative amplitude `a` (amplitude
// ratio times the cosine of the carrier phase offset) delayed by
// `delay_chips`.  Exposed for envelope plots and as the pluggable core of
// los_nlos_bias.  Returns chips.
double early_late_tracking_offset(double a, double delay_chips, double spacing_chips);

double sigma_model(double elevation, const ErrorModelConfig& cfg);

// `elevation` is the line-of-sight elevation the noise model is evaluated at;
// pass the angle produced by the same visibility query that classified the
// signal so predictions stay consistent with map-side sigma inflation.
PseudorangePrediction predict_pseudorange(const SatelliteState& sat, const Vec3& rx_antenna_ecef,
                                          scene::ReceptionCondition condition,
                                          const std::vector<scene::ReflectedPath>& paths,
                                          double elevation, const ChipParams& chip,
                                          const ErrorModelConfig& cfg);

std::vector<MeasurementSample> simulate_measurements(
    const std::vector<PseudorangePrediction>& predictions, const ErrorModelConfig& cfg,
    std::uint64_t seed, double epoch);

}  // namespace relnav::signal
