#include "relnav/signal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "relnav/error.hpp"

namespace relnav::signal {

void ChipParams::validate() const {
  if (!(chip_length > 0.0)) throw Error("chip_length must be positive");
  if (!(correlator_spacing > 0.0 && correlator_spacing <= 1.0)) {
    throw Error("correlator_spacing must be in (0, 1]");
  }
  if (!(cutoff > correlator_spacing)) throw Error("cutoff must exceed correlator_spacing");
}

void ErrorModelConfig::validate() const {
  if (!(sigma_zenith > 0.0)) throw Error("sigma_zenith must be positive");
  if (!(sigma_floor > 0.0)) throw Error("sigma_floor must be positive");
  if (!std::isfinite(elevation_exponent)) throw Error("elevation_exponent must be finite");
}

double nlos_bias(const std::vector<scene::ReflectedPath>& paths) {
  if (paths.empty()) throw Error("nlos_bias requires at least one reflected path");
  double m = paths.front().path_length_excess;
  for (const auto& p : paths) m = std::min(m, p.path_length_excess);
  return m;
}

namespace {

double triangle(double x) { return std::max(0.0, 1.0 - std::abs(x)); }

// Composite prompt correlation: direct triangle plus one scaled, delayed echo.
double composite(double tau, double a, double delta) {
  return triangle(tau) + a * triangle(tau - delta);
}

double discriminator(double tau, double a, double delta, double half_spacing) {
  return composite(tau - half_spacing, a, delta) - composite(tau + half_spacing, a, delta);
}

}  // namespace

double early_late_tracking_offset(double a, double delay_chips, double spacing_chips) {
  if (!(spacing_chips > 0.0)) throw Error("spacing must be positive");
  if (delay_chips <= 0.0 || std::abs(a) < 1e-15) return 0.0;

  const double h = spacing_chips / 2.0;

  // The discriminator is piecewise linear in tau with breakpoints wherever
  // either triangle's corner meets the early or late sample.
  std::vector<double> knots;
  for (double corner : {-1.0, 0.0, 1.0}) {
    for (double shift : {-h, h}) {
      knots.push_back(corner + shift);
      knots.push_back(delay_chips + corner + shift);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              knots.end());

  double best = 0.0;
  bool found = false;
  auto consider = [&](double tau) {
    // The loop only holds lock where there is correlation power.
    if (composite(tau, a, delay_chips) <= 1e-12) return;
    if (!found || std::abs(tau) < std::abs(best)) {
      best = tau;
      found = true;
    }
  };

  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    const double t0 = knots[i];
    const double t1 = knots[i + 1];
    const double d0 = discriminator(t0, a, delay_chips, h);
    const double d1 = discriminator(t1, a, delay_chips, h);
    if (d0 == 0.0) consider(t0);
    if (d1 == 0.0) consider(t1);
    if ((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0)) {
      consider(t0 + (t1 - t0) * (d0 / (d0 - d1)));
    }
  }
  if (!found) return 0.0;  // fully cancelled correlation; no tracking point
  return best;
}

double los_nlos_bias(const std::vector<scene::ReflectedPath>& paths, const ChipParams& chip) {
  chip.validate();
  if (paths.empty()) return 0.0;

  const double clamp_m = chip.chip_length * chip.correlator_spacing / 2.0;
  double sum = 0.0;
  for (const auto& p : paths) {
    const double delta = p.path_length_excess / chip.chip_length;
    if (delta >= chip.cutoff) continue;
    const double a = p.amplitude_ratio * std::cos(p.phase_offset);
    const double tau = early_late_tracking_offset(a, delta, chip.correlator_spacing);
    sum += std::clamp(tau * chip.chip_length, -clamp_m, clamp_m);
  }
  return std::clamp(sum, -clamp_m, clamp_m);
}

double sigma_model(double elevation, const ErrorModelConfig& cfg) {
  cfg.validate();
  if (!(elevation > 0.0 && elevation <= std::numbers::pi / 2.0 + 1e-12)) {
    throw Error("elevation outside (0, pi/2]");
  }
  const double s = std::sin(std::min(elevation, std::numbers::pi / 2.0));
  return std::max(cfg.sigma_floor, cfg.sigma_zenith / std::pow(s, cfg.elevation_exponent));
}

PseudorangePrediction predict_pseudorange(const SatelliteState& sat, const Vec3& rx_antenna_ecef,
                                          scene::ReceptionCondition condition,
                                          const std::vector<scene::ReflectedPath>& paths,
                                          double elevation, const ChipParams& chip,
                                          const ErrorModelConfig& cfg) {
  if (condition == scene::ReceptionCondition::kNoSignal) {
    throw Error("no pseudorange exists without a signal");
  }
  cfg.validate();

  PseudorangePrediction p;
  p.sat_id = sat.sat_id;
  p.condition = condition;
  p.iono_delay = cfg.iono_delay;
  p.tropo_delay = cfg.tropo_delay;
  p.r_los = (sat.position_ecef - rx_antenna_ecef).norm() + cfg.iono_delay + cfg.tropo_delay;
  switch (condition) {
    case scene::ReceptionCondition::kLosOnly:
      p.rho_bias = 0.0;
      break;
    case scene::ReceptionCondition::kNlosOnly:
      p.rho_bias = nlos_bias(paths);
      break;
    case scene::ReceptionCondition::kLosNlos:
      p.rho_bias = los_nlos_bias(paths, chip);
      break;
    case scene::ReceptionCondition::kNoSignal:
      break;  // unreachable
  }
  p.sigma = sigma_model(elevation, cfg);
  return p;
}

std::vector<MeasurementSample> simulate_measurements(
    const std::vector<PseudorangePrediction>& predictions, const ErrorModelConfig& cfg,
    std::uint64_t seed, double epoch) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<MeasurementSample> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) {
    MeasurementSample s;
    s.sat_id = p.sat_id;
    s.epoch = epoch;
    s.pseudorange = p.r_los + cfg.clock_bias_true + p.rho_bias + p.sigma * noise(rng);
    out.push_back(s);
  }
  return out;
}

}  // namespace relnav::signal
