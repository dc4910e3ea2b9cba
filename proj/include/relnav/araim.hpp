#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relnav/orbit.hpp"

namespace relnav::araim {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using orbits::Vec3;

struct IntegrityConfig {
  double phmi_hor = 9.8e-8;
  double phmi_vert = 9.8e-8;
  double p_sat_fault = 1e-5;           // prior per satellite
  double p_const_fault = 1e-4;         // prior per constellation
  double p_sat_not_monitored = 4e-8;
  double p_const_not_monitored = 4e-8;
  double mode_probability_floor = 1e-8;  // enumeration cutoff
  double k_fa = 0.0;                   // false-alarm quantile; <= 0 derives it
  double continuity_budget = 1e-6;     // false-alert budget behind derived k_fa
  double nominal_bias = 0.75;          // m, per-measurement bias bound
  double hpl_tolerance = 1e-6;         // m, bisection stop (upper bound)
  bool rss_combination = true;         // axis combination; false = max of axes

  void validate() const;
  // Threshold quantile: the continuity budget split evenly over fault modes
  // and the two horizontal axes, two-sided per test.
  double k_fa_effective(int n_fault_modes) const;
};

// Linearized measurement geometry.  Rows follow the caller's measurement
// order; states are [E, N, U, clock per constellation].
struct GeometryContext {
  MatrixXd geometry;               // N x (3 + C)
  VectorXd weights;                // N, 1/sigma^2
  std::vector<int> constellation;  // per row, 0-based
  int n_constellations = 1;

  int n_rows() const { return static_cast<int>(geometry.rows()); }
  int n_states() const { return 3 + n_constellations; }
  void validate() const;
};

struct FaultMode {
  int index = 0;
  std::vector<int> excluded;  // measurement row indices, ascending
  double p_fault = 1.0;       // joint prior of the faulted elements
  bool feasible = true;       // enough measurements remain to solve
};

struct FaultModeSet {
  std::vector<FaultMode> modes;  // modes[0] is the fault-free mode
  // Config residuals plus the probability mass of fault multiplicities and
  // subsets the enumeration left out.
  double p_not_monitored = 0.0;
};

// `constellation` gives each measurement's constellation id; subsets are
// emitted as measurement row indices.
FaultModeSet enumerate_fault_modes(const std::vector<int>& constellation,
                                   const IntegrityConfig& cfg);

struct WlsSolution {
  VectorXd state;           // 3 + C
  MatrixXd covariance;      // (3+C) x (3+C), (G'WG)^-1
  GeometryContext geometry; // linearized at the converged state
  VectorXd residuals;       // rho - predicted(state)
  int iterations = 0;
};

GeometryContext build_geometry(const std::vector<Vec3>& sat_positions,
                               const std::vector<int>& constellation, const VectorXd& sigmas,
                               const Vec3& linearization_point);

// Iterated weighted least squares (Gauss-Newton), relinearized every step,
// stopping at a 1e-7 m update or 20 iterations.
WlsSolution wls_solve(const std::vector<Vec3>& sat_positions,
                      const std::vector<int>& constellation, const VectorXd& sigmas,
                      const VectorXd& pseudoranges, VectorXd x0 = VectorXd());

struct SubsetSolution {
  FaultMode mode;
  VectorXd state;                        // full dim; NaN clock for dead constellations
  double sigma_q[2] = {0.0, 0.0};        // sqrt of axis variance
  double bias_q[2] = {0.0, 0.0};        // nominal-bias projection, m
  double separation_sigma_q[2] = {0.0, 0.0};
};

// One-shot subset solutions at the all-in-view linearization point.  The
// returned vector is aligned with `modes.modes`; infeasible modes keep an
// empty state.
std::vector<SubsetSolution> subset_solutions(const WlsSolution& all_in_view,
                                             const FaultModeSet& modes,
                                             const IntegrityConfig& cfg);

struct FdeOutcome {
  bool passed = false;
  std::vector<int> excluded;  // original measurement indices
  MatrixXd separations;       // modes x 2
  MatrixXd thresholds;        // modes x 2
  std::string detail;
};

FdeOutcome solution_separation_test(const std::vector<SubsetSolution>& solutions, double k_fa);

struct FdeResult {
  FdeOutcome outcome;
  WlsSolution solution;                  // valid iff outcome.passed
  std::vector<SubsetSolution> solutions; // subset solutions of the final set
  FaultModeSet modes;                    // modes of the final set
  double k_fa = 0.0;
  // Wrong-exclusion bookkeeping, populated when measurements were excluded:
  // summed pre-exclusion detection thresholds of the excluded modes and the
  // union bound of their priors.
  double exclusion_threshold_q[2] = {0.0, 0.0};
  double p_excluded = 0.0;
};

FdeResult fde(const std::vector<Vec3>& sat_positions, const std::vector<int>& constellation,
              const VectorXd& sigmas, const VectorXd& pseudoranges, const IntegrityConfig& cfg);

// Standard Gaussian tail probability Q(x) = 1 - Phi(x).  The long double
// variant keeps denormal-free values down to Q(40); the double variant
// underflows below ~1e-308.
long double q_tail_ld(long double x);
double q_tail(double x);
// Inverse on p in (0, 1); q_tail(q_tail_inverse(p)) == p to fixed point.
double q_tail_inverse(double p);

struct ExclusionContext {
  double threshold_q[2] = {0.0, 0.0};
  double p_excluded = 0.0;
};

// One horizontal axis of the protection-level equation:
//   2 Q((H - b0)/s0) + sum_k p_k Q((H - T_k - b_k)/s_k) = rhs
// exposed so callers can evaluate the residual at a solved H.
struct HplEquation {
  struct Term {
    double p;      // multiplier (2 for the fault-free term)
    double offset; // T_k + b_k
    double sigma;
  };
  std::vector<Term> terms;
  double rhs = 0.0;

  long double lhs(double h) const;
};

HplEquation build_hpl_equation(const std::vector<SubsetSolution>& solutions,
                               const IntegrityConfig& cfg, double k_fa, int axis,
                               double p_not_monitored_base,
                               const ExclusionContext* exclusion = nullptr);

struct HplResult {
  double hpl_axis[2] = {0.0, 0.0};
  double hpl = 0.0;
  bool available = false;
};

HplResult compute_hpl(const std::vector<SubsetSolution>& solutions, const FaultModeSet& modes,
                      const IntegrityConfig& cfg, double k_fa,
                      const ExclusionContext* exclusion = nullptr);

}  // namespace relnav::araim
