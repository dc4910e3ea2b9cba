#include "relnav/araim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "relnav/error.hpp"

namespace relnav::araim {

namespace {

constexpr double kRcondFloor = 1e-12;
// Absolute slack on separation thresholds so that modes with no observable
// position difference (separation sigma ~ 0) pass on rounding dust.
constexpr double kThresholdSlack = 1e-9;  // m

void check_probability(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) throw Error(std::string(name) + " must lie in (0, 1)");
}

// P(X > r) for X ~ Binomial(n, p).
double binomial_tail(int n, double p, int r) {
  double tail = 0.0;
  for (int j = r + 1; j <= n; ++j) {
    double term = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                  j * std::log(p) + (n - j) * std::log1p(-p);
    tail += std::exp(term);
  }
  return tail;
}

void combinations(int n, int k, const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k == 0) {
    emit(idx);
    return;
  }
  while (true) {
    emit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

void IntegrityConfig::validate() const {
  check_probability(phmi_hor, "phmi_hor");
  check_probability(phmi_vert, "phmi_vert");
  check_probability(p_sat_fault, "p_sat_fault");
  check_probability(p_const_fault, "p_const_fault");
  check_probability(p_sat_not_monitored, "p_sat_not_monitored");
  check_probability(p_const_not_monitored, "p_const_not_monitored");
  check_probability(mode_probability_floor, "mode_probability_floor");
  check_probability(continuity_budget, "continuity_budget");
  if (!(hpl_tolerance > 0.0)) throw Error("hpl_tolerance must be positive");
  if (!(nominal_bias >= 0.0)) throw Error("nominal_bias must be non-negative");
  if (!std::isfinite(k_fa)) throw Error("k_fa must be finite");
}

double IntegrityConfig::k_fa_effective(int n_fault_modes) const {
  if (k_fa > 0.0) return k_fa;
  const int n = std::max(1, n_fault_modes);
  // Even split over modes and the two horizontal axes, two-sided per test.
  return q_tail_inverse(continuity_budget / (4.0 * n));
}

void GeometryContext::validate() const {
  const int n = n_rows();
  if (geometry.cols() != n_states()) throw Error("geometry column count mismatch");
  if (weights.size() != n || static_cast<int>(constellation.size()) != n) {
    throw Error("geometry row count mismatch");
  }
  if (n < n_states()) throw Error("fewer measurements than states");
  for (int i = 0; i < n; ++i) {
    if (!(weights(i) > 0.0)) throw Error("weights must be positive");
    if (constellation[i] < 0 || constellation[i] >= n_constellations) {
      throw Error("constellation index out of range");
    }
  }
}

long double q_tail_ld(long double x) {
  return 0.5L * std::erfc(x / 1.41421356237309504880168872420969808L);
}

double q_tail(double x) { return static_cast<double>(q_tail_ld(x)); }

double q_tail_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("q_tail_inverse needs p in (0, 1)");
  double lo = -45.0, hi = 45.0;  // Q is decreasing: Q(lo) ~ 1, Q(hi) ~ 0
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (q_tail_ld(mid) > static_cast<long double>(p)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(q_tail_ld(lo) - static_cast<long double>(p)) <=
                 std::abs(q_tail_ld(hi) - static_cast<long double>(p))
             ? lo
             : hi;
}

FaultModeSet enumerate_fault_modes(const std::vector<int>& constellation,
                                   const IntegrityConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(constellation.size());
  std::set<int> const_ids(constellation.begin(), constellation.end());
  const int c = static_cast<int>(const_ids.size());
  std::vector<int> consts(const_ids.begin(), const_ids.end());

  // Fault multiplicity caps: grow until the unenumerated tail drops below
  // the floor, separately for satellite and constellation faults.
  int r_sat = 1;
  while (r_sat < n && binomial_tail(n, cfg.p_sat_fault, r_sat) >= cfg.mode_probability_floor) {
    ++r_sat;
  }
  int r_const = 1;
  while (r_const < c &&
         binomial_tail(c, cfg.p_const_fault, r_const) >= cfg.mode_probability_floor) {
    ++r_const;
  }

  FaultModeSet out;
  FaultMode empty;
  empty.index = 0;
  empty.p_fault = std::pow(1.0 - cfg.p_sat_fault, n) * std::pow(1.0 - cfg.p_const_fault, c);
  out.modes.push_back(empty);

  double leftover = 0.0;
  for (int s = 0; s <= r_sat; ++s) {
    for (int cc = 0; cc <= r_const; ++cc) {
      if (s + cc == 0) continue;
      const double p = std::pow(cfg.p_sat_fault, s) * std::pow(cfg.p_const_fault, cc);
      std::vector<std::vector<int>> sat_choices;
      combinations(n, s, [&](const std::vector<int>& pick) { sat_choices.push_back(pick); });
      std::vector<std::vector<int>> const_choices;
      combinations(c, cc, [&](const std::vector<int>& pick) { const_choices.push_back(pick); });

      for (const auto& sats : sat_choices) {
        for (const auto& cs : const_choices) {
          if (s + cc >= 2 && p < cfg.mode_probability_floor) {
            leftover += p;
            continue;
          }
          std::set<int> rows(sats.begin(), sats.end());
          for (int pick : cs) {
            for (int i = 0; i < n; ++i) {
              if (constellation[i] == consts[pick]) rows.insert(i);
            }
          }
          FaultMode m;
          m.index = static_cast<int>(out.modes.size());
          m.excluded.assign(rows.begin(), rows.end());
          m.p_fault = p;
          m.feasible = n - static_cast<int>(m.excluded.size()) >= 3 + 1;
          out.modes.push_back(std::move(m));
        }
      }
    }
  }

  out.p_not_monitored = cfg.p_sat_not_monitored + cfg.p_const_not_monitored +
                        binomial_tail(n, cfg.p_sat_fault, r_sat) +
                        binomial_tail(c, cfg.p_const_fault, r_const) + leftover;
  return out;
}

GeometryContext build_geometry(const std::vector<Vec3>& sat_positions,
                               const std::vector<int>& constellation, const VectorXd& sigmas,
                               const Vec3& linearization_point) {
  const int n = static_cast<int>(sat_positions.size());
  if (static_cast<int>(constellation.size()) != n || sigmas.size() != n) {
    throw Error("measurement array sizes differ");
  }
  if (n == 0) throw Error("no measurements");
  int c = 0;
  for (int id : constellation) {
    if (id < 0) throw Error("constellation index must be non-negative");
    c = std::max(c, id + 1);
  }

  GeometryContext ctx;
  ctx.n_constellations = c;
  ctx.constellation = constellation;
  ctx.geometry.resize(n, 3 + c);
  ctx.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!(sigmas(i) > 0.0)) throw Error("sigma must be positive");
    const Vec3 d = sat_positions[i] - linearization_point;
    const double r = d.norm();
    if (r < 1.0) throw Error("satellite coincides with receiver");
    ctx.geometry.row(i).setZero();
    ctx.geometry.block<1, 3>(i, 0) = -(d / r).transpose();
    ctx.geometry(i, 3 + constellation[i]) = 1.0;
    ctx.weights(i) = 1.0 / (sigmas(i) * sigmas(i));
  }
  ctx.validate();
  return ctx;
}

WlsSolution wls_solve(const std::vector<Vec3>& sat_positions,
                      const std::vector<int>& constellation, const VectorXd& sigmas,
                      const VectorXd& pseudoranges, VectorXd x0) {
  const int n = static_cast<int>(sat_positions.size());
  if (pseudoranges.size() != n) throw Error("measurement array sizes differ");
  GeometryContext probe = build_geometry(sat_positions, constellation, sigmas, Vec3::Zero());
  const int dim = probe.n_states();
  if (x0.size() == 0) x0 = VectorXd::Zero(dim);
  if (x0.size() != dim) throw Error("initial state has wrong dimension");

  VectorXd x = x0;
  WlsSolution sol;
  double prev_step = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 20; ++iter) {
    const Vec3 p = x.head<3>();
    GeometryContext ctx = build_geometry(sat_positions, constellation, sigmas, p);
    VectorXd dr(n);
    for (int i = 0; i < n; ++i) {
      const double pred = (sat_positions[i] - p).norm() + x(3 + constellation[i]);
      dr(i) = pseudoranges(i) - pred;
    }
    const MatrixXd wg = ctx.weights.asDiagonal() * ctx.geometry;
    const MatrixXd normal = ctx.geometry.transpose() * wg;
    Eigen::LDLT<MatrixXd> ldlt(normal);
    // rcond() alone misses structured rank deficiencies (it can report 1.0
    // for a rank-1 normal matrix), so also demand well-scaled pivots.
    const VectorXd piv = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < kRcondFloor ||
        !(piv.maxCoeff() > 0.0) || piv.minCoeff() < kRcondFloor * piv.maxCoeff()) {
      throw Error("degenerate geometry");
    }
    const VectorXd dx = ldlt.solve(ctx.geometry.transpose() * (ctx.weights.asDiagonal() * dr));
    x += dx;
    sol.iterations = iter + 1;
    // Range computations at 2.6e7 m round near 1e-8 m, so a tighter step
    // demand never terminates; 1e-7 m still leaves sub-micrometre solutions.
    // Poorly conditioned but solvable geometries have a larger rounding floor
    // and cycle there instead of contracting; once the step stops shrinking
    // while already at millimetre scale, the iterate is as good as it gets.
    const double step = dx.norm();
    const bool stalled = step < 1e-3 && step >= 0.5 * prev_step;
    prev_step = step;
    if (step < 1e-7 || stalled) {
      const Vec3 pf = x.head<3>();
      sol.geometry = build_geometry(sat_positions, constellation, sigmas, pf);
      const MatrixXd nf =
          sol.geometry.geometry.transpose() * sol.geometry.weights.asDiagonal() *
          sol.geometry.geometry;
      sol.covariance = nf.inverse();
      sol.state = x;
      sol.residuals.resize(n);
      for (int i = 0; i < n; ++i) {
        sol.residuals(i) =
            pseudoranges(i) - ((sat_positions[i] - pf).norm() + x(3 + constellation[i]));
      }
      return sol;
    }
  }
  throw Error("least-squares iteration did not converge");
}

std::vector<SubsetSolution> subset_solutions(const WlsSolution& all_in_view,
                                             const FaultModeSet& modes,
                                             const IntegrityConfig& cfg) {
  cfg.validate();
  const GeometryContext& ctx = all_in_view.geometry;
  const int n = ctx.n_rows();
  const int c = ctx.n_constellations;
  const MatrixXd& g = ctx.geometry;
  const MatrixXd p0 = all_in_view.covariance;

  std::vector<SubsetSolution> out;
  out.reserve(modes.modes.size());
  for (const FaultMode& mode : modes.modes) {
    SubsetSolution s;
    s.mode = mode;

    VectorXd wk = ctx.weights;
    for (int row : mode.excluded) {
      if (row < 0 || row >= n) throw Error("fault mode row out of range");
      wk(row) = 0.0;
    }

    std::vector<int> live_rows_per_const(c, 0);
    int remaining = 0;
    for (int i = 0; i < n; ++i) {
      if (wk(i) > 0.0) {
        ++remaining;
        ++live_rows_per_const[ctx.constellation[i]];
      }
    }
    std::vector<int> live_cols = {0, 1, 2};
    int live_consts = 0;
    for (int cc = 0; cc < c; ++cc) {
      if (live_rows_per_const[cc] > 0) {
        live_cols.push_back(3 + cc);
        ++live_consts;
      }
    }
    const int m = static_cast<int>(live_cols.size());

    s.mode.feasible = remaining >= 3 + live_consts && live_consts >= 1;
    if (s.mode.feasible) {
      MatrixXd gr(n, m);
      for (int j = 0; j < m; ++j) gr.col(j) = g.col(live_cols[j]);
      const MatrixXd normal = gr.transpose() * wk.asDiagonal() * gr;
      Eigen::LDLT<MatrixXd> ldlt(normal);
      if (ldlt.info() != Eigen::Success || ldlt.rcond() < kRcondFloor) {
        s.mode.feasible = false;
      } else {
        const MatrixXd pk = normal.inverse();
        const MatrixXd sk = pk * gr.transpose() * wk.asDiagonal();  // m x n

        // One-shot solve at the all-in-view linearization point.
        const VectorXd delta = sk * all_in_view.residuals;
        s.state = VectorXd::Constant(3 + c, std::numeric_limits<double>::quiet_NaN());
        for (int j = 0; j < m; ++j) {
          s.state(live_cols[j]) = all_in_view.state(live_cols[j]) + delta(j);
        }
        for (int q = 0; q < 2; ++q) {
          s.sigma_q[q] = std::sqrt(pk(q, q));
          s.bias_q[q] = cfg.nominal_bias * sk.row(q).cwiseAbs().sum();
          s.separation_sigma_q[q] = std::sqrt(std::max(0.0, pk(q, q) - p0(q, q)));
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

FdeOutcome solution_separation_test(const std::vector<SubsetSolution>& solutions, double k_fa) {
  if (solutions.empty() || !solutions.front().mode.feasible) {
    throw Error("missing all-in-view solution");
  }
  const SubsetSolution& s0 = solutions.front();
  const int n_modes = static_cast<int>(solutions.size());

  FdeOutcome out;
  out.passed = true;
  out.separations = MatrixXd::Zero(n_modes, 2);
  out.thresholds = MatrixXd::Zero(n_modes, 2);
  for (int k = 1; k < n_modes; ++k) {
    const SubsetSolution& sk = solutions[k];
    if (!sk.mode.feasible) continue;
    for (int q = 0; q < 2; ++q) {
      out.separations(k, q) = std::abs(s0.state(q) - sk.state(q));
      out.thresholds(k, q) = k_fa * sk.separation_sigma_q[q] + kThresholdSlack;
      if (out.separations(k, q) > out.thresholds(k, q)) {
        out.passed = false;
        if (out.detail.empty()) {
          out.detail = "separation exceeds threshold in mode " + std::to_string(k);
        }
      }
    }
  }
  return out;
}

namespace {

struct PipelineRun {
  WlsSolution aiv;
  FaultModeSet modes;
  std::vector<SubsetSolution> solutions;
  FdeOutcome outcome;
  double k_fa = 0.0;
};

PipelineRun run_pipeline(const std::vector<Vec3>& sats, const std::vector<int>& consts,
                         const VectorXd& sigmas, const VectorXd& rho,
                         const IntegrityConfig& cfg) {
  PipelineRun r;
  r.aiv = wls_solve(sats, consts, sigmas, rho);
  r.modes = enumerate_fault_modes(consts, cfg);
  r.solutions = subset_solutions(r.aiv, r.modes, cfg);
  int n_fault_modes = 0;
  for (const auto& s : r.solutions) {
    if (s.mode.index > 0 && s.mode.feasible) ++n_fault_modes;
  }
  r.k_fa = cfg.k_fa_effective(n_fault_modes);
  r.outcome = solution_separation_test(r.solutions, r.k_fa);
  return r;
}

int distinct_constellations(const std::vector<int>& consts) {
  return static_cast<int>(std::set<int>(consts.begin(), consts.end()).size());
}

struct ExclusionSearch {
  const std::vector<Vec3>& sats;
  const std::vector<int>& consts;
  const VectorXd& sigmas;
  const VectorXd& rho;
  const IntegrityConfig& cfg;

  // Compact constellation ids so whole-constellation removals do not leave
  // dead clock states in the reduced solve.
  bool attempt(const std::vector<int>& active, std::vector<int> excluded_so_far,
               double threshold_acc[2], double p_acc, int depth, FdeResult& out) const {
    std::vector<Vec3> s;
    std::vector<int> c_raw;
    VectorXd sg(active.size()), r(active.size());
    for (size_t i = 0; i < active.size(); ++i) {
      s.push_back(sats[active[i]]);
      c_raw.push_back(consts[active[i]]);
      sg(i) = sigmas(active[i]);
      r(i) = rho(active[i]);
    }
    std::set<int> ids(c_raw.begin(), c_raw.end());
    std::vector<int> id_list(ids.begin(), ids.end());
    std::vector<int> c(c_raw.size());
    for (size_t i = 0; i < c_raw.size(); ++i) {
      c[i] = static_cast<int>(std::lower_bound(id_list.begin(), id_list.end(), c_raw[i]) -
                              id_list.begin());
    }

    PipelineRun run = run_pipeline(s, c, sg, r, cfg);
    if (run.outcome.passed) {
      out.outcome = run.outcome;
      out.outcome.excluded = excluded_so_far;
      std::sort(out.outcome.excluded.begin(), out.outcome.excluded.end());
      out.solution = std::move(run.aiv);
      out.solutions = std::move(run.solutions);
      out.modes = std::move(run.modes);
      out.k_fa = run.k_fa;
      out.exclusion_threshold_q[0] = threshold_acc[0];
      out.exclusion_threshold_q[1] = threshold_acc[1];
      out.p_excluded = p_acc;
      return true;
    }
    const int n = static_cast<int>(active.size());
    const int cc = distinct_constellations(c);
    if (n < 3 + cc + 2 || depth >= 6) {
      if (out.outcome.detail.empty()) {
        out.outcome = run.outcome;
        out.outcome.detail = "FDE failure: " +
                             (n < 3 + cc + 2 ? std::string("too few measurements to exclude")
                                             : std::string("exclusion search exhausted"));
      }
      return false;
    }

    // Candidates ranked by how hard their mode fails the separation test.
    struct Candidate {
      double ratio;
      int mode_index;
    };
    std::vector<Candidate> cands;
    for (size_t k = 1; k < run.solutions.size(); ++k) {
      const auto& sol = run.solutions[k];
      if (!sol.mode.feasible) continue;
      double ratio = 0.0;
      for (int q = 0; q < 2; ++q) {
        if (run.outcome.thresholds(k, q) > 0.0) {
          ratio = std::max(ratio, run.outcome.separations(k, q) / run.outcome.thresholds(k, q));
        }
      }
      cands.push_back({ratio, static_cast<int>(k)});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.ratio > b.ratio; });

    for (const Candidate& cand : cands) {
      const FaultMode& mode = run.modes.modes[cand.mode_index];
      std::vector<int> next_active;
      std::vector<int> newly_excluded;
      std::set<int> drop(mode.excluded.begin(), mode.excluded.end());
      for (int i = 0; i < n; ++i) {
        if (drop.count(i)) {
          newly_excluded.push_back(active[i]);
        } else {
          next_active.push_back(active[i]);
        }
      }
      std::vector<int> next_consts;
      for (int idx : next_active) next_consts.push_back(consts[idx]);
      const int c_next = distinct_constellations(next_consts);
      if (static_cast<int>(next_active.size()) < 3 + c_next + 1) continue;

      std::vector<int> excluded_next = excluded_so_far;
      excluded_next.insert(excluded_next.end(), newly_excluded.begin(), newly_excluded.end());
      double thr_next[2] = {threshold_acc[0] + run.outcome.thresholds(cand.mode_index, 0),
                            threshold_acc[1] + run.outcome.thresholds(cand.mode_index, 1)};
      if (attempt(next_active, excluded_next, thr_next, p_acc + mode.p_fault, depth + 1, out)) {
        return true;
      }
    }
    if (out.outcome.detail.empty()) {
      out.outcome = run.outcome;
      out.outcome.detail = "FDE failure: no consistent subset found";
    }
    return false;
  }
};

}  // namespace

FdeResult fde(const std::vector<Vec3>& sat_positions, const std::vector<int>& constellation,
              const VectorXd& sigmas, const VectorXd& pseudoranges,
              const IntegrityConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(sat_positions.size());
  const int c = distinct_constellations(constellation);
  if (n < 3 + c + 1) throw Error("too few measurements for fault detection");

  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);

  FdeResult out;
  double thr0[2] = {0.0, 0.0};
  ExclusionSearch search{sat_positions, constellation, sigmas, pseudoranges, cfg};
  if (!search.attempt(active, {}, thr0, 0.0, 0, out)) {
    out.outcome.passed = false;
    if (out.outcome.detail.empty()) out.outcome.detail = "FDE failure";
  }
  return out;
}

long double HplEquation::lhs(double h) const {
  long double acc = 0.0L;
  for (const Term& t : terms) {
    acc += static_cast<long double>(t.p) *
           q_tail_ld((static_cast<long double>(h) - t.offset) / t.sigma);
  }
  return acc;
}

HplEquation build_hpl_equation(const std::vector<SubsetSolution>& solutions,
                               const IntegrityConfig& cfg, double k_fa, int axis,
                               double p_not_monitored_base, const ExclusionContext* exclusion) {
  if (axis < 0 || axis > 1) throw Error("axis must be 0 or 1");
  if (solutions.empty() || !solutions.front().mode.feasible) {
    throw Error("missing all-in-view solution");
  }

  double p_nm = p_not_monitored_base;
  for (const auto& s : solutions) {
    if (s.mode.index > 0 && !s.mode.feasible) p_nm += s.mode.p_fault;
  }

  HplEquation eq;
  eq.rhs = 0.5 * cfg.phmi_hor * (1.0 - p_nm / (cfg.phmi_vert + cfg.phmi_hor));

  const double renorm =
      exclusion != nullptr && exclusion->p_excluded > 0.0 && exclusion->p_excluded < 1.0
          ? 1.0 / (1.0 - exclusion->p_excluded)
          : 1.0;

  const SubsetSolution& s0 = solutions.front();
  eq.terms.push_back({2.0, s0.bias_q[axis], s0.sigma_q[axis]});
  for (const auto& s : solutions) {
    if (s.mode.index == 0 || !s.mode.feasible) continue;
    eq.terms.push_back({s.mode.p_fault * renorm,
                        k_fa * s.separation_sigma_q[axis] + s.bias_q[axis], s.sigma_q[axis]});
  }
  if (exclusion != nullptr && exclusion->p_excluded > 0.0) {
    // Wrong-exclusion contribution: the chance that exclusion removed a
    // healthy set while a real fault slipped past its detection threshold,
    // referenced to the reduced-set all-in-view statistics.
    eq.terms.push_back({exclusion->p_excluded,
                        exclusion->threshold_q[axis] + s0.bias_q[axis], s0.sigma_q[axis]});
  }
  return eq;
}

HplResult compute_hpl(const std::vector<SubsetSolution>& solutions, const FaultModeSet& modes,
                      const IntegrityConfig& cfg, double k_fa,
                      const ExclusionContext* exclusion) {
  cfg.validate();
  HplResult out;

  for (int axis = 0; axis < 2; ++axis) {
    const HplEquation eq =
        build_hpl_equation(solutions, cfg, k_fa, axis, modes.p_not_monitored, exclusion);
    if (!(eq.rhs > 0.0)) return out;  // budget exhausted by unmonitored faults

    double lo = 0.0, hi = 1e4;
    const long double rhs = eq.rhs;
    if (eq.lhs(lo) < rhs) {
      out.hpl_axis[axis] = 0.0;
      continue;
    }
    if (eq.lhs(hi) >= rhs) return out;  // no root inside the bracket

    // The left side is strictly decreasing, so bisection is safe; run it to
    // the floating-point fixed point (adjacent doubles), which more than
    // satisfies hpl_tolerance and keeps the plug-back residual at rounding
    // level.
    while (true) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (eq.lhs(mid) >= rhs) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const long double rlo = std::abs(eq.lhs(lo) - rhs);
    const long double rhi = std::abs(eq.lhs(hi) - rhs);
    out.hpl_axis[axis] = rlo <= rhi ? lo : hi;
  }

  out.hpl = cfg.rss_combination
                ? std::hypot(out.hpl_axis[0], out.hpl_axis[1])
                : std::max(out.hpl_axis[0], out.hpl_axis[1]);
  out.available = std::isfinite(out.hpl);
  return out;
}

}  // namespace relnav::araim
