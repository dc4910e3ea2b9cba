#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <doctest.h>

#include "relnav/araim.hpp"
#include "relnav/constants.hpp"
#include "relnav/error.hpp"

using namespace relnav;
using araim::FaultModeSet;
using araim::GeometryContext;
using araim::IntegrityConfig;
using araim::SubsetSolution;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using orbits::Vec3;

namespace {

// Gaussian tail by Taylor-series erf near zero and the Laplace continued
// fraction in the tail; shares nothing with the library's erfc route.
long double q_oracle(long double x) {
  const long double pi = std::numbers::pi_v<long double>;
  if (x < 0.0L) return 1.0L - q_oracle(-x);
  if (x <= 3.0L) {
    const long double z = x / sqrtl(2.0L);
    long double term = z, sum = z;
    for (int n = 1; n < 300; ++n) {
      term *= -z * z / n;
      const long double add = term / (2 * n + 1);
      sum += add;
      if (fabsl(add) < 1e-24L * fabsl(sum)) break;
    }
    return 0.5L - sum / sqrtl(pi);
  }
  long double cf = 0.0L;
  for (int k = 80; k >= 1; --k) cf = k / (x + cf);
  return expl(-x * x / 2.0L) / sqrtl(2.0L * pi) / (x + cf);
}

Vec3 dir_from(double az_deg, double el_deg) {
  const double az = deg2rad(az_deg), el = deg2rad(el_deg);
  return {std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};
}

struct Fixture {
  std::vector<Vec3> sats;
  std::vector<int> consts;
  VectorXd sigmas;
  VectorXd rho;  // noiseless truth ranges + clock
  Vec3 truth;
  std::vector<double> clocks;
};

Fixture make_fixture(const std::vector<std::pair<double, double>>& azel,
                     const std::vector<int>& consts, double range = 2.2e7) {
  Fixture f;
  f.truth = {850.0, -1200.0, 40.0};
  f.consts = consts;
  int c = 0;
  for (int id : consts) c = std::max(c, id + 1);
  f.clocks.assign(c, 0.0);
  for (int i = 0; i < c; ++i) f.clocks[i] = 5.0 - 8.0 * i;
  f.sigmas.resize(static_cast<int>(azel.size()));
  f.rho.resize(static_cast<int>(azel.size()));
  for (size_t i = 0; i < azel.size(); ++i) {
    f.sats.push_back(f.truth + range * dir_from(azel[i].first, azel[i].second));
    f.sigmas(static_cast<int>(i)) = 0.8 + 0.1 * static_cast<double>(i % 4);
    f.rho(static_cast<int>(i)) = (f.sats[i] - f.truth).norm() + f.clocks[consts[i]];
  }
  return f;
}

Fixture ten_sat_fixture() {
  return make_fixture({{0, 70}, {40, 30}, {100, 25}, {160, 40}, {220, 35}, {280, 30}, {340, 50},
                       {60, 55}, {180, 60}, {300, 45}},
                      {0, 0, 0, 0, 0, 0, 0, 1, 1, 1});
}

// Four satellites per constellation: every constellation-out hypothesis still
// solves, so none of its prior lands in the unmonitored mass and protection
// levels stay finite.
Fixture balanced_ten_fixture() {
  return make_fixture({{0, 70}, {40, 30}, {100, 25}, {160, 40}, {220, 35}, {280, 30}, {340, 50},
                       {60, 55}, {180, 60}, {300, 45}},
                      {0, 0, 0, 0, 0, 0, 1, 1, 1, 1});
}

double comb(int n, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return v;
}

double binom_exceedance(int n, double p, int r) {
  double tail = 0.0;
  for (int j = r + 1; j <= n; ++j) {
    tail += comb(n, j) * std::pow(p, j) * std::pow(1.0 - p, n - j);
  }
  return tail;
}

}  // namespace

TEST_CASE("gaussian tail agrees with series and continued-fraction expansions") {
  for (double x = -8.0; x <= 8.0; x += 0.173) {
    const double want = static_cast<double>(q_oracle(x));
    CHECK(araim::q_tail(x) == doctest::Approx(want).epsilon(5e-14).scale(0.0));
  }
  for (double x : {10.0, 15.0, 20.0, 25.0, 30.0, 35.0}) {
    CHECK(araim::q_tail(x) ==
          doctest::Approx(static_cast<double>(q_oracle(x))).epsilon(1e-12).scale(0.0));
  }
  CHECK(araim::q_tail(0.0) == doctest::Approx(0.5).epsilon(1e-15));

  // Far past double underflow the long double variant still carries the tail.
  const long double q40 = araim::q_tail_ld(40.0L);
  CHECK(q40 > 0.0L);
  const long double want_log =
      -800.0L - logl(40.0L * sqrtl(2.0L * std::numbers::pi_v<long double>)) +
      logl(1.0L - 1.0L / 1600.0L + 3.0L / (1600.0L * 1600.0L));
  CHECK(static_cast<double>(logl(q40)) == doctest::Approx(static_cast<double>(want_log)).epsilon(1e-8));
}

TEST_CASE("tail inverse returns the fixed point of the forward map") {
  for (double p : {1e-12, 1e-9, 2.5e-8, 1e-6, 1e-3, 0.025, 0.5, 0.9}) {
    const double x = araim::q_tail_inverse(p);
    CHECK(araim::q_tail(x) == doctest::Approx(p).epsilon(1e-12).scale(0.0));
  }
  CHECK(araim::q_tail_inverse(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // Q(2) is a textbook value.
  CHECK(araim::q_tail_inverse(0.02275013194817921) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(araim::q_tail_inverse(1e-9) > araim::q_tail_inverse(1e-6));
  CHECK_THROWS_AS(araim::q_tail_inverse(0.0), Error);
  CHECK_THROWS_AS(araim::q_tail_inverse(1.0), Error);
}

TEST_CASE("weighted least squares recovers a noiseless state exactly") {
  const Fixture f = ten_sat_fixture();
  const auto sol = araim::wls_solve(f.sats, f.consts, f.sigmas, f.rho);
  CHECK((sol.state.head<3>() - f.truth).norm() < 1e-6);
  CHECK(sol.state(3) == doctest::Approx(f.clocks[0]).epsilon(1e-9));
  CHECK(sol.state(4) == doctest::Approx(f.clocks[1]).epsilon(1e-9));
  CHECK(sol.residuals.cwiseAbs().maxCoeff() < 1e-6);

  // Covariance is the inverse weighted normal matrix at the solution.
  const MatrixXd& g = sol.geometry.geometry;
  const MatrixXd normal = g.transpose() * sol.geometry.weights.asDiagonal() * g;
  CHECK((sol.covariance * normal - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("a common-mode range shift lands in the clock states only") {
  // Short ranges keep the 10 m offset far above the range rounding floor.
  Fixture f = make_fixture({{0, 60}, {50, 35}, {110, 28}, {170, 45}, {230, 30},
                            {290, 40}, {20, 75}, {140, 55}},
                           {0, 0, 0, 0, 1, 1, 1, 1}, 1.0e6);
  const auto base = araim::wls_solve(f.sats, f.consts, f.sigmas, f.rho);
  const VectorXd shifted = f.rho.array() + 10.0;
  const auto moved = araim::wls_solve(f.sats, f.consts, f.sigmas, shifted);
  CHECK((moved.state.head<3>() - base.state.head<3>()).norm() < 1e-9);
  CHECK(moved.state(3) - base.state(3) == doctest::Approx(10.0).epsilon(1e-10));
  CHECK(moved.state(4) - base.state(4) == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("degenerate and undersized geometries are rejected") {
  // All satellites in one direction: rank-deficient normal matrix.
  std::vector<Vec3> sats;
  std::vector<int> consts;
  for (int i = 0; i < 6; ++i) {
    sats.push_back(Vec3{0.0, 0.0, 2.0e7 + 1.0e5 * i});
    consts.push_back(0);
  }
  const VectorXd sg = VectorXd::Ones(6);
  const VectorXd rho = VectorXd::Zero(6);
  CHECK_THROWS_AS(araim::wls_solve(sats, consts, sg, rho), Error);

  const Fixture f = ten_sat_fixture();
  std::vector<Vec3> three(f.sats.begin(), f.sats.begin() + 3);
  CHECK_THROWS_AS(araim::build_geometry(three, {0, 0, 0}, VectorXd::Ones(3), Vec3::Zero())
                      .validate(),
                  Error);
}

TEST_CASE("fault mode enumeration matches the hand-computed catalog") {
  const std::vector<int> consts{0, 0, 0, 0, 0, 0, 0, 1, 1, 1};  // 7 + 3
  IntegrityConfig cfg;
  const FaultModeSet set = araim::enumerate_fault_modes(consts, cfg);

  // 1 fault-free + 10 single-satellite + 2 single-constellation + the
  // dual-constellation mode that still clears the probability floor.
  REQUIRE(set.modes.size() == 14);
  CHECK(set.modes[0].excluded.empty());
  CHECK(set.modes[0].p_fault ==
        doctest::Approx(std::pow(1.0 - cfg.p_sat_fault, 10) *
                        std::pow(1.0 - cfg.p_const_fault, 2))
            .epsilon(1e-12));

  int singles = 0, consts_modes = 0, duals = 0, infeasible = 0;
  std::set<std::vector<int>> seen;
  for (size_t k = 1; k < set.modes.size(); ++k) {
    const auto& m = set.modes[k];
    seen.insert(m.excluded);
    if (m.excluded.size() == 1) {
      ++singles;
      CHECK(m.p_fault == doctest::Approx(cfg.p_sat_fault).epsilon(1e-12).scale(0.0));
      CHECK(m.feasible);
    } else if (m.excluded.size() == 10) {
      ++duals;
      CHECK(m.p_fault ==
            doctest::Approx(cfg.p_const_fault * cfg.p_const_fault).epsilon(1e-12).scale(0.0));
      CHECK_FALSE(m.feasible);
    } else {
      ++consts_modes;
      CHECK(m.p_fault == doctest::Approx(cfg.p_const_fault).epsilon(1e-12).scale(0.0));
      // Dropping all 7 of the first constellation leaves 3 ranges: unsolvable.
      CHECK(m.feasible == (m.excluded.size() == 3));
    }
    if (!m.feasible) ++infeasible;
  }
  CHECK(singles == 10);
  CHECK(consts_modes == 2);
  CHECK(duals == 1);
  CHECK(infeasible == 2);
  CHECK(seen.size() == 13);  // all subsets distinct
  CHECK(seen.count({0, 1, 2, 3, 4, 5, 6}) == 1);
  CHECK(seen.count({7, 8, 9}) == 1);

  // Unmonitored mass: config residuals plus both truncation tails plus the
  // skipped mixed modes (20 sat+const pairs, 10 sat+dual-const triples).
  const double leftover = 20.0 * cfg.p_sat_fault * cfg.p_const_fault +
                          10.0 * cfg.p_sat_fault * cfg.p_const_fault * cfg.p_const_fault;
  const double want_nm = cfg.p_sat_not_monitored + cfg.p_const_not_monitored +
                         binom_exceedance(10, cfg.p_sat_fault, 1) +
                         binom_exceedance(2, cfg.p_const_fault, 2) + leftover;
  CHECK(set.p_not_monitored == doctest::Approx(want_nm).epsilon(1e-9).scale(0.0));

  // Priors plus unmonitored mass cover the whole event space (to overbounding).
  double total = set.p_not_monitored - cfg.p_sat_not_monitored - cfg.p_const_not_monitored;
  for (const auto& m : set.modes) total += m.p_fault;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("subset solution separation sigma satisfies the covariance identity") {
  const Fixture f = ten_sat_fixture();
  IntegrityConfig cfg;
  const auto aiv = araim::wls_solve(f.sats, f.consts, f.sigmas, f.rho);
  const auto modes = araim::enumerate_fault_modes(f.consts, cfg);
  const auto subs = araim::subset_solutions(aiv, modes, cfg);
  REQUIRE(subs.size() == modes.modes.size());

  const MatrixXd& g = aiv.geometry.geometry;
  const VectorXd& w = aiv.geometry.weights;
  const int n = aiv.geometry.n_rows();
  const MatrixXd p0 = (g.transpose() * w.asDiagonal() * g).inverse();
  const MatrixXd s0 = p0 * g.transpose() * w.asDiagonal();  // 5 x n

  int verified = 0;
  for (const auto& s : subs) {
    if (s.mode.index == 0 || !s.mode.feasible) continue;

    // Rebuild this subset's projector from scratch.
    VectorXd wk = w;
    for (int row : s.mode.excluded) wk(row) = 0.0;
    std::vector<int> cols = {0, 1, 2};
    for (int cc = 0; cc < aiv.geometry.n_constellations; ++cc) {
      bool live = false;
      for (int i = 0; i < n; ++i) {
        if (wk(i) > 0.0 && aiv.geometry.constellation[i] == cc) live = true;
      }
      if (live) cols.push_back(3 + cc);
    }
    MatrixXd gr(n, static_cast<int>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) gr.col(static_cast<int>(j)) = g.col(cols[j]);
    const MatrixXd pk = (gr.transpose() * wk.asDiagonal() * gr).inverse();
    const MatrixXd sk = pk * gr.transpose() * wk.asDiagonal();

    for (int q = 0; q < 2; ++q) {
      // Var(x_k - x_0) over the measurement noise, with W^-1 = diag(sigma^2).
      double var = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = sk(q, i) - s0(q, i);
        var += d * d / w(i);
      }
      CHECK(s.separation_sigma_q[q] * s.separation_sigma_q[q] ==
            doctest::Approx(var).epsilon(1e-9));
      CHECK(s.sigma_q[q] == doctest::Approx(std::sqrt(pk(q, q))).epsilon(1e-10));
      CHECK(s.bias_q[q] ==
            doctest::Approx(cfg.nominal_bias * sk.row(q).cwiseAbs().sum()).epsilon(1e-10));
      // The separation variance equals the covariance growth, the identity
      // the threshold construction rests on.
      CHECK(var == doctest::Approx(pk(q, q) - p0(q, q)).epsilon(1e-6).scale(1.0));
    }
    ++verified;
  }
  CHECK(verified == 11);  // 10 single-sat + the solvable constellation drop
}

TEST_CASE("clean measurements pass the separation test with no exclusion") {
  const Fixture f = ten_sat_fixture();
  IntegrityConfig cfg;
  const auto res = araim::fde(f.sats, f.consts, f.sigmas, f.rho, cfg);
  CHECK(res.outcome.passed);
  CHECK(res.outcome.excluded.empty());
  CHECK(res.p_excluded == 0.0);
  CHECK((res.solution.state.head<3>() - f.truth).norm() < 1e-6);
}

TEST_CASE("a single large fault is detected and excluded") {
  Fixture f = make_fixture({{0, 60}, {45, 30}, {90, 45}, {135, 25}, {180, 55}, {225, 35},
                            {270, 40}, {315, 28}, {20, 75}},
                           {0, 0, 0, 0, 0, 0, 0, 0, 0});
  f.rho(3) += 100.0;
  IntegrityConfig cfg;
  const auto res = araim::fde(f.sats, f.consts, f.sigmas, f.rho, cfg);
  REQUIRE(res.outcome.passed);
  CHECK(res.outcome.excluded == std::vector<int>{3});
  CHECK((res.solution.state.head<3>() - f.truth).norm() < 1e-6);
  CHECK(res.p_excluded == doctest::Approx(cfg.p_sat_fault).epsilon(1e-12).scale(0.0));
  CHECK(res.exclusion_threshold_q[0] > 0.0);
  CHECK(res.exclusion_threshold_q[1] > 0.0);
}

TEST_CASE("two faults across constellations are both excluded") {
  Fixture f = make_fixture({{0, 60}, {45, 30}, {90, 45}, {135, 25}, {180, 55}, {225, 35},
                            {270, 40}, {315, 28}, {60, 55}, {150, 40}, {250, 45}, {330, 65}},
                           {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1});
  f.rho(2) += 80.0;
  f.rho(9) += 120.0;
  IntegrityConfig cfg;
  const auto res = araim::fde(f.sats, f.consts, f.sigmas, f.rho, cfg);
  REQUIRE(res.outcome.passed);
  CHECK(res.outcome.excluded == std::vector<int>{2, 9});
  CHECK((res.solution.state.head<3>() - f.truth).norm() < 1e-6);
}

TEST_CASE("exclusion is refused at the measurement minimum") {
  // Five ranges and one constellation: detection can run, exclusion cannot.
  Fixture f = make_fixture({{0, 60}, {72, 35}, {144, 45}, {216, 30}, {288, 50}},
                           {0, 0, 0, 0, 0});
  f.rho(1) += 100.0;
  IntegrityConfig cfg;
  const auto res = araim::fde(f.sats, f.consts, f.sigmas, f.rho, cfg);
  CHECK_FALSE(res.outcome.passed);
  CHECK(res.outcome.excluded.empty());
  CHECK(res.outcome.detail.find("too few measurements to exclude") != std::string::npos);

  // One fewer and even detection is off the table.
  Fixture g = make_fixture({{0, 60}, {90, 35}, {180, 45}, {270, 30}}, {0, 0, 0, 0});
  CHECK_THROWS_AS(araim::fde(g.sats, g.consts, g.sigmas, g.rho, cfg), Error);
}

TEST_CASE("protection level solves its defining equation to rounding level") {
  const Fixture f = balanced_ten_fixture();
  IntegrityConfig cfg;
  const auto res = araim::fde(f.sats, f.consts, f.sigmas, f.rho, cfg);
  REQUIRE(res.outcome.passed);
  int feasible = 0;
  for (const auto& s : res.solutions) {
    if (s.mode.index > 0 && s.mode.feasible) ++feasible;
  }
  const double k_fa = cfg.k_fa_effective(feasible);
  CHECK(k_fa == doctest::Approx(araim::q_tail_inverse(cfg.continuity_budget / (4.0 * feasible))));

  const auto hpl = araim::compute_hpl(res.solutions, res.modes, cfg, k_fa);
  REQUIRE(hpl.available);
  CHECK(hpl.hpl > 0.0);
  CHECK(hpl.hpl == doctest::Approx(std::hypot(hpl.hpl_axis[0], hpl.hpl_axis[1])));

  for (int axis = 0; axis < 2; ++axis) {
    const auto eq = araim::build_hpl_equation(res.solutions, cfg, k_fa, axis,
                                              res.modes.p_not_monitored);
    // Hand-built right side: half the horizontal budget, discounted by the
    // unmonitored share of the total.
    double p_nm = res.modes.p_not_monitored;
    for (const auto& s : res.solutions) {
      if (s.mode.index > 0 && !s.mode.feasible) p_nm += s.mode.p_fault;
    }
    // The budget is ~1e-8, far below Approx's default absolute slack.
    CHECK(eq.rhs ==
          doctest::Approx(0.5 * cfg.phmi_hor * (1.0 - p_nm / (cfg.phmi_vert + cfg.phmi_hor)))
              .scale(0.0)
              .epsilon(1e-12));
    REQUIRE(hpl.hpl_axis[axis] > 0.0);
    const long double resid = eq.lhs(hpl.hpl_axis[axis]) - static_cast<long double>(eq.rhs);
    CHECK(static_cast<double>(std::abs(resid)) < 1e-12 * eq.rhs);
    // Left side decreases in H.
    CHECK(eq.lhs(hpl.hpl_axis[axis] * 0.5) > eq.lhs(hpl.hpl_axis[axis] * 2.0));
  }

  // Axis combination switch.
  IntegrityConfig maxcfg = cfg;
  maxcfg.rss_combination = false;
  const auto hpl_max = araim::compute_hpl(res.solutions, res.modes, maxcfg, k_fa);
  CHECK(hpl_max.hpl == doctest::Approx(std::max(hpl_max.hpl_axis[0], hpl_max.hpl_axis[1])));
  CHECK(hpl_max.hpl <= hpl.hpl + 1e-12);
}

TEST_CASE("protection level reacts monotonically to budget and geometry") {
  const Fixture f = balanced_ten_fixture();
  IntegrityConfig cfg;
  const auto res = araim::fde(f.sats, f.consts, f.sigmas, f.rho, cfg);
  REQUIRE(res.outcome.passed);
  const auto base = araim::compute_hpl(res.solutions, res.modes, cfg, res.k_fa);

  // Loosening the horizontal integrity budget can only shrink the level.
  IntegrityConfig loose = cfg;
  loose.phmi_hor = cfg.phmi_hor * 10.0;
  const auto relaxed = araim::compute_hpl(res.solutions, res.modes, loose, res.k_fa);
  CHECK(relaxed.available);
  CHECK(relaxed.hpl < base.hpl);

  // Removing a measurement can only weaken the fault-free solution.
  for (int drop = 0; drop < 10; drop += 3) {
    Fixture g = f;
    g.sats.erase(g.sats.begin() + drop);
    g.consts.erase(g.consts.begin() + drop);
    VectorXd sg(9), rho(9);
    int j = 0;
    for (int i = 0; i < 10; ++i) {
      if (i == drop) continue;
      sg(j) = f.sigmas(i);
      rho(j) = f.rho(i);
      ++j;
    }
    g.sigmas = sg;
    g.rho = rho;
    const auto sub = araim::fde(g.sats, g.consts, g.sigmas, g.rho, cfg);
    REQUIRE(sub.outcome.passed);
    for (int q = 0; q < 2; ++q) {
      CHECK(sub.solutions.front().sigma_q[q] >= res.solutions.front().sigma_q[q] - 1e-12);
    }
  }

  // A wrong-exclusion term can only push the level up.
  araim::ExclusionContext ex;
  ex.threshold_q[0] = 3.0;
  ex.threshold_q[1] = 3.0;
  ex.p_excluded = 1e-5;
  const auto with_ex = araim::compute_hpl(res.solutions, res.modes, cfg, res.k_fa, &ex);
  CHECK(with_ex.available);
  CHECK(with_ex.hpl > base.hpl);

  // Unmonitored mass beyond the whole integrity budget: unavailable.
  FaultModeSet broke = res.modes;
  broke.p_not_monitored = 0.5;
  const auto dead = araim::compute_hpl(res.solutions, broke, cfg, res.k_fa);
  CHECK_FALSE(dead.available);
}

TEST_CASE("integrity configuration validation") {
  IntegrityConfig cfg;
  cfg.phmi_hor = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = IntegrityConfig{};
  cfg.p_sat_fault = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = IntegrityConfig{};
  cfg.hpl_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = IntegrityConfig{};
  cfg.k_fa = 5.5;
  CHECK(cfg.k_fa_effective(12) == 5.5);
}
