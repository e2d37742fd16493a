#include "support/test_helpers.hpp"

#include "wcrv/continuation/trace.hpp"
#include "wcrv/dichotomy/isoparametric.hpp"
#include "wcrv/dichotomy/uniqueness.hpp"

using namespace wcrv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("uniqueness data validates its preconditions") {
  CHECK_THROWS_AS(UniquenessData(2.0, 1.0, 0.0, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(UniquenessData(3.0, 1.0, 1.0, 0.0, 0.0), ValidationError);
  const UniquenessData d(3.0, 2.0, 1.0, 0.4, 0.7);
  CHECK_THAT(d.omega_zero(), WithinRel(-1.0, 1e-15));
  CHECK_THAT(d.omega_tilde_zero(), WithinRel(-0.5, 1e-15));
  CHECK_THROWS_AS(profile_jet(d, -1.0), DomainViolation);
}

TEST_CASE("profile functions match an exact rational-arithmetic evaluation") {
  // p = 3, eps = 2, eps~ = 1, mu = mu~ = 0, K = 1: every quantity is rational.
  // omega = 2K + 2 = 4, omega~ = 2K + 1 = 3, Theta = 2K + 6 = 8, Theta~ = 2K + 3 = 5.
  // Sigma = (9*5 - 16*8) / (2*4*1) = -83/8.
  // Z = 12 * (15 - 32) / (2*4*7*1) = -51/14.
  const UniquenessData d(3.0, 2.0, 1.0, 0.0, 0.0);
  const auto [sigma, z] = profile_pair(d, 1.0);
  CHECK_THAT(sigma, WithinRel(-83.0 / 8.0, 1e-14));
  CHECK_THAT(z, WithinRel(-51.0 / 14.0, 1e-14));

  // Derivatives against the same rational bookkeeping:
  // Sigma' = [3(omega~^2 - omega^2) + 4(eps~ omega~ - eps omega)] / (4 (eps - eps~))
  //        = [3(9-16) + 4(3-8)] / 4 = -41/4.
  const ProfileJet j = profile_jet(d, 1.0);
  CHECK_THAT(j.sigma_prime, WithinRel(-41.0 / 4.0, 1e-14));
  // (3p-2) Z' = 2 Sigma + [2*7*(-1)*12]/(2*4*1) => Z' = (-83/4 - 21)/7 = -167/28.
  CHECK_THAT(j.z_prime, WithinRel(-167.0 / 28.0, 1e-14));
}

TEST_CASE("analytic profile derivatives agree with finite differences in K") {
  const UniquenessData d(4.0, 1.7, 0.6, 1.3, 0.8);
  const double h = 1e-6;
  for (double k : {2.0, 5.5, -3.0, 17.0}) {
    const ProfileJet j = profile_jet(d, k);
    const ProfileJet jp = profile_jet(d, k + h);
    const ProfileJet jm = profile_jet(d, k - h);
    CHECK_THAT((jp.sigma - jm.sigma) / (2 * h), WithinRel(j.sigma_prime, 1e-6));
    CHECK_THAT((jp.z - jm.z) / (2 * h), WithinRel(j.z_prime, 1e-6));
    CHECK_THAT((jp.z_prime - jm.z_prime) / (2 * h), WithinRel(j.z_second, 1e-6));
  }
}

TEST_CASE("omega difference equals the eps difference identically") {
  const UniquenessData d(5.0, 2.4, 1.1, 0.7, 1.9);
  for (double k : {-7.0, 0.3, 12.0}) {
    const ProfileJet j = profile_jet(d, k);
    // algebraically exact; rounding of the two sums is all that remains
    CHECK_THAT(j.omega - j.omega_tilde,
               WithinAbs(d.eps - d.eps_tilde, 1e-14 * (1.0 + std::abs(k) * d.p)));
  }
}

TEST_CASE("large-K identity gap approaches its closed-form constant") {
  // p = 3: (p-6)(p-2)(p-1)^4 (p+2) = -240, confirmed by exact polynomial
  // algebra on the mu = 0 closed forms.
  const UniquenessData d(3.0, 2.0, 1.0, 0.9, 0.4);
  CHECK_THAT(identity_gap_limit(3.0), WithinAbs(-240.0, 1e-12));
  const double scale = (3.0 + 1) * (3 * 3.0 - 2);
  for (double k : {1e6, -1e6}) {
    const double gap = ode_identity_gap(d, k);
    const double scaled = 4.0 * scale * scale * gap / (k * k * k * k);
    CHECK_THAT(scaled, WithinRel(-240.0, 1e-2));
  }
  CHECK_THAT(gap_polynomial_value(3.0), WithinAbs(738.0, 1e-12));
}

TEST_CASE("integer decomposition of the gap quartic at p = 2") {
  const GapPolynomialSplit s = gap_polynomial_integer(2);
  CHECK(s.total == 176);
  CHECK(s.first == 52);
  CHECK(s.second == 124);
  CHECK(s.total == s.first + s.second);
}

TEST_CASE("the gap quartic is positive on a fine grid of real p >= 1") {
  for (double p = 1.0; p <= 12.0; p += 0.01) CHECK(gap_polynomial_value(p) > 0.0);
}

TEST_CASE("limit suite reproduces every asymptotic constant") {
  for (double p : {3.0, 4.0, 5.0, 8.0}) {
    const UniquenessData d1(p, 1.7, 0.6, 1.3, 0.8);
    const UniquenessData d2(p, 2.4, 1.1, 0.7, 1.9);
    for (const UniquenessData* d : {&d1, &d2}) {
      const LimitSuiteReport rep = limit_suite(*d);
      INFO("p = " << p);
      for (const LimitCheck& c : rep.checks) {
        INFO(c.name << ": expected " << c.expected << " measured " << c.measured_pos << " / "
                    << c.measured_neg);
        CHECK(c.pass);
      }
      CHECK(rep.all_pass());
    }
  }
}

TEST_CASE("limit suite spot values") {
  // p = 3: first constant -(p-1)(p^2-p+4) = -20.
  const UniquenessData d(3.0, 1.7, 0.6, 1.3, 0.8);
  const LimitSuiteReport rep = limit_suite(d);
  CHECK_THAT(rep.checks[0].expected, WithinAbs(-20.0, 1e-12));
  // p = 4: -(p-1)^2 (p-2)(p^2+5p-2)(3p^2-p+2) = -28152.
  const UniquenessData d4(4.0, 1.7, 0.6, 1.3, 0.8);
  const LimitSuiteReport rep4 = limit_suite(d4);
  CHECK_THAT(rep4.checks[5].expected, WithinAbs(-28152.0, 1e-9));
}

TEST_CASE("isoparametric check: vacuous on constant curvature") {
  const Surface& s = testing::sphere_256();
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 2.0);
  const IsoparametricReport rep = isoparametric_check(s, ScalarField::zero(s), w);
  CHECK(rep.vacuous);
  CHECK(!rep.notice.empty());
}

TEST_CASE("isoparametric check: converged zonal branch points have tiny scatter") {
  const Surface s = Surface::zonal_sphere(1.0, 256);
  const std::vector<BifurcationPoint> pts = bifurcation_scan(s, 2, 1.0, 1.0, 3.0);
  REQUIRE(!pts.empty());
  const WarpParams base = WarpParams::at_bifurcation(2, 1.0, 1.0, pts[0].lambda_discrete);
  NewtonSettings cfg;
  cfg.ds = 1e-3;
  cfg.max_points = 8;
  const BranchState branch = trace_branch(s, base, pts[0].kernel, cfg);
  REQUIRE(branch.points.size() >= 3);
  const BranchPoint& bp = branch.points.back();
  const IsoparametricReport rep =
      isoparametric_check(s, ScalarField(s, bp.x), base.shifted(bp.t));
  CHECK(!rep.vacuous);
  CHECK(rep.segments >= 2);
  CHECK(rep.scatter() < 1e-6);
}

TEST_CASE("isoparametric check: non-symmetric mesh fields scatter widely") {
  const Surface& s = testing::icosphere_4();
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(s.node_count());
  // smooth-ish but not rotationally symmetric: random low-order combination
  for (int i = 0; i < s.node_count(); ++i) {
    const Eigen::Vector3d& v = s.vertices()[i];
    x[i] = 0.05 * (v[0] * v[1] + 0.7 * v[2] * v[0] * v[0]);
  }
  (void)gauss;
  (void)rng;
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 2.0);
  const IsoparametricReport rep = isoparametric_check(s, ScalarField(s, x), w);
  CHECK(!rep.vacuous);
  CHECK(rep.scatter() >= 1e-2);
}
