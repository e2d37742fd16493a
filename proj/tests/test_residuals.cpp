#include "support/test_helpers.hpp"

#include "wcrv/residuals/residuals.hpp"

using namespace wcrv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// Straight-line reimplementation of the warp residual from the geometry
/// primitives, kept independent of the library path it checks.
Eigen::VectorXd straight_line_warp_residual(const Surface& s, const WarpParams& w,
                                            const ScalarField& x) {
  const int n = s.node_count();
  const Eigen::VectorXd lap_x = s.laplacian(x.values);
  Eigen::VectorXd k(n), f(n);
  for (int i = 0; i < n; ++i) k[i] = std::exp(-2.0 * x.values[i]) * (w.khat - lap_x[i]);
  for (int i = 0; i < n; ++i) {
    const double bracket = k[i] + w.eps / (w.p - 1);
    const double denom = 2.0 * w.r * (1.0 + 1.0 / w.p);
    f[i] = std::pow(bracket / denom, w.p / (2.0 - 2.0 * w.p));
  }
  const Eigen::VectorXd lap_f = s.laplacian(f);
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const double omega = w.a * f[i] - w.c * std::pow(f[i], 1.0 + 4.0 / w.p) +
                         w.r * std::pow(f[i], -1.0 + 2.0 / w.p);
    out[i] = std::exp(-2.0 * x.values[i]) * lap_f[i] - omega;
  }
  return out;
}

} // namespace

TEST_CASE("warp parameters derive the documented constants") {
  // p=2, r=1, khat=1, theta=1: eps = 3 r theta - khat = 2, a = 0, c = r theta^3 = 1.
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 1.0);
  CHECK_THAT(w.eps, WithinAbs(2.0, 1e-15));
  CHECK_THAT(w.a, WithinAbs(0.0, 1e-15));
  CHECK_THAT(w.c, WithinAbs(1.0, 1e-15));
  CHECK_THAT(w.mu, WithinAbs(6.0, 1e-14));
  CHECK(w.q == 4.0);
  CHECK(f_const_of_theta(2, 1.0) == 1.0);

  // Invariant: a relates to eps through p(p-2) eps = 4(p-1) a.
  for (int p : {2, 3, 4, 7}) {
    const WarpParams wp = WarpParams::from_theta(p, 1.0, 1.0, 2.5);
    CHECK_THAT(p * (p - 2) * wp.eps, WithinAbs(4.0 * (p - 1) * wp.a, 1e-12));
    CHECK_THAT(wp.mu, WithinRel(4.0 * (1.0 + 1.0 / p) * wp.c, 1e-15));
  }
}

TEST_CASE("warp nonlinearity vanishes on trivial solutions") {
  // p=2, r=1, theta=1: Omega(f) = 1 - f^3, so Omega(1) = 0.
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 1.0);
  CHECK_THAT(warp_nonlinearity(1.0, w), WithinAbs(0.0, 1e-15));
  CHECK_THAT(warp_nonlinearity(2.0, w), WithinAbs(-8.0 + 1.0, 1e-12));

  for (int p : {2, 3, 4}) {
    for (double theta : {0.7, 1.9, 6.3}) {
      const WarpParams wp = WarpParams::from_theta(p, 1.0, 1.0, theta);
      CHECK_THAT(warp_nonlinearity(f_const_of_theta(p, theta), wp), WithinAbs(0.0, 1e-12));
    }
  }

  // Degenerate input is rejected.
  CHECK_THROWS_AS(warp_nonlinearity(-1.0, w), DomainViolation);
  CHECK_THROWS_AS(warp_nonlinearity(0.0, w), DomainViolation);

  // r = 0 with a = c: the normalized Yamabe nonlinearity has Omega(1) = 0.
  WarpParams yam;
  yam.p = 4;
  yam.r = 0.0;
  yam.a = 2.0;
  yam.c = 2.0;
  CHECK_THAT(warp_nonlinearity(1.0, yam), WithinAbs(0.0, 1e-15));
}

TEST_CASE("trivial solutions annihilate the warp residual to machine precision") {
  const Surface& s = testing::sphere_256();
  for (int p : {2, 3, 4}) {
    const AdmissibleInterval iv = admissible_interval(p, 1.0, 1.0);
    for (double frac : {0.1, 0.5, 0.9}) {
      const double theta = iv.lo + 0.05 + 10.0 * frac;
      const WarpParams w = WarpParams::from_theta(p, 1.0, 1.0, theta);
      const ScalarField resid = warp_residual(s, w, ScalarField::zero(s));
      CHECK(resid.values.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("warp residual: derived f matches the constant profile at x = 0") {
  const Surface& s = testing::sphere_256();
  // p=2, r=1, khat=1, lambda=6 => delta = 2 and f = (delta + t)^{-1}.
  const WarpParams base = WarpParams::at_bifurcation(2, 1.0, 1.0, 6.0);
  CHECK_THAT(base.delta, WithinAbs(2.0, 1e-14));
  for (double t : {-0.5, 0.0, 1.2}) {
    const WarpParams w = base.shifted(t);
    const ScalarField k = gaussian_curvature(s, ScalarField::zero(s));
    const ScalarField f = warp_f_of_curvature(s, k, w);
    CHECK((f.values.array() - 1.0 / (2.0 + t)).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("warp residual agrees with an independent straight-line evaluation") {
  const Surface& s = testing::sphere_256();
  const WarpParams w = WarpParams::at_bifurcation(2, 1.0, 1.0, 6.0).shifted(0.3);
  const ScalarField x = testing::random_even_field(s, 11, 5e-3);
  const ScalarField lib = warp_residual(s, w, x);
  const Eigen::VectorXd ref = straight_line_warp_residual(s, w, x);
  CHECK((lib.values - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("case-b domain violation reports the offending nodes") {
  const Surface& s = testing::sphere_256();
  // A large conformal bump flips the sign of (p-1)K + eps somewhere.
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 0.45);
  const ScalarField bump = testing::zonal_harmonic(s, 2);
  try {
    warp_residual(s, w, ScalarField(s, 1.2 * bump.values));
    FAIL("expected a domain violation");
  } catch (const DomainViolation& e) {
    CHECK(!e.offending_nodes.empty());
  }
}

TEST_CASE("scalar-curvature identity on constant data reproduces mu = 4(1+1/p)c") {
  const Surface& s = testing::sphere_256();
  // p=2, theta=2: eps=5, c=8, vartheta = theta^{1/(p-1)} = 2, field = 48.
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 2.0);
  CHECK_THAT(w.eps, WithinAbs(5.0, 1e-14));
  CHECK_THAT(w.c, WithinAbs(8.0, 1e-14));
  const ScalarField vt = ScalarField::constant(s, 2.0);
  const ScalarIdentityReport rep = warped_scalar_residual(s, ScalarField::zero(s), vt, w);
  CHECK_THAT(rep.mu_bar, WithinRel(48.0, 1e-12));
  CHECK(rep.deviation < 1e-12);
  CHECK_THAT(rep.mu_bar, WithinRel(4.0 * (1.0 + 0.5) * w.c, 1e-12));
}

TEST_CASE("mu-bar equals 4(1+1/p)c on trivial solutions at any grid size") {
  for (int n : {64, 256}) {
    const Surface s = Surface::zonal_sphere(1.0, n);
    for (int p : {2, 3, 5}) {
      for (double theta : {0.9, 3.7}) {
        const WarpParams w = WarpParams::from_theta(p, 1.0, 1.0, theta);
        const ScalarField vt = ScalarField::constant(s, std::pow(theta, 1.0 / (p - 1)));
        const ScalarIdentityReport rep =
            warped_scalar_residual(s, ScalarField::zero(s), vt, w);
        CHECK_THAT(rep.mu_bar, WithinRel(w.mu, 1e-8));
        CHECK(rep.deviation < 1e-10);
      }
    }
  }
}

TEST_CASE("one-node corruption blows up the scalar-identity deviation") {
  const Surface& s = testing::sphere_256();
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 2.0);
  Eigen::VectorXd vt = Eigen::VectorXd::Constant(s.node_count(), 2.0);
  const ScalarIdentityReport clean =
      warped_scalar_residual(s, ScalarField::zero(s), ScalarField(s, vt), w);
  vt[s.node_count() / 3] *= 1.01;
  const ScalarIdentityReport bad =
      warped_scalar_residual(s, ScalarField::zero(s), ScalarField(s, vt), w);
  CHECK(bad.deviation > 1e3 * std::max(clean.deviation, 1e-12));
}

TEST_CASE("metric-only residual closes on trivial solutions") {
  const Surface& s = testing::sphere_256();
  for (int p : {2, 3, 4}) {
    for (double theta : {1.0, 2.0}) {
      const WarpParams w = WarpParams::from_theta(p, 1.0, 1.0, theta);
      const ScalarField resid = metric_curvature_residual(s, ScalarField::zero(s), w);
      // Pure scalar algebra at constant curvature; only rounding remains.
      const double om = (p - 1) * 1.0 + w.eps;
      const double scale = std::abs((2.0 + p * w.eps) * om * om);
      CHECK(resid.values.cwiseAbs().maxCoeff() < 1e-11 * std::max(scale, 1.0));
    }
  }
}

TEST_CASE("metric-only residual at p = 2 degenerates to the stated form") {
  const Surface& s = testing::sphere_256();
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 2.0);
  const double mu_n = normalized_mu(w, case_b_constant_from_r(w));
  CHECK_THAT(case_b_constant_from_r(w), WithinRel(1.0 / 3.0, 1e-14));
  CHECK_THAT(mu_n, WithinRel(432.0, 1e-12));
  const ScalarField x = testing::random_even_field(s, 3, 1e-3);
  const ScalarField resid = metric_curvature_residual(s, x, w, mu_n);

  // Independent evaluation; the exponent 2(p-2)/(p-1) = 0 drops out.
  const ScalarField k = gaussian_curvature(s, x);
  Eigen::VectorXd lap_k = s.laplacian(k.values);
  const ScalarField gk = grad_norm_sq(s, x, k);
  for (int i : {10, 100, 200}) {
    const double om = k.values[i] + w.eps;
    const double lhs =
        3.0 * (2.0 * om * std::exp(-2.0 * x.values[i]) * lap_k[i] - 4.0 * gk.values[i]);
    const double rhs = mu_n - (2.0 * k.values[i] + 2.0 * w.eps) * om * om;
    CHECK_THAT(resid.values[i], WithinAbs(lhs - rhs, 1e-9));
  }
}

TEST_CASE("normalization constant estimated from fields matches the closed form") {
  const Surface& s = testing::sphere_256();
  const WarpParams w = WarpParams::from_theta(3, 0.8, 1.0, 2.0);
  const ScalarField x = ScalarField::zero(s);
  const ScalarField k = gaussian_curvature(s, x);
  SolutionQuadruple sol{x, warp_f_of_curvature(s, k, w), w.eps, w.c};
  CHECK_THAT(case_b_constant_from_fields(s, sol, w),
             WithinRel(case_b_constant_from_r(w), 1e-12));
}

TEST_CASE("residuals transform covariantly under constant metric rescaling") {
  // Scaling g by z sends (A, K, eps, omega, mu) to
  // (zA, K/z, eps/z, omega/z, z^{(1+p)/(1-p)} mu); the homothety invariants
  // do not move and the metric-only residual picks up exactly z^{-3}.
  const double z = 2.7;
  const int n = 256;
  const Surface s1 = Surface::zonal_sphere(1.0, n);
  const Surface s2 = Surface::zonal_sphere(1.0 / z, n);
  for (int p : {2, 3}) {
    const double theta = 1.4;
    const WarpParams w1 = WarpParams::from_theta(p, 1.0, 1.0, theta);
    const WarpParams w2 = WarpParams::from_theta(p, 1.0, 1.0 / z, theta / z);
    CHECK_THAT(w2.eps, WithinRel(w1.eps / z, 1e-13));
    CHECK_THAT(w2.mu, WithinRel(w1.mu * std::pow(z, (1.0 + p) / (1.0 - p)), 1e-12));

    const ScalarField x1 = testing::random_even_field(s1, 21, 2e-3);
    const ScalarField x2 = ScalarField(s2, x1.values);
    const HomothetyInvariants h1 = homothety_invariants(s1, x1, w1);
    const HomothetyInvariants h2 = homothety_invariants(s2, x2, w2);
    CHECK_THAT(h2.eps_area, WithinRel(h1.eps_area, 1e-12));
    CHECK_THAT(h2.k_max, WithinAbs(h1.k_max, 1e-12));
    CHECK_THAT(h2.k_min, WithinAbs(h1.k_min, 1e-12));

    const double mu1 = normalized_mu(w1, case_b_constant_from_r(w1));
    const double mu2 = normalized_mu(w2, case_b_constant_from_r(w2));
    const ScalarField r1 = metric_curvature_residual(s1, x1, w1, mu1);
    const ScalarField r2 = metric_curvature_residual(s2, x2, w2, mu2);
    const double scale = r1.values.cwiseAbs().maxCoeff();
    CHECK((r2.values * std::pow(z, 3.0) - r1.values).cwiseAbs().maxCoeff() <
          1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("homothety invariants of constant curvature sit at [1:1]") {
  const Surface& s = testing::sphere_256();
  const WarpParams w = WarpParams::from_theta(2, 1.0, 1.0, 2.0);
  const HomothetyInvariants h = homothety_invariants(s, ScalarField::zero(s), w);
  CHECK_THAT(h.k_max, WithinRel(1.0 / std::sqrt(2.0), 1e-12));
  CHECK_THAT(h.k_min, WithinRel(1.0 / std::sqrt(2.0), 1e-12));
  CHECK_THAT(h.eps_area, WithinRel(w.eps * 4.0 * M_PI, 1e-12));
}

TEST_CASE("yamabe residual: constant profiles") {
  const Surface& s = testing::sphere_256();
  const double a = 3.0, q = 4.0;
  const ScalarField x0 = ScalarField::zero(s);
  const ScalarField one = ScalarField::constant(s, 1.0);
  CHECK(yamabe_residual(s, x0, one, a, q).values.cwiseAbs().maxCoeff() < 1e-14);

  const double kappa = 1.7;
  const ScalarField fk = ScalarField::constant(s, kappa);
  const double expected = a * (std::pow(kappa, q - 1.0) - kappa);
  const ScalarField r = yamabe_residual(s, x0, fk, a, q);
  CHECK((r.values.array() - expected).abs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(yamabe_residual(s, x0, ScalarField::constant(s, -1.0), a, q),
                  DomainViolation);
}

TEST_CASE("sign ledger accepts valid data and rejects synthetic violations") {
  const Surface& s = testing::sphere_256();
  const ScalarField k = gaussian_curvature(s, ScalarField::zero(s));
  const WarpParams good = WarpParams::from_theta(2, 1.0, 1.0, 2.0);
  CHECK(sign_ledger(good, k).ok());
  CHECK_NOTHROW(check_sign_ledger(good, k));

  WarpParams bad_c = good;
  bad_c.c = -1.0;
  CHECK_FALSE(sign_ledger(bad_c, k).c_positive);
  CHECK_THROWS_AS(check_sign_ledger(bad_c, k), SignConstraintError);

  WarpParams bad_eps = good;
  bad_eps.eps = -0.5;
  CHECK_THROWS_AS(check_sign_ledger(bad_eps, k), SignConstraintError);

  // r < 0 over a positive-curvature field violates the compact-case signs.
  WarpParams bad_r = good;
  bad_r.p = 3;
  bad_r.r = -1.0;
  CHECK_THROWS_AS(check_sign_ledger(bad_r, k), SignConstraintError);
}

TEST_CASE("vartheta conversion inverts the warping power") {
  const Surface& s = testing::sphere_256();
  const ScalarField f = ScalarField::constant(s, 0.5);
  const ScalarField vt = vartheta_of_f(s, f, 2);
  CHECK((vt.values.array() - 2.0).abs().maxCoeff() < 1e-14);
}
