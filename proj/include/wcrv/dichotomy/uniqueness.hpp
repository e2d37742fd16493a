#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wcrv/common/errors.hpp"

namespace wcrv {

/// Two competing parameter sets (eps, mu) and (eps_tilde, mu_tilde) for the
/// same metric, with eps_tilde < eps. Supplies the curvature-profile
/// functions Sigma(K), Z(K) and their derivatives in closed form, with the
/// sign factors of |omega|^alpha handled explicitly.
struct UniquenessData {
  double p = 3.0; // fibre dimension, > 2 (the p = 2 case is handled separately)
  double eps = 1.0;
  double eps_tilde = 0.0;
  double mu = 0.0;
  double mu_tilde = 0.0;

  UniquenessData(double p_, double eps_, double eps_tilde_, double mu_, double mu_tilde_)
      : p(p_), eps(eps_), eps_tilde(eps_tilde_), mu(mu_), mu_tilde(mu_tilde_) {
    if (!(p > 2.0)) throw ValidationError("uniqueness data requires p > 2");
    if (!(eps_tilde < eps)) throw ValidationError("uniqueness data requires eps_tilde < eps");
  }

  /// Boundaries of the three admissible K-intervals: omega vanishes at
  /// eps/(1-p), omega_tilde at eps_tilde/(1-p).
  double omega_zero() const { return eps / (1.0 - p); }
  double omega_tilde_zero() const { return eps_tilde / (1.0 - p); }

  bool in_domain(double k) const { return k != omega_zero() && k != omega_tilde_zero(); }
};

/// All closed-form quantities at one K. Derivatives are with respect to K.
struct ProfileJet {
  double sigma = 0.0, sigma_prime = 0.0;
  double z = 0.0, z_prime = 0.0, z_second = 0.0;
  double omega = 0.0, omega_tilde = 0.0;
  double theta = 0.0, theta_tilde = 0.0;
};

inline ProfileJet profile_jet(const UniquenessData& d, double k) {
  const double p = d.p;
  const double om = (p - 1) * k + d.eps;
  const double omt = (p - 1) * k + d.eps_tilde;
  if (om == 0.0 || omt == 0.0)
    throw DomainViolation("K sits on an interval boundary where omega vanishes");
  const double g = om > 0 ? 1.0 : -1.0;
  const double gt = omt > 0 ? 1.0 : -1.0;
  const double de = d.eps - d.eps_tilde;

  auto pw = [&](double base, double expo) { return std::pow(std::abs(base), expo); };
  const double a_th = 2.0 / (1.0 - p);        // exponent in Theta
  const double a_d1 = (1.0 + p) / (1.0 - p);  // in Theta'
  const double a_d2 = 2.0 * p / (1.0 - p);    // in Theta''
  const double a_lo = (p - 3.0) / (p - 1.0);  // in Sigma', Z'

  const double th = 2.0 * k + p * d.eps - d.mu * pw(om, a_th);
  const double tht = 2.0 * k + p * d.eps_tilde - d.mu_tilde * pw(omt, a_th);
  const double th1 = 2.0 + 2.0 * g * d.mu * pw(om, a_d1);
  const double tht1 = 2.0 + 2.0 * gt * d.mu_tilde * pw(omt, a_d1);
  const double th2 = -2.0 * (p + 1) * d.mu * pw(om, a_d2);
  const double tht2 = -2.0 * (p + 1) * d.mu_tilde * pw(omt, a_d2);

  ProfileJet j;
  j.omega = om;
  j.omega_tilde = omt;
  j.theta = th;
  j.theta_tilde = tht;

  j.sigma = (omt * omt * tht - om * om * th) / (2.0 * (p + 1) * de);
  j.z = om * omt * (omt * tht - om * th) / (2.0 * (p + 1) * (3.0 * p - 2.0) * de);

  j.sigma_prime = (3.0 * (omt * omt - om * om) +
                   (p + 1) * (p - 2) * (d.eps_tilde * omt - d.eps * om) +
                   (p - 2) * (g * d.mu * pw(om, a_lo) - gt * d.mu_tilde * pw(omt, a_lo))) /
                  ((p + 1) * de);

  // (3p-2) Z' - (p-1) Sigma in closed form, then solve for Z'.
  const double zp_comb =
      (2.0 * (p * p - p + 1.0) * (d.eps_tilde - d.eps) * om * omt +
       2.0 * (p - 2) * (g * d.mu * omt * pw(om, a_lo) - gt * d.mu_tilde * om * pw(omt, a_lo))) /
      (2.0 * (p + 1) * de);
  j.z_prime = ((p - 1) * j.sigma + zp_comb) / (3.0 * p - 2.0);

  j.z_second = ((om * omt * omt) * tht2 - (om * om * omt) * th2 +
                2.0 * (p - 1) * (omt + 2.0 * om) * omt * tht1 -
                2.0 * (p - 1) * (om + 2.0 * omt) * om * th1 +
                2.0 * (p - 1) * (p - 1) * (2.0 * omt + om) * tht -
                2.0 * (p - 1) * (p - 1) * (2.0 * om + omt) * th) /
               (2.0 * (p + 1) * (3.0 * p - 2.0) * de);
  return j;
}

/// (Sigma(K), Z(K)).
inline std::pair<double, double> profile_pair(const UniquenessData& d, double k) {
  const ProfileJet j = profile_jet(d, k);
  return {j.sigma, j.z};
}

/// Left minus right side of the isoparametric consistency equation
///   (2Z' - Sigma)(Z' - Sigma) = 2 (Z'' - Sigma' - K) Z.
inline double ode_identity_gap(const UniquenessData& d, double k) {
  const ProfileJet j = profile_jet(d, k);
  return (2.0 * j.z_prime - j.sigma) * (j.z_prime - j.sigma) -
         2.0 * (j.z_second - j.sigma_prime - k) * j.z;
}

/// The quartic 12p^4 - 23p^3 + 55p^2 - 56p + 60, positive for all real
/// p >= 1 thanks to the split p^2(p-1)(12p-11) + 4(11p^2 - 14p + 15).
inline double gap_polynomial_value(double p) {
  return 12.0 * p * p * p * p - 23.0 * p * p * p + 55.0 * p * p - 56.0 * p + 60.0;
}

/// Closed form of the large-K limit of the scaled identity gap
/// 4[(p+1)(3p-2)]^2 [(2Z'-Sigma)(Z'-Sigma) - 2(Z''-Sigma'-K)Z] / K^4,
/// obtained by differentiating the defining closed forms of Sigma and Z.
inline double identity_gap_limit(double p) {
  return (p - 6.0) * (p - 2.0) * std::pow(p - 1.0, 4) * (p + 2.0);
}

/// Integer evaluation of the quartic and of its two-part decomposition
/// p^2 (p-1)(12p-11) + 4 (11p^2 - 14p + 15) at integer p.
struct GapPolynomialSplit {
  std::int64_t total = 0;
  std::int64_t first = 0;
  std::int64_t second = 0;
};

inline GapPolynomialSplit gap_polynomial_integer(std::int64_t p) {
  GapPolynomialSplit s;
  s.total = 12 * p * p * p * p - 23 * p * p * p + 55 * p * p - 56 * p + 60;
  s.first = p * p * (p - 1) * (12 * p - 11);
  s.second = 4 * (11 * p * p - 14 * p + 15);
  return s;
}

/// One asymptotic check of the limit suite.
struct LimitCheck {
  std::string name;
  double expected = 0.0;
  double measured_neg = 0.0; // extrapolated at K -> -inf
  double measured_pos = 0.0; // extrapolated at K -> +inf
  double rel_error = 0.0;    // worst of the two ends
  bool pass = false;
};

struct LimitSuiteReport {
  std::vector<LimitCheck> checks;
  double tolerance = 1e-3;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

/// Extrapolation v(K) = v_inf + c1 |K|^{-b1} + c2 |K|^{-b2} + ... from three
/// samples. The leading corrections carry the non-integer power 2/(p-1)
/// alongside 1/K, so plain 1/K Richardson is not enough for large p.
inline double power_extrapolate(const std::array<double, 3>& absk,
                                const std::array<double, 3>& v, double b1, double b2) {
  const double x10 = std::pow(absk[0], -b1), x11 = std::pow(absk[1], -b1),
               x12 = std::pow(absk[2], -b1);
  const double x20 = std::pow(absk[0], -b2), x21 = std::pow(absk[1], -b2),
               x22 = std::pow(absk[2], -b2);
  // Solve [1 x1 x2][vinf c1 c2]^T = v by Cramer's rule on the 3x3 system.
  const double det = (x11 * x22 - x12 * x21) - (x10 * x22 - x12 * x20) +
                     (x10 * x21 - x11 * x20);
  const double det_v = v[0] * (x11 * x22 - x12 * x21) - v[1] * (x10 * x22 - x12 * x20) +
                       v[2] * (x10 * x21 - x11 * x20);
  return det_v / det;
}

} // namespace detail

/// Evaluates the scaled profile quantities at |K| in {1e4, 1e5, 1e6} on both
/// unbounded intervals, extrapolates with the known correction exponents, and
/// compares against the closed-form constants.
inline LimitSuiteReport limit_suite(const UniquenessData& d, double rel_tol = 1e-3) {
  const double p = d.p;
  const std::array<double, 3> ks = {1e4, 1e5, 1e6};

  struct Quantity {
    std::string name;
    double expected;
    double (*eval)(const ProfileJet&, double k, double p);
  };
  const double pp = p;
  const std::vector<Quantity> quantities = {
      {"2(p+1) Sigma / K^2", -(pp - 1) * (pp * pp - pp + 4),
       [](const ProfileJet& j, double k, double p) {
         return 2.0 * (p + 1) * j.sigma / (k * k);
       }},
      {"(p+1) Sigma' / K", -(pp - 1) * (pp * pp - pp + 4),
       [](const ProfileJet& j, double k, double p) { return (p + 1) * j.sigma_prime / k; }},
      {"2(p+1)(3p-2) Z / K^3", -(pp - 1) * (pp - 1) * (pp * pp - pp + 2),
       [](const ProfileJet& j, double k, double p) {
         return 2.0 * (p + 1) * (3 * p - 2) * j.z / (k * k * k);
       }},
      {"2(p+1)(3p-2) Z' / K^2", -3.0 * (pp - 1) * (pp - 1) * (pp * pp - pp + 2),
       [](const ProfileJet& j, double k, double p) {
         return 2.0 * (p + 1) * (3 * p - 2) * j.z_prime / (k * k);
       }},
      {"(p+1)(3p-2) Z'' / K", -3.0 * (pp - 1) * (pp - 1) * (pp * pp - pp + 2),
       [](const ProfileJet& j, double k, double p) {
         return (p + 1) * (3 * p - 2) * j.z_second / k;
       }},
      {"4[(p+1)(3p-2)]^2 (2Z'-Sigma)(Z'-Sigma) / K^4",
       -(pp - 1) * (pp - 1) * (pp - 2) * (pp * pp + 5 * pp - 2) * (3 * pp * pp - pp + 2),
       [](const ProfileJet& j, double k, double p) {
         const double scale = (p + 1) * (3 * p - 2);
         return 4.0 * scale * scale * (2.0 * j.z_prime - j.sigma) * (j.z_prime - j.sigma) /
                (k * k * k * k);
       }},
      {"8[(p+1)(3p-2)]^2 (Z''-Sigma'-K) Z / K^4",
       -4.0 * (pp - 1) * (pp - 1) * (pp - 2) * (pp * pp - pp + 2) *
           (pp * pp + 3 * pp - 2),
       [](const ProfileJet& j, double k, double p) {
         const double scale = (p + 1) * (3 * p - 2);
         return 8.0 * scale * scale * (j.z_second - j.sigma_prime - k) * j.z /
                (k * k * k * k);
       }},
  };

  // correction exponents: 2/(p-1) from the |omega| powers and 1 from the
  // polynomial tail; they coincide at p = 3, where 1 and 2 are used instead.
  double b1 = 2.0 / (p - 1.0), b2 = 1.0;
  if (std::abs(b1 - b2) < 1e-9) b2 = 2.0;

  LimitSuiteReport rep;
  rep.tolerance = rel_tol;
  for (const auto& q : quantities) {
    LimitCheck chk;
    chk.name = q.name;
    chk.expected = q.expected;
    for (int side = 0; side < 2; ++side) {
      const double sgn = side == 0 ? -1.0 : 1.0;
      std::array<double, 3> vals{};
      for (int i = 0; i < 3; ++i) {
        const double k = sgn * ks[i];
        vals[i] = q.eval(profile_jet(d, k), k, p);
      }
      const double v = detail::power_extrapolate(ks, vals, b1, b2);
      (side == 0 ? chk.measured_neg : chk.measured_pos) = v;
    }
    chk.rel_error = std::max(std::abs(chk.measured_neg - chk.expected),
                             std::abs(chk.measured_pos - chk.expected)) /
                    std::abs(chk.expected);
    chk.pass = chk.rel_error < rel_tol;
    rep.checks.push_back(std::move(chk));
  }

  // The difference of the two K^4 limits, i.e. the limit of the scaled
  // identity gap.
  LimitCheck diff;
  diff.name = "difference of the K^4 limits";
  diff.expected = identity_gap_limit(pp);
  for (int side = 0; side < 2; ++side) {
    const double sgn = side == 0 ? -1.0 : 1.0;
    std::array<double, 3> vals{};
    for (int i = 0; i < 3; ++i) {
      const double k = sgn * ks[i];
      const ProfileJet j = profile_jet(d, k);
      const double scale = (p + 1) * (3 * p - 2);
      vals[i] = 4.0 * scale * scale *
                ((2.0 * j.z_prime - j.sigma) * (j.z_prime - j.sigma) -
                 2.0 * (j.z_second - j.sigma_prime - k) * j.z) /
                (k * k * k * k);
    }
    const double v = detail::power_extrapolate(ks, vals, b1, b2);
    (side == 0 ? diff.measured_neg : diff.measured_pos) = v;
  }
  diff.rel_error = std::max(std::abs(diff.measured_neg - diff.expected),
                            std::abs(diff.measured_pos - diff.expected)) /
                   std::abs(diff.expected);
  diff.pass = diff.rel_error < rel_tol;
  rep.checks.push_back(std::move(diff));
  return rep;
}

} // namespace wcrv
