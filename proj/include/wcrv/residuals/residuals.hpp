#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "wcrv/geometry/operators.hpp"
#include "wcrv/residuals/warp_params.hpp"

namespace wcrv {

/// Nonlinearity of the warp equation:
/// Omega(f) = a f - c f^{1+4/p} + r f^{-1+2/p}.
inline double warp_nonlinearity(double f, const WarpParams& w) {
  if (!(f > 0.0)) throw DomainViolation("warp_nonlinearity requires f > 0");
  return w.a * f - w.c * std::pow(f, 1.0 + 4.0 / w.p) + w.r * std::pow(f, -1.0 + 2.0 / w.p);
}

/// d Omega / d f.
inline double warp_nonlinearity_prime(double f, const WarpParams& w) {
  if (!(f > 0.0)) throw DomainViolation("warp_nonlinearity requires f > 0");
  return w.a - (1.0 + 4.0 / w.p) * w.c * std::pow(f, 4.0 / w.p) -
         (1.0 - 2.0 / w.p) * w.r * std::pow(f, -2.0 + 2.0 / w.p);
}

/// The warping power determined by the curvature in the nonconstant-curvature
/// case:  f = [ (K + eps/(p-1)) / (2 r (1+1/p)) ]^{p/(2-2p)}.
/// The bracket must be positive everywhere (it carries the sign of r).
inline ScalarField warp_f_of_curvature(const Surface& surface, const ScalarField& k,
                                       const WarpParams& w) {
  const double denom = 2.0 * w.r * (1.0 + 1.0 / w.p);
  const double expo = w.p / (2.0 - 2.0 * w.p);
  Eigen::VectorXd f(k.values.size());
  std::vector<int> bad;
  for (Eigen::Index i = 0; i < k.values.size(); ++i) {
    const double ratio = (k.values[i] + w.eps / (w.p - 1)) / denom;
    if (!(ratio > 0.0)) {
      bad.push_back(static_cast<int>(i));
      continue;
    }
    f[i] = std::pow(ratio, expo);
  }
  if (!bad.empty())
    throw DomainViolation("(p-1)K + eps changes sign or vanishes at " +
                              std::to_string(bad.size()) + " node(s): nonconstant-curvature "
                              "case does not apply",
                          bad);
  return ScalarField(surface, std::move(f));
}

/// Residual of the warp equation for the conformal metric g = e^{2x} ghat:
/// computes K from x, derives f from K, and evaluates Lap_g f - Omega(f).
inline ScalarField warp_residual(const Surface& surface, const WarpParams& w,
                                 const ScalarField& x) {
  const ScalarField k = gaussian_curvature(surface, x);
  const ScalarField f = warp_f_of_curvature(surface, k, w);
  Eigen::VectorXd lap_f = surface.laplacian(f.values);
  Eigen::VectorXd resid(f.values.size());
  for (Eigen::Index i = 0; i < f.values.size(); ++i)
    resid[i] = std::exp(-2.0 * x.values[i]) * lap_f[i] - warp_nonlinearity(f.values[i], w);
  return ScalarField(surface, std::move(resid));
}

struct ScalarIdentityReport {
  ScalarField field;     // node-wise left-hand side
  double mu_bar = 0.0;   // area-weighted mean
  double deviation = 0.0;// area-weighted stdev / |mu_bar|
};

/// Constancy test for the warped product's scalar curvature written in terms
/// of vartheta = f^{-2/p}:
///   (2K + p eps) vt^2 + 2(p+1) vt Lap vt - (p+1)(p+2) g(grad vt, grad vt)
/// must equal the constant mu = 4(1+1/p)c on a solution.
inline ScalarIdentityReport warped_scalar_residual(const Surface& surface, const ScalarField& x,
                                                   const ScalarField& vartheta,
                                                   const WarpParams& w) {
  vartheta.validate();
  if (vartheta.values.minCoeff() <= 0.0)
    throw DomainViolation("vartheta must be positive everywhere");
  const ScalarField k = gaussian_curvature(surface, x);
  Eigen::VectorXd lap_vt = surface.laplacian(vartheta.values);
  const ScalarField grad_vt = grad_norm_sq(surface, x, vartheta);

  const int p = w.p;
  Eigen::VectorXd lhs(vartheta.values.size());
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    const double vt = vartheta.values[i];
    const double lap_g = std::exp(-2.0 * x.values[i]) * lap_vt[i];
    lhs[i] = (2.0 * k.values[i] + p * w.eps) * vt * vt + 2.0 * (p + 1) * vt * lap_g -
             (p + 1.0) * (p + 2.0) * grad_vt.values[i];
  }

  const Eigen::VectorXd wgt =
      (surface.node_mass().array() * (2.0 * x.values.array()).exp()).matrix();
  const double total = wgt.sum();
  ScalarIdentityReport rep;
  rep.mu_bar = (lhs.array() * wgt.array()).sum() / total;
  const double var =
      ((lhs.array() - rep.mu_bar).square() * wgt.array()).sum() / total;
  rep.deviation = std::sqrt(var) / std::max(std::abs(rep.mu_bar), 1e-300);
  rep.field = ScalarField(surface, std::move(lhs));
  return rep;
}

/// Normalization constant of the nonconstant-curvature case: the positive b
/// with vartheta = b |(p-1)K + eps|^{1/(p-1)} for solutions derived from the
/// warp equation with parameter r.
inline double case_b_constant_from_r(const WarpParams& w) {
  return std::pow(2.0 * std::abs(w.r) * (1.0 + 1.0 / w.p) * (w.p - 1), -1.0 / (w.p - 1));
}

/// Same constant estimated from the fields of a solution, as the area-weighted
/// geometric mean of f |K + eps/(p-1)|^{p/(2p-2)} (a smooth estimator that is
/// exact on solutions and robust to discretization noise).
inline double case_b_constant_from_fields(const Surface& surface, const SolutionQuadruple& sol,
                                          const WarpParams& w) {
  const ScalarField k = gaussian_curvature(surface, sol.x);
  const double expo = w.p / (2.0 * (w.p - 1));
  Eigen::VectorXd logs(k.values.size());
  for (Eigen::Index i = 0; i < logs.size(); ++i) {
    const double base = std::abs(k.values[i] + w.eps / (w.p - 1));
    if (!(sol.f.values[i] > 0.0) || base == 0.0)
      throw DomainViolation("estimator undefined: f <= 0 or (p-1)K + eps = 0 at node " +
                            std::to_string(i));
    logs[i] = std::log(sol.f.values[i]) + expo * std::log(base);
  }
  const Eigen::VectorXd wgt =
      (surface.node_mass().array() * (2.0 * sol.x.values.array()).exp()).matrix();
  const double gmean = std::exp((logs.array() * wgt.array()).sum() / wgt.sum());
  return std::pow(gmean * std::pow(w.p - 1.0, expo), -2.0 / w.p);
}

/// mu rescaled to the normalization in which the constant above equals 1;
/// this is the mu that enters the metric-only characterization.
inline double normalized_mu(const WarpParams& w, double case_b_constant) {
  return w.mu / (case_b_constant * case_b_constant);
}

/// Metric-only characterization of harmonic curvature (nonconstant case),
/// node-wise difference of the two sides of
///   (p+1)[2 w LapK - (3p-2) g(gradK, gradK)]
///     = mu_n |w|^{2(p-2)/(p-1)} - (2K + p eps) w^2,   w = (p-1)K + eps,
/// with mu_n the normalized mu. Uses only the metric and (eps, mu_n).
inline ScalarField metric_curvature_residual(const Surface& surface, const ScalarField& x,
                                             const WarpParams& w, double mu_normalized) {
  const ScalarField k = gaussian_curvature(surface, x);
  Eigen::VectorXd lap_k = surface.laplacian(k.values);
  const ScalarField grad_k = grad_norm_sq(surface, x, k);

  const int p = w.p;
  const double expo = 2.0 * (p - 2.0) / (p - 1.0);
  Eigen::VectorXd resid(k.values.size());
  std::vector<int> bad;
  for (Eigen::Index i = 0; i < resid.size(); ++i) {
    const double om = (p - 1) * k.values[i] + w.eps;
    if (om == 0.0) {
      bad.push_back(static_cast<int>(i));
      continue;
    }
    const double lap_g = std::exp(-2.0 * x.values[i]) * lap_k[i];
    const double lhs = (p + 1.0) * (2.0 * om * lap_g - (3.0 * p - 2.0) * grad_k.values[i]);
    const double rhs = mu_normalized * std::pow(std::abs(om), expo) -
                       (2.0 * k.values[i] + p * w.eps) * om * om;
    resid[i] = lhs - rhs;
  }
  if (!bad.empty())
    throw DomainViolation("(p-1)K + eps vanishes at " + std::to_string(bad.size()) + " node(s)",
                          bad);
  return resid.size() ? ScalarField(surface, std::move(resid)) : ScalarField();
}

inline ScalarField metric_curvature_residual(const Surface& surface, const ScalarField& x,
                                             const WarpParams& w) {
  return metric_curvature_residual(surface, x, w,
                                   normalized_mu(w, case_b_constant_from_r(w)));
}

/// Grid-indexed tolerance for the metric-only residual: discretization error
/// scales like ds^2 times the local term magnitude.
inline double metric_residual_grid_tolerance(const Surface& surface, const ScalarField& x,
                                             const WarpParams& w, double mu_normalized) {
  const ScalarField k = gaussian_curvature(surface, x);
  const double expo = 2.0 * (w.p - 2.0) / (w.p - 1.0);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < k.values.size(); ++i) {
    const double om = (w.p - 1) * k.values[i] + w.eps;
    scale = std::max(scale, std::abs((2.0 * k.values[i] + w.p * w.eps) * om * om) +
                                std::abs(mu_normalized) * std::pow(std::abs(om), expo));
  }
  double h2;
  if (surface.zonal()) {
    h2 = surface.grid_spacing() * surface.grid_spacing();
  } else {
    // mean edge length squared as the mesh resolution proxy
    h2 = 4.0 * surface.total_area() / surface.triangles().size();
  }
  return h2 * scale;
}

/// Residual of the normalized Yamabe-type equation Lap f - a f = -a f^{q-1}
/// on g = e^{2x} ghat.
inline ScalarField yamabe_residual(const Surface& surface, const ScalarField& x,
                                   const ScalarField& f, double a, double q) {
  f.validate();
  if (f.values.minCoeff() <= 0.0) throw DomainViolation("f must be positive everywhere");
  if (!(a > 0.0) || !(q > 2.0)) throw ValidationError("yamabe residual requires a > 0, q > 2");
  Eigen::VectorXd lap_f = surface.laplacian(f.values);
  Eigen::VectorXd resid(f.values.size());
  for (Eigen::Index i = 0; i < resid.size(); ++i)
    resid[i] = std::exp(-2.0 * x.values[i]) * lap_f[i] - a * f.values[i] +
               a * std::pow(f.values[i], q - 1.0);
  return ScalarField(surface, std::move(resid));
}

struct HomothetyInvariants {
  double eps_area = 0.0; // eps * area(g), unchanged under constant rescaling of g
  double k_max = 0.0;    // normalized projective pair [K_max : K_min]
  double k_min = 0.0;
};

inline HomothetyInvariants homothety_invariants(const Surface& surface, const ScalarField& x,
                                                const WarpParams& w) {
  const ScalarField k = gaussian_curvature(surface, x);
  HomothetyInvariants h;
  h.eps_area = w.eps * area(surface, x);
  const double kmax = k.values.maxCoeff();
  const double kmin = k.values.minCoeff();
  const double nrm = std::hypot(kmax, kmin);
  h.k_max = nrm > 0 ? kmax / nrm : 0.0;
  h.k_min = nrm > 0 ? kmin / nrm : 0.0;
  return h;
}

/// Sign constraints every accepted compact-case solution must satisfy.
struct SignLedger {
  bool c_positive = false;
  bool eps_positive = false;
  bool a_zero_implies_p2_r_positive = false;
  bool r_negative_implies_p_gt2_K_negative = false;
  bool ok() const {
    return c_positive && eps_positive && a_zero_implies_p2_r_positive &&
           r_negative_implies_p_gt2_K_negative;
  }
};

inline SignLedger sign_ledger(const WarpParams& w, const ScalarField& k) {
  SignLedger s;
  s.c_positive = w.c > 0.0;
  s.eps_positive = w.eps > 0.0;
  const bool a_zero = std::abs(w.a) <= 1e-14 * std::max(1.0, std::abs(w.eps));
  s.a_zero_implies_p2_r_positive = !a_zero || (w.p == 2 && w.r > 0.0);
  s.r_negative_implies_p_gt2_K_negative =
      !(w.r < 0.0) || (w.p > 2 && k.values.maxCoeff() < 0.0);
  return s;
}

/// Throwing variant with a typed error naming the violated constraint.
inline void check_sign_ledger(const WarpParams& w, const ScalarField& k) {
  const SignLedger s = sign_ledger(w, k);
  if (!s.c_positive) throw SignConstraintError("rejected: c must be positive");
  if (!s.eps_positive)
    throw SignConstraintError("rejected: the fibre Einstein constant eps must be positive");
  if (!s.a_zero_implies_p2_r_positive)
    throw SignConstraintError("rejected: a = 0 forces p = 2 and r > 0");
  if (!s.r_negative_implies_p_gt2_K_negative)
    throw SignConstraintError("rejected: r < 0 forces p > 2 and K < 0 everywhere");
}

/// vartheta = f^{-2/p}.
inline ScalarField vartheta_of_f(const Surface& surface, const ScalarField& f, int p) {
  f.validate();
  if (f.values.minCoeff() <= 0.0) throw DomainViolation("f must be positive everywhere");
  return ScalarField(surface, f.values.array().pow(-2.0 / p).matrix());
}

} // namespace wcrv
