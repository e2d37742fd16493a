#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "wcrv/common/errors.hpp"
#include "wcrv/geometry/surface.hpp"

namespace wcrv {

/// Open interval of admissible trivial-branch parameters theta: exactly the
/// set where eps(theta), c(theta) and lambda(theta) are all positive.
struct AdmissibleInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double theta) const { return theta > lo && theta < hi; }
};

inline void check_sign_constraints(int p, double r, double khat) {
  if (p < 2) throw ValidationError("fibre dimension p must be >= 2");
  if (r == 0.0) throw ValidationError("r must be nonzero");
  if (khat == 0.0) throw ValidationError("khat must be nonzero");
  if (r < 0.0 && !(p > 2 && khat < 0.0))
    throw SignConstraintError("negative r requires p > 2 and negative constant curvature");
}

inline AdmissibleInterval admissible_interval(int p, double r, double khat) {
  check_sign_constraints(p, r, khat);
  AdmissibleInterval iv;
  if (r > 0.0) {
    iv.lo = std::max(p * khat / (2.0 * (p + 1) * r), 0.0);
    iv.hi = std::numeric_limits<double>::infinity();
  } else {
    iv.lo = 0.0;
    iv.hi = p * (p - 2) * khat / (2.0 * (p * p - 1.0) * r);
  }
  return iv;
}

/// Constants along the curve of trivial solutions, parametrized by theta > 0.
inline double trivial_eps(int p, double r, double khat, double theta) {
  return 2.0 * (p - 1.0 / p) * r * theta - (p - 1) * khat;
}
inline double trivial_c(int p, double r, double khat, double theta) {
  return 0.25 * p * (2.0 * (p - 1) * r * theta - (p - 2) * khat) *
         std::pow(theta, 2.0 / (p - 1));
}
inline double trivial_lambda(int p, double r, double khat, double theta) {
  return 2.0 * (p - 1.0 / p) * r * theta - (p - 2) * khat;
}
inline double a_of_eps(int p, double eps) { return p * (p - 2) * eps / (4.0 * (p - 1)); }
inline double f_const_of_theta(int p, double theta) {
  return std::pow(theta, p / (2.0 - 2.0 * p));
}

/// Bifurcation offset on the trivial branch for a given eigenvalue:
/// the theta at which lambda(theta) crosses lambda.
inline double delta_of_lambda(int p, double r, double khat, double lambda) {
  check_sign_constraints(p, r, khat);
  const double delta = p * (lambda + (p - 2) * khat) / (2.0 * (p * p - 1.0) * r);
  if (!admissible_interval(p, r, khat).contains(delta))
    throw ValidationError("eigenvalue " + std::to_string(lambda) +
                          " maps to theta outside the admissible interval");
  return delta;
}

/// Constant scalars of one problem instance. eps, c, a, mu are derived from
/// theta = delta + t; q = 2 + 4/p is the Yamabe exponent.
struct WarpParams {
  int p = 2;
  double r = 1.0;
  double khat = 1.0;
  double lambda = std::numeric_limits<double>::quiet_NaN(); // selected eigenvalue, if any
  double delta = 0.0;
  double t = 0.0;

  double theta = 0.0;
  double eps = 0.0;
  double c = 0.0;
  double a = 0.0;
  double q = 4.0;
  double mu = 0.0;
  bool admissible = false;

  static WarpParams from_theta(int p, double r, double khat, double theta) {
    check_sign_constraints(p, r, khat);
    if (theta <= 0.0) throw ValidationError("theta must be positive");
    WarpParams w;
    w.p = p;
    w.r = r;
    w.khat = khat;
    w.delta = theta;
    w.t = 0.0;
    w.derive();
    return w;
  }

  static WarpParams at_bifurcation(int p, double r, double khat, double lambda) {
    WarpParams w = from_theta(p, r, khat, delta_of_lambda(p, r, khat, lambda));
    w.lambda = lambda;
    return w;
  }

  WarpParams shifted(double new_t) const {
    WarpParams w = *this;
    w.t = new_t;
    w.derive();
    return w;
  }

  void derive() {
    theta = delta + t;
    if (theta <= 0.0) throw ValidationError("theta = delta + t must stay positive");
    eps = trivial_eps(p, r, khat, theta);
    c = trivial_c(p, r, khat, theta);
    a = a_of_eps(p, eps);
    q = 2.0 + 4.0 / p;
    mu = 4.0 * (1.0 + 1.0 / p) * c;
    admissible = admissible_interval(p, r, khat).contains(theta);
  }
};

/// One point of the trivial-solution curve.
struct TrivialBranchPoint {
  double theta = 0.0;
  double eps = 0.0;
  double c = 0.0;
  double a = 0.0;
  double lambda = 0.0;
  double f_const = 0.0;
  bool admissible = false;

  static TrivialBranchPoint at(int p, double r, double khat, double theta) {
    check_sign_constraints(p, r, khat);
    TrivialBranchPoint b;
    b.theta = theta;
    b.eps = trivial_eps(p, r, khat, theta);
    b.c = trivial_c(p, r, khat, theta);
    b.a = a_of_eps(p, b.eps);
    b.lambda = trivial_lambda(p, r, khat, theta);
    b.f_const = f_const_of_theta(p, theta);
    b.admissible = admissible_interval(p, r, khat).contains(theta);
    return b;
  }
};

/// A solution of the warp system: conformal exponent x, warping power f,
/// fibre Einstein constant eps and the constant c.
struct SolutionQuadruple {
  ScalarField x;
  ScalarField f;
  double eps = 0.0;
  double c = 0.0;
};

} // namespace wcrv
