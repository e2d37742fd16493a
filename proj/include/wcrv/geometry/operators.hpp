#pragma once

#include "wcrv/geometry/surface.hpp"

namespace wcrv {

/// Laplacian of u w.r.t. the background metric ghat.
inline ScalarField laplacian_apply(const Surface& surface, const ScalarField& u) {
  u.validate();
  if (u.surface != &surface) throw ValidationError("field does not live on this surface");
  return ScalarField(surface, surface.laplacian(u.values));
}

/// Gaussian curvature of g = e^{2x} ghat:  K = e^{-2x} (khat - Lap x).
inline ScalarField gaussian_curvature(const Surface& surface, const ScalarField& x) {
  x.validate();
  Eigen::VectorXd lx = surface.laplacian(x.values);
  Eigen::VectorXd k =
      ((-2.0 * x.values.array()).exp() * (surface.khat() - lx.array())).matrix();
  return ScalarField(surface, std::move(k));
}

/// Integral of u over (M, g) with g = e^{2x} ghat; dA_g = e^{2x} dA_ghat.
inline double integrate(const Surface& surface, const ScalarField& x, const ScalarField& u) {
  x.validate();
  u.validate();
  return (u.values.array() * (2.0 * x.values.array()).exp() *
          surface.node_mass().array())
      .sum();
}

inline double area(const Surface& surface, const ScalarField& x) {
  return integrate(surface, x, ScalarField::constant(surface, 1.0));
}

/// Node-wise g(grad u, grad u) for g = e^{2x} ghat; the inverse metric scales
/// by e^{-2x}.
inline ScalarField grad_norm_sq(const Surface& surface, const ScalarField& x,
                                const ScalarField& u) {
  x.validate();
  u.validate();
  Eigen::VectorXd q = surface.grad_norm_sq_hat(u.values);
  q.array() *= (-2.0 * x.values.array()).exp();
  return ScalarField(surface, std::move(q));
}

} // namespace wcrv
