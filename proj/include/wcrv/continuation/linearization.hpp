#pragma once

#include <Eigen/Sparse>

#include <cmath>
#include <optional>
#include <vector>

#include "wcrv/residuals/warp_params.hpp"
#include "wcrv/spectra/eigenpairs.hpp"

namespace wcrv {

/// Scalar prefactor sigma(t) with
///   sigma * dL^t_0 = [Lap + lambda(theta)] [Lap + 2 khat],  theta = delta + t.
inline double linearization_prefactor(const WarpParams& w) {
  return 4.0 * w.r * (1.0 - 1.0 / (static_cast<double>(w.p) * w.p)) *
         std::pow(w.theta, (2.0 - 3.0 * w.p) / (2.0 - 2.0 * w.p));
}

/// Analytic Jacobian of the warp residual at the trivial solution x = 0,
/// shift t, as a sparse matrix on the discrete function space. It factors as
/// a product of two commuting shifted Laplacians divided by sigma(t); this is
/// an exact identity of the discrete algebra, so it doubles as the oracle for
/// the hand-assembled Jacobian.
inline Eigen::SparseMatrix<double> linearization_at_trivial(const Surface& surface,
                                                            const WarpParams& params,
                                                            double t) {
  const WarpParams w = params.shifted(t);
  const int n = surface.node_count();
  const Eigen::SparseMatrix<double>& lap = surface.laplacian_matrix();
  Eigen::SparseMatrix<double> id(n, n);
  id.setIdentity();
  const double lam_theta = trivial_lambda(w.p, w.r, w.khat, w.theta);
  Eigen::SparseMatrix<double> left = lap + lam_theta * id;
  Eigen::SparseMatrix<double> right = lap + 2.0 * w.khat * id;
  Eigen::SparseMatrix<double> prod = (left * right).pruned();
  return prod / linearization_prefactor(w);
}

/// One detected crossing of the trivial branch with an admissible eigenvalue.
struct BifurcationPoint {
  double lambda = 0.0;          // nominal eigenvalue (exact 2l(2l+1)khat when khat > 0)
  double lambda_discrete = 0.0; // eigenvalue of the discrete operator
  double theta_star = 0.0;      // crossing parameter from the nominal eigenvalue
  double theta_star_discrete = 0.0; // bisection-refined crossing of the discrete kernel
  int harmonic_index = 0;           // l for khat > 0, else the subspace index
  ScalarField kernel;               // unit-mass-norm kernel eigenfunction
};

/// Locations on the trivial branch where lambda(theta) crosses an admissible
/// eigenvalue, for theta in [theta_lo, theta_hi]. The crossing reported in
/// theta_star inverts the exact linear relation at the nominal eigenvalue;
/// theta_star_discrete is refined by bisection on the signed near-kernel
/// eigenvalue of the analytic linearization.
inline std::vector<BifurcationPoint> bifurcation_scan(const Surface& surface, int p, double r,
                                                      double theta_lo, double theta_hi,
                                                      int eigen_count = 16) {
  check_sign_constraints(p, r, surface.khat());
  const double khat = surface.khat();
  const AdmissibleInterval iv = admissible_interval(p, r, khat);

  std::vector<EigenPair> pairs = eigenpairs(surface, eigen_count);
  std::vector<EigenPair> adm = admissible_lambdas(surface, p, r, pairs);

  std::vector<BifurcationPoint> out;
  for (size_t idx = 0; idx < adm.size(); ++idx) {
    const EigenPair& pr = adm[idx];
    BifurcationPoint b;
    b.lambda_discrete = pr.lambda;
    if (khat > 0.0) {
      const auto l = snap_positive_curvature_index(pr.lambda, khat);
      b.harmonic_index = *l;
      b.lambda = 2.0 * (*l) * (2.0 * (*l) + 1.0) * khat;
    } else {
      b.harmonic_index = static_cast<int>(idx);
      b.lambda = pr.lambda;
    }
    b.kernel = pr.phi;

    b.theta_star = p * (b.lambda + (p - 2) * khat) / (2.0 * (p * p - 1.0) * r);

    // Bisection on g(theta) = lambda(theta) - lambda_discrete, the signed
    // eigenvalue of the tracked kernel mode of the linearization (up to the
    // positive factor (2 khat - lambda_discrete)/sigma).
    auto g = [&](double th) { return trivial_lambda(p, r, khat, th) - pr.lambda; };
    double lo = std::max(theta_lo, std::nextafter(iv.lo, theta_hi));
    double hi = std::min(theta_hi, iv.hi);
    if (!(lo < hi) || g(lo) * g(hi) > 0.0) {
      if (b.theta_star < theta_lo || b.theta_star > theta_hi || !iv.contains(b.theta_star))
        continue; // crossing outside the requested window
      b.theta_star_discrete = b.theta_star;
      out.push_back(std::move(b));
      continue;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(lo) * g(mid) <= 0.0 ? hi : lo) = mid;
    }
    b.theta_star_discrete = 0.5 * (lo + hi);
    if (b.theta_star >= theta_lo && b.theta_star <= theta_hi) out.push_back(std::move(b));
  }
  return out;
}

} // namespace wcrv
