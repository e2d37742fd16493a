#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "wcrv/geometry/surface.hpp"

namespace wcrv {

/// Eigenvalue of -Lap restricted to the invariant subspace, with a
/// mass-normalized eigenfunction and the multiplicity of its cluster inside
/// that subspace.
struct EigenPair {
  double lambda = 0.0;
  ScalarField phi;
  int multiplicity_in_subspace = 1;
};

struct EigenSettings {
  double residual_tol = 1e-8;     // relative to max(1, lambda)
  double cluster_rel_gap = 1e-6;  // eigenvalues closer than this are one cluster
  int max_iterations = 200;       // subspace iteration cap (mesh backend)
};

namespace detail {

inline void cluster_multiplicities(std::vector<EigenPair>& pairs, double rel_gap) {
  const size_t n = pairs.size();
  size_t i = 0;
  while (i < n) {
    size_t j = i + 1;
    const double scale = std::max(1.0, std::abs(pairs[i].lambda));
    while (j < n && std::abs(pairs[j].lambda - pairs[j - 1].lambda) <= rel_gap * scale) ++j;
    for (size_t k = i; k < j; ++k) pairs[k].multiplicity_in_subspace = static_cast<int>(j - i);
    i = j;
  }
}

/// Dense solve of -S u = lambda M u via the symmetric similarity
/// B = M^{-1/2} (-S) M^{-1/2}. Intended for the zonal kinds (N <= 4096).
inline std::vector<EigenPair> dense_eigenpairs(const Surface& surface, int count) {
  const int n = surface.node_count();
  if (n > 4097) throw SolverError("dense eigensolver limited to 4096 cells");
  const Eigen::VectorXd isq = surface.node_mass().array().rsqrt();
  Eigen::MatrixXd b = Eigen::MatrixXd(-surface.stiffness_matrix());
  b = isq.asDiagonal() * b * isq.asDiagonal();
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed to converge");

  std::vector<EigenPair> out;
  const bool even_only = surface.kind() == SurfaceKind::ZonalSphere;
  for (int k = 0; k < n && static_cast<int>(out.size()) < count; ++k) {
    Eigen::VectorXd u = isq.asDiagonal() * es.eigenvectors().col(k);
    if (even_only) {
      // The sphere's invariant subspace of Section-style constructions is the
      // antipodally even zonal functions; drop odd-parity modes.
      Eigen::VectorXd flipped(n);
      for (int i = 0; i < n; ++i) flipped[i] = u[surface.antipode(i)];
      const double odd = surface.mass_norm(u - flipped);
      if (odd > 1e-6 * surface.mass_norm(u)) continue;
    }
    EigenPair p;
    p.lambda = std::max(0.0, es.eigenvalues()[k]);
    u /= surface.mass_norm(u);
    if (u[0] < 0) u = -u; // deterministic sign
    p.phi = ScalarField(surface, std::move(u));
    out.push_back(std::move(p));
  }
  return out;
}

/// Shift-invert subspace iteration with Rayleigh-Ritz for the mesh backend:
/// factor (-S + sigma M) once, iterate X <- solve(M X), M-orthonormalize.
inline std::vector<EigenPair> mesh_eigenpairs(const Surface& surface, int count,
                                              const EigenSettings& cfg) {
  const int n = surface.node_count();
  const int m = std::min(n, count + std::max(8, count / 2));
  const Eigen::SparseMatrix<double> a = -surface.stiffness_matrix();
  const Eigen::VectorXd& mass = surface.node_mass();

  Eigen::SparseMatrix<double> shifted = a;
  const double sigma = 1e-3 * a.coeffs().abs().maxCoeff() / mass.maxCoeff();
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma * mass[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw SolverError("mesh eigensolver: factorization failed");

  // Deterministic pseudo-random start block.
  Eigen::MatrixXd x(n, m);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      x(i, j) = (static_cast<double>(state >> 11) / 9007199254740992.0) - 0.5;
    }

  auto m_orthonormalize = [&](Eigen::MatrixXd& y) {
    for (int j = 0; j < y.cols(); ++j) {
      for (int k = 0; k < j; ++k) {
        const double c = (y.col(k).array() * mass.array() * y.col(j).array()).sum();
        y.col(j) -= c * y.col(k);
      }
      const double nrm = std::sqrt((y.col(j).array().square() * mass.array()).sum());
      y.col(j) /= nrm;
    }
  };

  Eigen::VectorXd ritz_prev = Eigen::VectorXd::Constant(m, 1e300);
  Eigen::MatrixXd vecs;
  Eigen::VectorXd ritz;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    Eigen::MatrixXd y = ldlt.solve((x.array().colwise() * mass.array()).matrix());
    m_orthonormalize(y);
    // Rayleigh-Ritz on the iterated block.
    Eigen::MatrixXd ay = a * y;
    Eigen::MatrixXd h = y.transpose() * ay;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    ritz = es.eigenvalues();
    vecs = y * es.eigenvectors();
    x = vecs;
    const double drift = (ritz.head(count) - ritz_prev.head(count)).cwiseAbs().maxCoeff();
    ritz_prev = ritz;
    if (drift < 1e-12 * std::max(1.0, ritz[count - 1])) break;
  }

  std::vector<EigenPair> out;
  for (int k = 0; k < count; ++k) {
    EigenPair p;
    p.lambda = std::max(0.0, ritz[k]);
    Eigen::VectorXd u = vecs.col(k);
    const Eigen::VectorXd resid = a * u - p.lambda * (mass.array() * u.array()).matrix();
    const double rel = resid.norm() / std::max(1.0, p.lambda);
    if (rel > cfg.residual_tol * u.norm() * mass.maxCoeff() * 1e3)
      throw SolverError("mesh eigensolver did not converge after " + std::to_string(it) +
                        " iterations (mode " + std::to_string(k) + ", residual " +
                        std::to_string(rel) + ")");
    if (u[0] < 0) u = -u;
    p.phi = ScalarField(surface, std::move(u));
    out.push_back(std::move(p));
  }
  return out;
}

} // namespace detail

/// The `count` smallest eigenvalues of -Lap on the invariant subspace
/// (zonal and antipodally even for the sphere; all functions for meshes),
/// sorted ascending, with cluster multiplicities.
inline std::vector<EigenPair> eigenpairs(const Surface& surface, int count,
                                         const EigenSettings& cfg = {}) {
  if (count < 1) throw ValidationError("eigenpair count must be >= 1");
  std::vector<EigenPair> pairs = surface.zonal()
                                     ? detail::dense_eigenpairs(surface, count)
                                     : detail::mesh_eigenpairs(surface, count, cfg);
  detail::cluster_multiplicities(pairs, cfg.cluster_rel_gap);
  return pairs;
}

/// For positive khat the bifurcation eigenvalues are exactly 2l(2l+1) khat;
/// snap a discrete eigenvalue to that family (returns l, or nullopt).
inline std::optional<int> snap_positive_curvature_index(double lambda, double khat,
                                                        double rel_tol = 1e-3) {
  if (khat <= 0 || lambda <= 0) return std::nullopt;
  const double x = lambda / khat; // 2l(2l+1) = 4l^2 + 2l
  const int l = static_cast<int>(std::lround((-1.0 + std::sqrt(1.0 + 4.0 * x)) / 4.0));
  if (l < 1) return std::nullopt;
  const double nominal = 2.0 * l * (2.0 * l + 1.0) * khat;
  if (std::abs(lambda - nominal) > rel_tol * nominal) return std::nullopt;
  return l;
}

/// Filters eigenpairs to those admissible as bifurcation eigenvalues for the
/// given fibre dimension p and sign parameter r:
///   khat > 0: lambda = 2l(2l+1) khat for a positive integer l;
///   khat < 0: [lambda + (p-2) khat] r > 0 and simple in the subspace.
/// In both cases lambda must be positive and different from 2 khat.
inline std::vector<EigenPair> admissible_lambdas(const Surface& surface, int p, double r,
                                                 const std::vector<EigenPair>& pairs) {
  if (p < 2) throw ValidationError("fibre dimension p must be >= 2");
  if (r == 0.0) throw ValidationError("r must be nonzero");
  const double khat = surface.khat();
  if (r < 0.0 && !(p > 2 && khat < 0.0))
    throw SignConstraintError("negative r requires p > 2 and negative constant curvature");

  std::vector<EigenPair> out;
  for (const EigenPair& pr : pairs) {
    if (pr.lambda <= 0.0) continue;
    if (std::abs(pr.lambda - 2.0 * khat) <= 1e-9 * std::max(1.0, std::abs(khat))) continue;
    if (khat > 0.0) {
      if (snap_positive_curvature_index(pr.lambda, khat)) out.push_back(pr);
    } else {
      if ((pr.lambda + (p - 2) * khat) * r > 0.0 && pr.multiplicity_in_subspace == 1)
        out.push_back(pr);
    }
  }
  return out;
}

} // namespace wcrv
