#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wcrv/continuation/linearization.hpp"
#include "wcrv/geometry/zonal_fit.hpp"
#include "wcrv/residuals/residuals.hpp"

namespace wcrv {

struct NewtonSettings {
  double tol = 1e-10;            // max-norm residual convergence
  int max_iter = 25;
  double ds = 2e-3;              // initial arclength step
  double ds_min = 1e-6;
  double ds_max = 2e-2;
  double switch_amplitude = 1e-3;// kernel amplitude of the first branch point
  double max_arclength = 0.05;
  int max_points = 64;

  void validate() const {
    if (!(tol > 0)) throw ValidationError("NewtonSettings: tol must be positive");
    if (!(0 < ds_min && ds_min <= ds && ds <= ds_max))
      throw ValidationError("NewtonSettings: need 0 < ds_min <= ds <= ds_max");
  }
};

enum class BranchTermination {
  MaxArclength,
  MaxPoints,
  AdmissibilityBoundary,
  PositivityLoss,
  NewtonFailure,
};

inline const char* to_string(BranchTermination t) {
  switch (t) {
    case BranchTermination::MaxArclength: return "max-arclength";
    case BranchTermination::MaxPoints: return "max-points";
    case BranchTermination::AdmissibilityBoundary: return "admissibility-boundary";
    case BranchTermination::PositivityLoss: return "positivity-loss";
    case BranchTermination::NewtonFailure: return "newton-failure";
  }
  return "?";
}

struct BranchPointDiagnostics {
  int newton_iterations = 0;
  double residual_inf = 0.0;
  double jacobian_sigma_min = 0.0;
};

struct BranchPoint {
  Eigen::VectorXd x; // unknown field (conformal exponent, or f for the Yamabe case)
  double t = 0.0;    // branch parameter
  double arclength = 0.0;
  BranchPointDiagnostics diag;
};

struct BranchState {
  std::vector<BranchPoint> points;
  Eigen::VectorXd tangent_x;
  double tangent_t = 0.0;
  BranchTermination termination = BranchTermination::MaxPoints;
  std::string termination_detail;
};

namespace detail {

/// Bordered Newton step: solve the (n+1)-square sparse system
///   [ J    L_t ] [dx]   [-F ]
///   [ c^T  ct  ] [dt] = [-g ].
inline bool solve_bordered(const Eigen::SparseMatrix<double>& jac, const Eigen::VectorXd& lt,
                           const Eigen::VectorXd& c, double ct, const Eigen::VectorXd& f,
                           double g, Eigen::VectorXd& dx, double& dt) {
  const int n = static_cast<int>(f.size());
  Eigen::SparseMatrix<double> big(n + 1, n + 1);
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(jac.nonZeros() + 2 * n + 1);
  for (int k = 0; k < jac.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(jac, k); it; ++it)
      ts.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i) {
    if (lt[i] != 0.0) ts.emplace_back(i, n, lt[i]);
    if (c[i] != 0.0) ts.emplace_back(n, i, c[i]);
  }
  ts.emplace_back(n, n, ct);
  big.setFromTriplets(ts.begin(), ts.end());

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(big);
  if (lu.info() != Eigen::Success) return false;
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = -f;
  rhs[n] = -g;
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
  dx = sol.head(n);
  dt = sol[n];
  return true;
}

/// Smallest-singular-value estimate of a square sparse matrix by inverse
/// power iteration on J^T J (both factors solved by sparse LU).
inline double sigma_min_estimate(const Eigen::SparseMatrix<double>& jac, int iterations = 8) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
  if (lu.info() != Eigen::Success) return 0.0;
  Eigen::SparseMatrix<double> jt = jac.transpose();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lut(jt);
  if (lut.info() != Eigen::Success) return 0.0;

  const int n = static_cast<int>(jac.rows());
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 0.3, 1.0).array().sin().matrix();
  v.normalize();
  double inv_norm = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd w = lu.solve(lut.solve(v)); // (J^T J)^{-1} v
    inv_norm = w.norm();
    if (!(inv_norm > 0.0) || !w.allFinite()) return 0.0;
    v = w / inv_norm;
  }
  return 1.0 / std::sqrt(inv_norm);
}

} // namespace detail

/// Warp equation L(x, t) = 0 over the conformal exponent x, with branch
/// parameter t shifting theta = delta + t. Jacobians are assembled
/// analytically from the exact node-wise chain rule.
class WarpProblem {
public:
  WarpProblem(const Surface& surface, const WarpParams& params)
      : surface_(&surface), base_(params) {
    check_sign_constraints(params.p, params.r, params.khat);
  }

  const Surface& surface() const { return *surface_; }
  int dim() const { return surface_->node_count(); }
  WarpParams params_at(double t) const { return base_.shifted(t); }

  Eigen::VectorXd residual(const Eigen::VectorXd& x, double t) const {
    return warp_residual(*surface_, base_.shifted(t), ScalarField(*surface_, x)).values;
  }

  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x, double t) const {
    const WarpParams w = base_.shifted(t);
    const int n = dim();
    const Eigen::SparseMatrix<double>& lap = surface_->laplacian_matrix();

    const Eigen::ArrayXd e2 = (-2.0 * x.array()).exp();
    const Eigen::ArrayXd k = e2 * (w.khat - (lap * x).array());
    const double denom = 2.0 * w.r * (1.0 + 1.0 / w.p);
    const double beta = w.p / (2.0 - 2.0 * w.p);
    Eigen::ArrayXd shifted_k = k + w.eps / (w.p - 1);
    Eigen::ArrayXd f = (shifted_k / denom).pow(beta);

    Eigen::ArrayXd omega_prime(n);
    for (int i = 0; i < n; ++i) omega_prime[i] = warp_nonlinearity_prime(f[i], w);

    // df/dx = diag(g1) dK/dx, dK/dx = -2 diag(K) - diag(e^{-2x}) Lap.
    const Eigen::ArrayXd g1 = beta * f / shifted_k;
    const Eigen::ArrayXd a1 = -2.0 * g1 * k;       // diagonal part of df/dx
    const Eigen::ArrayXd a2 = -g1 * e2;            // row scaling of Lap in df/dx

    Eigen::SparseMatrix<double> df =
        Eigen::SparseMatrix<double>((a2.matrix().asDiagonal() * lap));
    df += Eigen::SparseMatrix<double>(a1.matrix().asDiagonal());

    // J = -2 diag(e^{-2x} Lap f) + diag(e^{-2x}) Lap df - diag(Omega') df
    const Eigen::ArrayXd d0 = -2.0 * e2 * (lap * f.matrix()).array();
    Eigen::SparseMatrix<double> jac =
        Eigen::SparseMatrix<double>(e2.matrix().asDiagonal() * lap) * df;
    jac -= Eigen::SparseMatrix<double>(omega_prime.matrix().asDiagonal()) * df;
    jac += Eigen::SparseMatrix<double>(d0.matrix().asDiagonal());
    return jac;
  }

  Eigen::VectorXd residual_t(const Eigen::VectorXd& x, double t) const {
    const WarpParams w = base_.shifted(t);
    const int n = dim();
    const Eigen::SparseMatrix<double>& lap = surface_->laplacian_matrix();

    const Eigen::ArrayXd e2 = (-2.0 * x.array()).exp();
    const Eigen::ArrayXd k = e2 * (w.khat - (lap * x).array());
    const double denom = 2.0 * w.r * (1.0 + 1.0 / w.p);
    const double beta = w.p / (2.0 - 2.0 * w.p);
    const Eigen::ArrayXd shifted_k = k + w.eps / (w.p - 1);
    const Eigen::ArrayXd f = (shifted_k / denom).pow(beta);

    const double eps_t = 2.0 * (w.p - 1.0 / w.p) * w.r;
    const double a_t = w.p * (w.p - 2) * eps_t / (4.0 * (w.p - 1));
    const double c_t = 0.25 * w.p *
                       (2.0 * (w.p - 1) * w.r * std::pow(w.theta, 2.0 / (w.p - 1)) +
                        (2.0 * (w.p - 1) * w.r * w.theta - (w.p - 2) * w.khat) *
                            (2.0 / (w.p - 1)) * std::pow(w.theta, 2.0 / (w.p - 1) - 1.0));

    const Eigen::ArrayXd f_t = beta * f / shifted_k * (eps_t / (w.p - 1));
    Eigen::VectorXd lt(n);
    const Eigen::VectorXd lap_ft = lap * f_t.matrix();
    for (int i = 0; i < n; ++i) {
      const double omega_t_at_fixed_f =
          a_t * f[i] - c_t * std::pow(f[i], 1.0 + 4.0 / w.p);
      lt[i] = e2[i] * lap_ft[i] - warp_nonlinearity_prime(f[i], w) * f_t[i] -
              omega_t_at_fixed_f;
    }
    return lt;
  }

  /// Admissibility of a candidate point; sets `reason` when rejecting.
  bool validate_point(const Eigen::VectorXd& x, double t, std::string* reason) const {
    const WarpParams w = base_.shifted(t);
    if (!w.admissible) {
      if (reason) *reason = "theta left the admissible interval";
      return false;
    }
    try {
      const ScalarField k = gaussian_curvature(*surface_, ScalarField(*surface_, x));
      warp_f_of_curvature(*surface_, k, w);
    } catch (const DomainViolation& e) {
      if (reason) *reason = e.what();
      return false;
    }
    return true;
  }

private:
  const Surface* surface_;
  WarpParams base_;
};

/// Normalized Yamabe equation Lap f - a f + a f^{q-1} = 0 on the background
/// metric, with the coefficient a as branch parameter.
class YamabeProblem {
public:
  YamabeProblem(const Surface& surface, double q) : surface_(&surface), q_(q) {
    if (!(q > 2.0)) throw ValidationError("Yamabe exponent must satisfy q > 2");
  }

  const Surface& surface() const { return *surface_; }
  int dim() const { return surface_->node_count(); }
  double exponent() const { return q_; }

  Eigen::VectorXd residual(const Eigen::VectorXd& f, double a) const {
    Eigen::VectorXd res = surface_->laplacian(f);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (!(f[i] > 0.0)) throw DomainViolation("f lost positivity", {static_cast<int>(i)});
      res[i] += -a * f[i] + a * std::pow(f[i], q_ - 1.0);
    }
    return res;
  }

  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& f, double a) const {
    Eigen::ArrayXd diag(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
      diag[i] = -a + a * (q_ - 1.0) * std::pow(f[i], q_ - 2.0);
    Eigen::SparseMatrix<double> jac = surface_->laplacian_matrix();
    jac += Eigen::SparseMatrix<double>(diag.matrix().asDiagonal());
    return jac;
  }

  Eigen::VectorXd residual_t(const Eigen::VectorXd& f, double /*a*/) const {
    Eigen::VectorXd lt(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) lt[i] = -f[i] + std::pow(f[i], q_ - 1.0);
    return lt;
  }

  bool validate_point(const Eigen::VectorXd& f, double a, std::string* reason) const {
    if (!(a > 0.0)) {
      if (reason) *reason = "coefficient a left (0, inf)";
      return false;
    }
    if (f.minCoeff() <= 0.0) {
      if (reason) *reason = "f lost positivity";
      return false;
    }
    return true;
  }

private:
  const Surface* surface_;
  double q_;
};

namespace detail {

template <class Problem>
struct CorrectorResult {
  bool converged = false;
  int iterations = 0;
  double residual_inf = 0.0;
};

/// Newton corrector for [residual; linear constraint] with the constraint
/// hyperplane fixed by (c, ct, rhs): <c, x>_M-free + ct * t = rhs.
template <class Problem>
CorrectorResult<Problem> newton_correct(const Problem& prob, Eigen::VectorXd& x, double& t,
                                        const Eigen::VectorXd& c, double ct, double rhs,
                                        const NewtonSettings& cfg) {
  CorrectorResult<Problem> out;
  for (int it = 0; it < cfg.max_iter; ++it) {
    Eigen::VectorXd f;
    try {
      f = prob.residual(x, t);
    } catch (const DomainViolation&) {
      return out; // leave unconverged; caller shrinks the step
    }
    const double g = c.dot(x) + ct * t - rhs;
    out.residual_inf = f.cwiseAbs().maxCoeff();
    out.iterations = it;
    if (out.residual_inf < cfg.tol && std::abs(g) < cfg.tol) {
      out.converged = true;
      return out;
    }
    Eigen::VectorXd dx;
    double dt = 0.0;
    if (!solve_bordered(prob.jacobian(x, t), prob.residual_t(x, t), c, ct, f, g, dx, dt))
      return out;
    x += dx;
    t += dt;
    if (!x.allFinite() || !std::isfinite(t)) return out;
  }
  return out;
}

} // namespace detail

/// Pseudo-arclength continuation of Problem::residual(x, t) = 0 starting from
/// a simple bifurcation point on the trivial family (x_triv(t), t):
/// the predictor leaves along the kernel direction, the first corrector fixes
/// the kernel amplitude (hyperplane orthogonal to the kernel predictor, t
/// free), and subsequent steps use Keller's tangent hyperplane with the
/// mass-weighted norm on x plus |t|.
template <class Problem>
BranchState trace_from_bifurcation(const Problem& prob, const Eigen::VectorXd& kernel,
                                   const Eigen::VectorXd& x_trivial, double t0,
                                   const NewtonSettings& cfg, int direction = +1) {
  cfg.validate();
  const Surface& surface = prob.surface();
  const Eigen::VectorXd mass = surface.node_mass();
  const double mass_total = mass.sum();
  auto dot = [&](const Eigen::VectorXd& ax, double at, const Eigen::VectorXd& bx, double bt) {
    return (ax.array() * mass.array() * bx.array()).sum() / mass_total + at * bt;
  };

  BranchState branch;
  Eigen::VectorXd u = kernel / surface.mass_norm(kernel);

  // First point: amplitude-constrained corrector in the hyperplane orthogonal
  // to the kernel predictor (which is itself orthogonal to the trivial-branch
  // tangent (0, 1)).
  const double amp = direction * cfg.switch_amplitude;
  Eigen::VectorXd x = x_trivial + amp * u;
  double t = t0;
  Eigen::VectorXd c_amp = (u.array() * mass.array()).matrix() / mass_total;
  const double amp_rhs = c_amp.dot(x);
  auto first = detail::newton_correct(prob, x, t, c_amp, 0.0, amp_rhs, cfg);
  if (!first.converged) {
    branch.termination = BranchTermination::NewtonFailure;
    branch.termination_detail = "branch switching failed to converge";
    return branch;
  }
  std::string reason;
  if (!prob.validate_point(x, t, &reason)) {
    branch.termination = BranchTermination::AdmissibilityBoundary;
    branch.termination_detail = reason;
    return branch;
  }

  auto push_point = [&](const Eigen::VectorXd& px, double pt, double s,
                        const detail::CorrectorResult<Problem>& cr) {
    BranchPoint bp;
    bp.x = px;
    bp.t = pt;
    bp.arclength = s;
    bp.diag.newton_iterations = cr.iterations;
    bp.diag.residual_inf = cr.residual_inf;
    bp.diag.jacobian_sigma_min = detail::sigma_min_estimate(prob.jacobian(px, pt));
    branch.points.push_back(std::move(bp));
  };

  double s = std::sqrt(dot(x - x_trivial, t - t0, x - x_trivial, t - t0));
  push_point(x, t, s, first);

  // Tangent at the first point, oriented away from the bifurcation point.
  Eigen::VectorXd tx = x - x_trivial;
  double tt = t - t0;
  {
    Eigen::VectorXd cx = (tx.array() * mass.array()).matrix() / mass_total;
    Eigen::VectorXd dx;
    double dt = 0.0;
    if (detail::solve_bordered(prob.jacobian(x, t), prob.residual_t(x, t), cx, tt,
                               Eigen::VectorXd::Zero(prob.dim()), -1.0, dx, dt)) {
      tx = dx;
      tt = dt;
    }
    const double nrm = std::sqrt(dot(tx, tt, tx, tt));
    tx /= nrm;
    tt /= nrm;
    if (dot(tx, tt, x - x_trivial, t - t0) < 0.0) {
      tx = -tx;
      tt = -tt;
    }
  }

  double ds = cfg.ds;
  while (true) {
    if (static_cast<int>(branch.points.size()) >= cfg.max_points) {
      branch.termination = BranchTermination::MaxPoints;
      break;
    }
    if (s >= cfg.max_arclength) {
      branch.termination = BranchTermination::MaxArclength;
      break;
    }

    bool accepted = false;
    while (true) {
      Eigen::VectorXd xp = x + ds * tx;
      double tp = t + ds * tt;
      Eigen::VectorXd cx = (tx.array() * mass.array()).matrix() / mass_total;
      const double rhs = cx.dot(xp) + tt * tp;
      auto res = detail::newton_correct(prob, xp, tp, cx, tt, rhs, cfg);
      std::string why;
      if (res.converged && prob.validate_point(xp, tp, &why)) {
        const double step = std::sqrt(dot(xp - x, tp - t, xp - x, tp - t));
        x = xp;
        t = tp;
        s += step;
        push_point(x, t, s, res);
        // Fresh tangent, oriented consistently (ties toward increasing t).
        Eigen::VectorXd dx;
        double dt = 0.0;
        if (detail::solve_bordered(prob.jacobian(x, t), prob.residual_t(x, t), cx, tt,
                                   Eigen::VectorXd::Zero(prob.dim()), -1.0, dx, dt)) {
          const double nrm = std::sqrt(dot(dx, dt, dx, dt));
          dx /= nrm;
          dt /= nrm;
          double orient = dot(dx, dt, tx, tt);
          if (orient == 0.0) orient = dt;
          if (orient < 0.0) {
            dx = -dx;
            dt = -dt;
          }
          tx = dx;
          tt = dt;
        }
        if (res.iterations <= 4) ds = std::min(cfg.ds_max, 1.3 * ds);
        accepted = true;
        break;
      }
      if (res.converged && !why.empty()) {
        // Converged to an inadmissible point: the branch hit a boundary.
        branch.termination = BranchTermination::PositivityLoss;
        if (why.find("admissible interval") != std::string::npos ||
            why.find("left (0") != std::string::npos)
          branch.termination = BranchTermination::AdmissibilityBoundary;
        branch.termination_detail = why;
        branch.tangent_x = tx;
        branch.tangent_t = tt;
        return branch;
      }
      if (ds / 2.0 < cfg.ds_min) {
        branch.termination = BranchTermination::NewtonFailure;
        branch.termination_detail = "step halving exhausted at arclength " + std::to_string(s);
        branch.tangent_x = tx;
        branch.tangent_t = tt;
        return branch;
      }
      ds /= 2.0;
    }
    if (!accepted) break;
  }
  branch.tangent_x = tx;
  branch.tangent_t = tt;
  return branch;
}

/// Branch of the warp equation emanating from the trivial solution at the
/// bifurcation parameter carried by `params` (delta set from the eigenvalue,
/// t = 0), along the kernel eigenfunction.
inline BranchState trace_branch(const Surface& surface, const WarpParams& params,
                                const ScalarField& kernel, const NewtonSettings& settings,
                                int direction = +1) {
  WarpProblem prob(surface, params);
  return trace_from_bifurcation(prob, kernel.values,
                                Eigen::VectorXd::Zero(surface.node_count()), 0.0, settings,
                                direction);
}

/// Branch of nonconstant positive solutions of the normalized Yamabe equation
/// bifurcating from f = 1 where a (q - 2) crosses the given eigenvalue.
inline BranchState yamabe_branch(const Surface& surface, double lambda1, double q,
                                 const NewtonSettings& settings, int direction = +1) {
  YamabeProblem prob(surface, q);
  std::vector<EigenPair> pairs = eigenpairs(surface, 8);
  const EigenPair* mode = nullptr;
  for (const auto& pr : pairs)
    if (std::abs(pr.lambda - lambda1) <= 1e-3 * std::max(1.0, lambda1)) {
      mode = &pr;
      break;
    }
  if (!mode) throw ValidationError("no eigenvalue near the requested crossing");
  const double a_star = mode->lambda / (q - 2.0);
  return trace_from_bifurcation(prob, mode->phi.values,
                                Eigen::VectorXd::Ones(surface.node_count()), a_star, settings,
                                direction);
}

/// Re-converges a traced warp-branch point at fixed t on a finer grid family
/// of the same zonal kind, then Richardson-extrapolates node values on the
/// coarse grid. Cuts the O(h^2) solve error to O(h^6), which the
/// product-manifold oracle needs to sit at its own noise floor.
struct RefinedBranchPoint {
  Eigen::VectorXd x;      // on the base surface's nodes
  double t = 0.0;
  double grid_error_estimate = 0.0;
};

inline Eigen::VectorXd solve_warp_fixed_t(const Surface& surface, const WarpParams& params,
                                          double t, const Eigen::VectorXd& x0,
                                          const NewtonSettings& cfg) {
  WarpProblem prob(surface, params);
  Eigen::VectorXd x = x0;
  // Rounding noise in x passes through two Laplacians, so the reachable
  // residual floor scales like eps * |x| * khat^2 / h^4; fall back to the
  // best iterate once Newton plateaus there.
  const double h2 = surface.grid_spacing() * surface.grid_spacing();
  const double floor_model = 50.0 * std::numeric_limits<double>::epsilon() *
                             std::max(x0.cwiseAbs().maxCoeff(), 1e-3) *
                             (surface.khat() * surface.khat()) / (h2 * h2);
  Eigen::VectorXd best_x = x;
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    Eigen::VectorXd f = prob.residual(x, t);
    const double fi = f.cwiseAbs().maxCoeff();
    if (fi < best) {
      best = fi;
      best_x = x;
      stalled = 0;
    } else if (++stalled >= 3) {
      break;
    }
    if (fi < cfg.tol) return x;
    Eigen::SparseMatrix<double> jac = prob.jacobian(x, t);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
    if (lu.info() != Eigen::Success) throw SolverError("fixed-t solve: singular Jacobian");
    Eigen::VectorXd dx = lu.solve(-f);
    x += dx;
    if (!x.allFinite()) throw SolverError("fixed-t solve diverged");
  }
  if (best < std::max(1e-8, floor_model)) return best_x;
  throw SolverError("fixed-t solve stalled at residual " + std::to_string(best) + " after " +
                    std::to_string(cfg.max_iter) + " iterations");
}

inline RefinedBranchPoint refine_branch_point(const Surface& coarse, const WarpParams& params,
                                              const Eigen::VectorXd& x_coarse, double t,
                                              const NewtonSettings& cfg) {
  if (!coarse.zonal()) throw ValidationError("refinement needs a zonal surface");
  const int n0 = coarse.cell_count();

  auto restrict_even = [](const Eigen::VectorXd& u) {
    Eigen::VectorXd v((u.size() - 1) / 2 + 1);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u[2 * i];
    return v;
  };

  const Surface fine2 = coarse.kind() == SurfaceKind::ZonalSphere
                            ? Surface::zonal_sphere(coarse.khat(), 2 * n0)
                            : Surface::zonal_projective_plane(coarse.khat(), 2 * n0);
  const Surface fine4 = coarse.kind() == SurfaceKind::ZonalSphere
                            ? Surface::zonal_sphere(coarse.khat(), 4 * n0)
                            : Surface::zonal_projective_plane(coarse.khat(), 4 * n0);

  NewtonSettings tight = cfg;
  tight.tol = std::min(cfg.tol, 1e-12);
  tight.max_iter = std::max(cfg.max_iter, 40);

  // Spectrally smooth seeds: a piecewise-linear injection carries knot-scale
  // kinks whose Laplacian is large enough to kick Newton into the trivial
  // solution's basin on fine grids.
  const Eigen::VectorXd u1 = solve_warp_fixed_t(coarse, params, t, x_coarse, tight);
  const Eigen::VectorXd u2 =
      solve_warp_fixed_t(fine2, params, t, resample_zonal(coarse, u1, fine2), tight);
  const Eigen::VectorXd u4 =
      solve_warp_fixed_t(fine4, params, t, resample_zonal(fine2, u2, fine4), tight);

  const Eigen::VectorXd u2c = restrict_even(u2);
  const Eigen::VectorXd u4c = restrict_even(restrict_even(u4));
  // Richardson with error model c2 h^2 + c4 h^4 + O(h^6).
  const Eigen::VectorXd v1 = (4.0 * u2c - u1) / 3.0;
  const Eigen::VectorXd v2 = (4.0 * u4c - u2c) / 3.0;
  RefinedBranchPoint out;
  out.x = (16.0 * v2 - v1) / 15.0;
  out.t = t;
  out.grid_error_estimate = (v2 - v1).cwiseAbs().maxCoeff();
  return out;
}

} // namespace wcrv
