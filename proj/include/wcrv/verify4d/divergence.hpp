#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "wcrv/verify4d/product_chart.hpp"

namespace wcrv {

namespace detail4d {

/// Christoffel symbols Gamma^a_{bc} of a diagonal metric jet.
inline std::vector<Eigen::MatrixXd> christoffels(const MetricJet& jet) {
  const int d = static_cast<int>(jet.g.size());
  std::vector<Eigen::MatrixXd> gamma(d, Eigen::MatrixXd::Zero(d, d));
  for (int a = 0; a < d; ++a) {
    const double inv = 1.0 / jet.g[a];
    for (int b = 0; b < d; ++b)
      for (int c = b; c < d; ++c) {
        // 2 Gamma^a_{bc} = g^{aa} (d_b g_{ac} + d_c g_{ab} - d_a g_{bc})
        double v = 0.0;
        if (a == c) v += jet.dg(b, a);
        if (a == b) v += jet.dg(c, a);
        if (b == c) v -= jet.dg(a, b);
        v *= 0.5 * inv;
        gamma[a](b, c) = v;
        gamma[a](c, b) = v;
      }
  }
  return gamma;
}

/// Coordinate derivatives d_e Gamma^a_{bc} from the analytic 2-jet.
inline std::vector<std::vector<Eigen::MatrixXd>> christoffel_derivatives(const MetricJet& jet) {
  const int d = static_cast<int>(jet.g.size());
  std::vector<std::vector<Eigen::MatrixXd>> dgamma(
      d, std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Zero(d, d)));
  for (int e = 0; e < d; ++e)
    for (int a = 0; a < d; ++a) {
      const double inv = 1.0 / jet.g[a];
      const double dinv = -jet.dg(e, a) * inv * inv;
      for (int b = 0; b < d; ++b)
        for (int c = b; c < d; ++c) {
          double bracket = 0.0, dbracket = 0.0;
          if (a == c) {
            bracket += jet.dg(b, a);
            dbracket += jet.ddg[a](e, b);
          }
          if (a == b) {
            bracket += jet.dg(c, a);
            dbracket += jet.ddg[a](e, c);
          }
          if (b == c) {
            bracket -= jet.dg(a, b);
            dbracket -= jet.ddg[b](e, a);
          }
          const double v = 0.5 * (dinv * bracket + inv * dbracket);
          dgamma[e][a](b, c) = v;
          dgamma[e][a](c, b) = v;
        }
    }
  return dgamma;
}

/// (1,3) Riemann tensor R^a_{bcd} stored as R[a][b](c, d).
using Riemann = std::vector<std::vector<Eigen::MatrixXd>>;

inline Riemann riemann(const MetricJet& jet) {
  const int d = static_cast<int>(jet.g.size());
  const auto gamma = christoffels(jet);
  const auto dgamma = christoffel_derivatives(jet);
  Riemann r(d, std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Zero(d, d)));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double v = dgamma[c][a](e, b) - dgamma[e][a](c, b);
          for (int m = 0; m < d; ++m)
            v += gamma[a](c, m) * gamma[m](e, b) - gamma[a](e, m) * gamma[m](c, b);
          r[a][b](c, e) = v;
        }
  return r;
}

inline Riemann riemann_at(const ProductChart& chart, const Eigen::VectorXd& point) {
  return riemann(assemble_metric(chart, point));
}

} // namespace detail4d

/// Scalar curvature of the assembled metric at a chart point (fully analytic,
/// no finite differences).
inline double scalar_curvature(const ProductChart& chart, const Eigen::VectorXd& point) {
  const MetricJet jet = assemble_metric(chart, point);
  const detail4d::Riemann r = detail4d::riemann(jet);
  const int d = chart.dim();
  double s = 0.0;
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a) s += r[a][b](a, b) / jet.g[b]; // g^{bb} Ric_{bb}
  return s;
}

/// Max-norm of the first Bianchi cyclic sum of the fully lowered curvature
/// tensor; internal consistency of the pipeline, not a solution property.
inline double bianchi_residual(const ProductChart& chart, const Eigen::VectorXd& point) {
  const MetricJet jet = assemble_metric(chart, point);
  const detail4d::Riemann r = detail4d::riemann(jet);
  const int d = chart.dim();
  double worst = 0.0, scale = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          const double low = jet.g[a] * r[a][b](c, e);
          scale = std::max(scale, std::abs(low));
          const double cyc = jet.g[a] * (r[a][b](c, e) + r[a][c](e, b) + r[a][e](b, c));
          worst = std::max(worst, std::abs(cyc));
        }
  return worst / std::max(scale, 1e-300);
}

struct DivergenceSettings {
  double fd_step = 1e-3;  // base step of the 4th-order stencil
  bool richardson = true; // second level at fd_step/2
};

/// Covariant divergence of the curvature tensor contracted on its upper
/// index, max norm over components: the harmonic-curvature defect.
/// Derivatives of Riemann are 4th-order central finite differences of the
/// analytic per-point curvature; Christoffel terms are analytic.
inline double riemann_divergence_residual(const ProductChart& chart,
                                          const Eigen::VectorXd& point,
                                          const DivergenceSettings& cfg = {}) {
  const int d = chart.dim();
  const MetricJet jet = assemble_metric(chart, point);
  const auto gamma = detail4d::christoffels(jet);
  const detail4d::Riemann r0 = detail4d::riemann(jet);

  // D_{bce}(h) = nabla_a R^a_{bce} with d_a R from the 4th-order stencil at
  // step h and analytic Christoffel correction terms.
  auto divergence_tensor = [&](double h) {
    std::vector<detail4d::Riemann> dr(d);
    for (int dir = 0; dir < d; ++dir) {
      Eigen::VectorXd pp = point, pm = point, pp2 = point, pm2 = point;
      pp[dir] += h;
      pm[dir] -= h;
      pp2[dir] += 2.0 * h;
      pm2[dir] -= 2.0 * h;
      const detail4d::Riemann rp = detail4d::riemann_at(chart, pp);
      const detail4d::Riemann rm = detail4d::riemann_at(chart, pm);
      const detail4d::Riemann rp2 = detail4d::riemann_at(chart, pp2);
      const detail4d::Riemann rm2 = detail4d::riemann_at(chart, pm2);
      detail4d::Riemann g(d, std::vector<Eigen::MatrixXd>(d));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          g[a][b] = (8.0 * (rp[a][b] - rm[a][b]) - (rp2[a][b] - rm2[a][b])) / (12.0 * h);
      dr[dir] = std::move(g);
    }
    std::vector<Eigen::MatrixXd> div(d, Eigen::MatrixXd::Zero(d, d));
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double v = 0.0;
          for (int a = 0; a < d; ++a) {
            v += dr[a][a][b](c, e);
            for (int m = 0; m < d; ++m) {
              v += gamma[a](a, m) * r0[m][b](c, e);
              v -= gamma[m](a, b) * r0[a][m](c, e);
              v -= gamma[m](a, c) * r0[a][b](m, e);
              v -= gamma[m](a, e) * r0[a][b](c, m);
            }
          }
          div[b](c, e) = v;
        }
    return div;
  };

  const auto coarse = divergence_tensor(cfg.fd_step);
  double worst = 0.0;
  if (!cfg.richardson) {
    for (int b = 0; b < d; ++b) worst = std::max(worst, coarse[b].cwiseAbs().maxCoeff());
    return worst;
  }
  // Two-level Richardson kills the h^4 truncation term; combine the tensors
  // component-wise, then take the max norm.
  const auto fine = divergence_tensor(0.5 * cfg.fd_step);
  for (int b = 0; b < d; ++b) {
    const Eigen::MatrixXd combined = (16.0 * fine[b] - coarse[b]) / 15.0;
    worst = std::max(worst, combined.cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Seeded low-discrepancy interior chart points (Halton bases over the
/// admissible coordinate box).
inline std::vector<Eigen::VectorXd> sample_chart_points(const ProductChart& chart, int count,
                                                        std::uint64_t seed = 1) {
  auto halton = [](std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };
  const int primes[] = {2, 3, 5, 7, 11, 13};
  const int d = chart.dim();
  std::vector<Eigen::VectorXd> pts;
  const double pad = chart.margin + 0.05; // stay clear of the FD stencil reach
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd p(d);
    const std::uint64_t idx = seed * 1000 + 17 * i + 3;
    p[0] = pad + halton(idx, primes[0]) * (chart.s_max() - 2.0 * pad);
    p[1] = halton(idx, primes[1]) * 2.0 * M_PI;
    for (int k = 0; k < chart.fibre_dim(); ++k) {
      const bool has_pole = k + 1 < chart.fibre_dim();
      const double lo = has_pole ? pad : 0.0;
      const double hi = has_pole ? M_PI - pad : 2.0 * M_PI;
      p[2 + k] = lo + halton(idx, primes[(2 + k) % 6]) * (hi - lo);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

struct DivergenceReport {
  std::vector<double> residuals;      // per sample point
  double max_residual = 0.0;
  double scalar_curvature_mean = 0.0;
  double scalar_curvature_spread = 0.0; // max |s - mean|
  double bianchi_worst = 0.0;
};

inline DivergenceReport divergence_report(const ProductChart& chart,
                                          const std::vector<Eigen::VectorXd>& points,
                                          const DivergenceSettings& cfg = {}) {
  DivergenceReport rep;
  std::vector<double> scal;
  for (const auto& pt : points) {
    rep.residuals.push_back(riemann_divergence_residual(chart, pt, cfg));
    scal.push_back(scalar_curvature(chart, pt));
    rep.bianchi_worst = std::max(rep.bianchi_worst, bianchi_residual(chart, pt));
  }
  rep.max_residual = *std::max_element(rep.residuals.begin(), rep.residuals.end());
  for (double v : scal) rep.scalar_curvature_mean += v;
  rep.scalar_curvature_mean /= static_cast<double>(scal.size());
  for (double v : scal)
    rep.scalar_curvature_spread =
        std::max(rep.scalar_curvature_spread, std::abs(v - rep.scalar_curvature_mean));
  return rep;
}

} // namespace wcrv
