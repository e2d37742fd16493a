#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "wcrv/geometry/zonal_fit.hpp"
#include "wcrv/residuals/warp_params.hpp"

namespace wcrv {

/// Explicit coordinates on (base surface) x (round p-sphere fibre):
/// (s, phi, u_1, ..., u_p). The fibre radius rho = sqrt((p-1)/eps) realizes
/// the Einstein constant eps; the zonal profiles enter through smooth
/// harmonic-series fits so every metric derivative is analytic.
///
/// In the nonconstant-curvature regime (r != 0) the warping power is not an
/// independent field: it is derived pointwise from the curvature of the
/// x-series, whose Laplacian is exact mode by mode. A separately fitted f
/// would disagree with x at the grid-truncation level and leak a spurious
/// O(h^2) harmonic-curvature defect into the oracle.
struct ProductChart {
  const Surface* surface = nullptr;
  WarpParams params;
  ZonalSeries x_profile;
  ZonalSeries x_lap_profile; // exact Laplacian of the x-series (mode-wise)
  ZonalSeries f_profile;     // used only when f_derived is false
  bool f_derived = true;
  double f_consistency = 0.0; // max |f_input - f_derived| over nodes (derive mode)
  double rho = 1.0;
  double margin = 0.3; // distance kept from coordinate poles of both factors

  int fibre_dim() const { return params.p; }
  int dim() const { return 2 + params.p; }
  double base_radius_sq() const { return 1.0 / surface->khat(); }
  double s_max() const {
    return surface->kind() == SurfaceKind::ZonalProjectivePlane ? M_PI / 2.0 : M_PI;
  }

  std::array<double, 3> x_jet(double s) const { return x_profile.jet(s); }

  /// Gaussian curvature K = e^{-2x}(khat - Lap x) and its s-derivatives,
  /// everything analytic in the series.
  std::array<double, 3> curvature_jet(double s) const {
    const auto xj = x_profile.jet(s);
    const auto lj = x_lap_profile.jet(s);
    const double e = std::exp(-2.0 * xj[0]);
    const double g0 = surface->khat() - lj[0];
    const double g1 = -lj[1];
    const double g2 = -lj[2];
    const double k0 = e * g0;
    const double k1 = e * (g1 - 2.0 * xj[1] * g0);
    const double k2 =
        e * (g2 - 4.0 * xj[1] * g1 - 2.0 * xj[2] * g0 + 4.0 * xj[1] * xj[1] * g0);
    return {k0, k1, k2};
  }

  /// Warping power f and its s-derivatives.
  std::array<double, 3> f_jet(double s) const {
    if (!f_derived) return f_profile.jet(s);
    const auto kj = curvature_jet(s);
    const double denom = 2.0 * params.r * (1.0 + 1.0 / params.p);
    const double beta = params.p / (2.0 - 2.0 * params.p);
    const double ratio = (kj[0] + params.eps / (params.p - 1)) / denom;
    if (!(ratio > 0.0))
      throw DomainViolation("(p-1)K + eps is not of the sign of r at s = " + std::to_string(s));
    const double r1 = kj[1] / denom;
    const double r2 = kj[2] / denom;
    const double f0 = std::pow(ratio, beta);
    const double f1 = beta * f0 / ratio * r1;
    const double f2 =
        beta * (beta - 1.0) * f0 / (ratio * ratio) * r1 * r1 + beta * f0 / ratio * r2;
    return {f0, f1, f2};
  }
};

inline ZonalSeries series_laplacian(const ZonalSeries& series, double khat) {
  Eigen::VectorXd coeffs = series.coefficients();
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    const double deg = series.degrees()[j];
    coeffs[j] *= -deg * (deg + 1.0) * khat;
  }
  return ZonalSeries(series.degrees(), std::move(coeffs));
}

inline ProductChart make_product_chart(const Surface& surface, const SolutionQuadruple& sol,
                                       const WarpParams& params, int fit_degree = 48) {
  if (!surface.zonal()) throw ValidationError("the product chart needs a zonal base");
  if (surface.khat() <= 0.0)
    throw ValidationError("the explicit base chart is built for khat > 0");
  if (!(params.eps > 0.0))
    throw ValidationError("fibre Einstein constant must be positive for a round fibre");
  ProductChart chart;
  chart.surface = &surface;
  chart.params = params;
  chart.x_profile = fit_zonal_series(surface, sol.x.values, fit_degree);
  chart.x_lap_profile = series_laplacian(chart.x_profile, surface.khat());
  chart.rho = std::sqrt((params.p - 1) / params.eps);
  if (params.r != 0.0) {
    chart.f_derived = true;
    for (int i = 0; i < surface.node_count(); ++i) {
      const double fd = chart.f_jet(surface.colatitudes()[i])[0];
      chart.f_consistency =
          std::max(chart.f_consistency, std::abs(fd - sol.f.values[i]));
    }
  } else {
    chart.f_derived = false;
    chart.f_profile = fit_zonal_series(surface, sol.f.values, fit_degree);
  }
  return chart;
}

/// Multiplies the warping profile by (1 + amplitude * P2(cos s)): a smooth
/// zonal perturbation that breaks the solution property (a constant rescaling
/// would not, being a homothety). The result is a fitted-profile chart.
inline ProductChart perturb_warping(const ProductChart& chart, double amplitude) {
  ProductChart out = chart;
  const Surface& s = *chart.surface;
  Eigen::VectorXd f(s.node_count());
  for (int i = 0; i < s.node_count(); ++i) {
    const double colat = s.colatitudes()[i];
    const double c = std::cos(colat);
    f[i] = chart.f_jet(colat)[0] * (1.0 + amplitude * 0.5 * (3.0 * c * c - 1.0));
  }
  out.f_profile = fit_zonal_series(s, f, 48);
  out.f_derived = false;
  return out;
}

/// Diagonal metric jet at one chart point: components, first and second
/// coordinate derivatives.
struct MetricJet {
  Eigen::VectorXd g;                 // diagonal components g_AA
  Eigen::MatrixXd dg;                // dg(c, A) = d_c g_AA
  std::vector<Eigen::MatrixXd> ddg;  // ddg[A](c, d) = d_c d_d g_AA
  double det() const { return g.prod(); }
};

namespace detail4d {

/// One univariate factor of a diagonal metric component.
struct Factor {
  int var = 0;  // coordinate index the factor depends on
  int kind = 0; // 0: base profile, 1: fibre profile, 2: sin^2
  std::array<double, 3> jet(const ProductChart& chart, double coord) const {
    switch (kind) {
      case 0: {
        // R^2 f^{4/p} e^{2x}
        const auto fj = chart.f_jet(coord);
        const auto xj = chart.x_jet(coord);
        const double e = 4.0 / chart.params.p;
        const double base = chart.base_radius_sq();
        const double v = base * std::pow(fj[0], e) * std::exp(2.0 * xj[0]);
        const double lg1 = e * fj[1] / fj[0] + 2.0 * xj[1];
        const double lg2 =
            e * (fj[2] / fj[0] - fj[1] * fj[1] / (fj[0] * fj[0])) + 2.0 * xj[2];
        return {v, v * lg1, v * (lg1 * lg1 + lg2)};
      }
      case 1: {
        // rho^2 f^{4/p}
        const auto fj = chart.f_jet(coord);
        const double e = 4.0 / chart.params.p;
        const double v = chart.rho * chart.rho * std::pow(fj[0], e);
        const double lg1 = e * fj[1] / fj[0];
        const double lg2 =
            e * (fj[2] / fj[0] - fj[1] * fj[1] / (fj[0] * fj[0]));
        return {v, v * lg1, v * (lg1 * lg1 + lg2)};
      }
      default: {
        const double sn = std::sin(coord), cs = std::cos(coord);
        return {sn * sn, 2.0 * sn * cs, 2.0 * (cs * cs - sn * sn)};
      }
    }
  }
};

inline std::vector<std::vector<Factor>> component_factors(const ProductChart& chart) {
  const int p = chart.fibre_dim();
  std::vector<std::vector<Factor>> comps(2 + p);
  comps[0] = {Factor{0, 0}};               // g_ss
  comps[1] = {Factor{0, 0}, Factor{0, 2}}; // g_phiphi = B(s) sin^2 s
  for (int k = 0; k < p; ++k) {
    std::vector<Factor> fs = {Factor{0, 1}}; // rho^2 f^{4/p}
    for (int m = 0; m < k; ++m) fs.push_back(Factor{2 + m, 2});
    comps[2 + k] = std::move(fs);
  }
  return comps;
}

} // namespace detail4d

/// Assembles the warped-product metric f^{4/p}[g + eta] and its 2-jet at one
/// chart point, all derivatives analytic.
inline MetricJet assemble_metric(const ProductChart& chart, const Eigen::VectorXd& point) {
  const int d = chart.dim();
  if (point.size() != d) throw ValidationError("chart point has wrong dimension");
  if (point[0] < chart.margin || point[0] > chart.s_max() - chart.margin)
    throw DomainViolation("chart point violates the base pole margin");
  for (int k = 0; k + 1 < chart.fibre_dim(); ++k)
    if (point[2 + k] < chart.margin || point[2 + k] > M_PI - chart.margin)
      throw DomainViolation("chart point violates the fibre pole margin");

  const auto comps = detail4d::component_factors(chart);
  MetricJet jet;
  jet.g = Eigen::VectorXd::Zero(d);
  jet.dg = Eigen::MatrixXd::Zero(d, d);
  jet.ddg.assign(d, Eigen::MatrixXd::Zero(d, d));

  for (int a = 0; a < d; ++a) {
    const auto& factors = comps[a];
    const int m = static_cast<int>(factors.size());
    std::vector<std::array<double, 3>> fj(m);
    for (int i = 0; i < m; ++i) fj[i] = factors[i].jet(chart, point[factors[i].var]);

    double value = 1.0;
    for (int i = 0; i < m; ++i) value *= fj[i][0];
    jet.g[a] = value;

    for (int c = 0; c < d; ++c) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        if (factors[i].var != c) continue;
        double term = fj[i][1];
        for (int j = 0; j < m; ++j)
          if (j != i) term *= fj[j][0];
        acc += term;
      }
      jet.dg(c, a) = acc;
    }

    for (int c = 0; c < d; ++c)
      for (int e = c; e < d; ++e) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
          if (factors[i].var != c) continue;
          for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            if (factors[j].var != e) continue;
            double term = fj[i][1] * fj[j][1];
            for (int k = 0; k < m; ++k)
              if (k != i && k != j) term *= fj[k][0];
            acc += term;
          }
          if (e == c) {
            double term = fj[i][2];
            for (int j = 0; j < m; ++j)
              if (j != i) term *= fj[j][0];
            acc += term;
          }
        }
        jet.ddg[a](c, e) = acc;
        jet.ddg[a](e, c) = acc;
      }
  }
  return jet;
}

} // namespace wcrv
