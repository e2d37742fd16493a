#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "wcrv/common/legendre.hpp"
#include "wcrv/geometry/surface.hpp"

namespace wcrv {

/// Truncated zonal-harmonic series u(s) = sum_j c_j P_{d_j}(cos s), fitted to
/// a discrete zonal field by mass-weighted least squares. Being a polynomial
/// in cos s, it carries exact derivatives of every order; that is what the
/// curvature oracle differentiates, instead of a piecewise interpolant whose
/// second-derivative error oscillates at the knot scale.
class ZonalSeries {
public:
  ZonalSeries() = default;
  ZonalSeries(std::vector<int> degrees, Eigen::VectorXd coeffs)
      : degrees_(std::move(degrees)), coeffs_(std::move(coeffs)) {}

  double value(double s) const {
    double acc = 0.0;
    const double z = std::cos(s);
    for (size_t j = 0; j < degrees_.size(); ++j) acc += coeffs_[j] * legendre(degrees_[j], z);
    return acc;
  }

  /// (u, du/ds, d2u/ds2) at colatitude s.
  std::array<double, 3> jet(double s) const {
    std::array<double, 3> out = {0.0, 0.0, 0.0};
    for (size_t j = 0; j < degrees_.size(); ++j) {
      const ZonalHarmonicJet h = zonal_harmonic_jet(degrees_[j], s);
      out[0] += coeffs_[j] * h.value;
      out[1] += coeffs_[j] * h.d1;
      out[2] += coeffs_[j] * h.d2;
    }
    return out;
  }

  const std::vector<int>& degrees() const { return degrees_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  double fit_residual() const { return fit_residual_; }
  void set_fit_residual(double r) { fit_residual_ = r; }

private:
  std::vector<int> degrees_;
  Eigen::VectorXd coeffs_;
  double fit_residual_ = 0.0;
};

/// Least-squares zonal-harmonic fit of a field on a zonal surface. The
/// projective plane admits only even degrees (even reflection across the
/// equator); the sphere takes all degrees up to max_degree.
inline ZonalSeries fit_zonal_series(const Surface& surface, const Eigen::VectorXd& values,
                                    int max_degree) {
  if (!surface.zonal()) throw ValidationError("zonal series fit needs a zonal surface");
  const int n = surface.node_count();
  std::vector<int> degrees;
  for (int d = 0; d <= max_degree; ++d) {
    if (surface.kind() == SurfaceKind::ZonalProjectivePlane && (d % 2) == 1) continue;
    degrees.push_back(d);
  }
  const int m = static_cast<int>(degrees.size());
  Eigen::MatrixXd a(n, m);
  Eigen::VectorXd b(n);
  const Eigen::VectorXd w = surface.node_mass().array().sqrt();
  for (int i = 0; i < n; ++i) {
    const double z = std::cos(surface.colatitudes()[i]);
    for (int j = 0; j < m; ++j) a(i, j) = w[i] * legendre(degrees[j], z);
    b[i] = w[i] * values[i];
  }
  Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  ZonalSeries series(std::move(degrees), std::move(c));
  double resid = 0.0;
  for (int i = 0; i < n; ++i)
    resid = std::max(resid, std::abs(series.value(surface.colatitudes()[i]) - values[i]));
  series.set_fit_residual(resid);
  return series;
}

/// Resamples a zonal field onto another grid of the same kind through the
/// series fit (spectrally smooth, no knot-scale kinks).
inline Eigen::VectorXd resample_zonal(const Surface& from, const Eigen::VectorXd& values,
                                      const Surface& to, int max_degree = 64) {
  const ZonalSeries series = fit_zonal_series(from, values, max_degree);
  Eigen::VectorXd out(to.node_count());
  for (int i = 0; i < to.node_count(); ++i) out[i] = series.value(to.colatitudes()[i]);
  return out;
}

} // namespace wcrv
