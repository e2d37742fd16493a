#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "wcrv/geometry/operators.hpp"
#include "wcrv/residuals/warp_params.hpp"

namespace wcrv {

/// Empirical functional-dependence test: are LapK and g(gradK, gradK)
/// functions of K alone? Small scatter certifies isoparametricity of K, the
/// hypothesis under which the profile-function identities apply.
struct IsoparametricReport {
  bool vacuous = false;        // constant-K input, nothing to fit
  std::string notice;
  double scatter_laplacian = 0.0;
  double scatter_gradient = 0.0;
  int segments = 0;            // monotone K-profile segments (zonal kinds)
  // Sampled profile, sorted by K: (K, LapK, |gradK|^2).
  std::vector<std::array<double, 3>> profile;
  double scatter() const { return std::max(scatter_laplacian, scatter_gradient); }
};

namespace detail {

/// Relative RMS mismatch between segment B interpolated at segment A's
/// K-values, for column `col` of (K, LapK, |gradK|^2) rows.
inline double segment_mismatch(const std::vector<std::array<double, 3>>& a,
                               const std::vector<std::array<double, 3>>& b, int col,
                               double scale) {
  double acc = 0.0;
  int count = 0;
  for (const auto& row : a) {
    const double k = row[0];
    // b is sorted ascending in K
    auto it = std::lower_bound(b.begin(), b.end(), k,
                               [](const std::array<double, 3>& r, double v) { return r[0] < v; });
    if (it == b.begin() || it == b.end()) continue;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (k - lo[0]) / (hi[0] - lo[0]);
    const double interp = lo[col] + w * (hi[col] - lo[col]);
    const double diff = row[col] - interp;
    acc += diff * diff;
    ++count;
  }
  return count ? std::sqrt(acc / count) / scale : 0.0;
}

} // namespace detail

inline IsoparametricReport isoparametric_check(const Surface& surface, const ScalarField& x,
                                               const WarpParams& params) {
  (void)params;
  const ScalarField kf = gaussian_curvature(surface, x);
  Eigen::VectorXd lap_k = surface.laplacian(kf.values);
  for (Eigen::Index i = 0; i < lap_k.size(); ++i) lap_k[i] *= std::exp(-2.0 * x.values[i]);
  const ScalarField grad_k = grad_norm_sq(surface, x, kf);

  IsoparametricReport rep;
  const double k_span = kf.values.maxCoeff() - kf.values.minCoeff();
  const double k_scale = std::max(std::abs(kf.values.maxCoeff()), std::abs(kf.values.minCoeff()));
  if (k_span <= 1e-10 * std::max(k_scale, 1.0)) {
    rep.vacuous = true;
    rep.notice = "K is constant to tolerance: nothing to fit (constant-curvature metric)";
    return rep;
  }

  const double lap_scale = std::max(lap_k.cwiseAbs().maxCoeff(), 1e-300);
  const double grad_scale = std::max(grad_k.values.maxCoeff(), 1e-300);

  if (surface.zonal()) {
    // Split the colatitude profile into maximal monotone-in-K segments, then
    // measure how far apart the (K -> LapK) and (K -> |gradK|^2) graphs of
    // different segments sit.
    std::vector<std::vector<std::array<double, 3>>> segments;
    std::vector<std::array<double, 3>> current;
    int dir = 0;
    for (int i = 0; i < surface.node_count(); ++i) {
      const std::array<double, 3> row = {kf.values[i], lap_k[i], grad_k.values[i]};
      if (!current.empty()) {
        const double dk = row[0] - current.back()[0];
        const int ndir = dk > 0 ? 1 : (dk < 0 ? -1 : 0);
        if (ndir != 0 && dir != 0 && ndir != dir) {
          segments.push_back(current);
          current.clear();
          current.push_back({kf.values[i - 1], lap_k[i - 1], grad_k.values[i - 1]});
          dir = 0;
        }
        if (ndir != 0 && dir == 0) dir = ndir;
      }
      current.push_back(row);
    }
    if (current.size() > 1) segments.push_back(current);
    rep.segments = static_cast<int>(segments.size());
    for (auto& seg : segments)
      std::sort(seg.begin(), seg.end(),
                [](const auto& a, const auto& b) { return a[0] < b[0]; });

    for (size_t i = 0; i < segments.size(); ++i)
      for (size_t j = i + 1; j < segments.size(); ++j) {
        rep.scatter_laplacian = std::max(
            rep.scatter_laplacian, detail::segment_mismatch(segments[i], segments[j], 1, lap_scale));
        rep.scatter_gradient = std::max(
            rep.scatter_gradient, detail::segment_mismatch(segments[i], segments[j], 2, grad_scale));
      }
    for (const auto& seg : segments)
      for (const auto& row : seg) rep.profile.push_back(row);
    std::sort(rep.profile.begin(), rep.profile.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    return rep;
  }

  // Mesh backend: sliding window over nodes sorted by K; the in-window spread
  // of LapK (and |gradK|^2) relative to their global scale is the scatter.
  std::vector<std::array<double, 3>> rows(surface.node_count());
  for (int i = 0; i < surface.node_count(); ++i)
    rows[i] = {kf.values[i], lap_k[i], grad_k.values[i]};
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
  rep.profile = rows;
  rep.segments = 1;

  const int window = 9;
  auto windowed_scatter = [&](int col, double scale) {
    double acc = 0.0;
    int count = 0;
    for (size_t i = 0; i + window <= rows.size(); i += window) {
      double mean = 0.0;
      for (int k = 0; k < window; ++k) mean += rows[i + k][col];
      mean /= window;
      double var = 0.0;
      for (int k = 0; k < window; ++k) var += std::pow(rows[i + k][col] - mean, 2);
      acc += std::sqrt(var / window);
      ++count;
    }
    return count ? acc / count / scale : 0.0;
  };
  rep.scatter_laplacian = windowed_scatter(1, lap_scale);
  rep.scatter_gradient = windowed_scatter(2, grad_scale);
  return rep;
}

} // namespace wcrv
