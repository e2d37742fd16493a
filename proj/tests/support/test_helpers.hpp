#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wcrv/common/legendre.hpp"
#include "wcrv/geometry/mesh_io.hpp"
#include "wcrv/geometry/surface.hpp"

namespace wcrv::testing {

inline const Surface& sphere_256() {
  static Surface s = Surface::zonal_sphere(1.0, 256);
  return s;
}
inline const Surface& sphere_1024() {
  static Surface s = Surface::zonal_sphere(1.0, 1024);
  return s;
}
inline const Surface& rp2_512() {
  static Surface s = Surface::zonal_projective_plane(1.0, 512);
  return s;
}
inline const Surface& icosphere_4() {
  static Surface s = icosphere(1.0, 4);
  return s;
}

/// Zonal harmonic P_j(cos s) sampled on the surface's grid.
inline ScalarField zonal_harmonic(const Surface& s, int degree) {
  Eigen::VectorXd v(s.node_count());
  for (int i = 0; i < s.node_count(); ++i) v[i] = legendre(degree, std::cos(s.colatitudes()[i]));
  return ScalarField(s, v);
}

/// Smooth random even-parity zonal field: a short series of even harmonics
/// with decaying seeded coefficients.
inline ScalarField random_even_field(const Surface& s, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(s.node_count());
  for (int l = 1; l <= 6; ++l) {
    const double c = amplitude * coef(rng) / (l * l);
    for (int i = 0; i < s.node_count(); ++i)
      v[i] += c * legendre(2 * l, std::cos(s.colatitudes()[i]));
  }
  return ScalarField(s, v);
}

} // namespace wcrv::testing
