#pragma once

#include <cmath>
#include <vector>

namespace wcrv {

/// Legendre polynomial P_j(z) together with its first two z-derivatives,
/// by upward recurrence. Stable for |z| <= 1 and moderate degrees.
struct LegendreJet {
  double p;   // P_j(z)
  double dp;  // P_j'(z)
  double ddp; // P_j''(z)
};

inline LegendreJet legendre_jet(int degree, double z) {
  if (degree == 0) return {1.0, 0.0, 0.0};
  if (degree == 1) return {z, 1.0, 0.0};
  double pm2 = 1.0, pm1 = z;
  double dm2 = 0.0, dm1 = 1.0;
  double sm2 = 0.0, sm1 = 0.0;
  double p = 0, dp = 0, ddp = 0;
  for (int j = 2; j <= degree; ++j) {
    // (j) P_j = (2j-1) z P_{j-1} - (j-1) P_{j-2}, differentiated twice.
    p = ((2 * j - 1) * z * pm1 - (j - 1) * pm2) / j;
    dp = ((2 * j - 1) * (pm1 + z * dm1) - (j - 1) * dm2) / j;
    ddp = ((2 * j - 1) * (2 * dm1 + z * sm1) - (j - 1) * sm2) / j;
    pm2 = pm1; pm1 = p;
    dm2 = dm1; dm1 = dp;
    sm2 = sm1; sm1 = ddp;
  }
  return {p, dp, ddp};
}

inline double legendre(int degree, double z) { return legendre_jet(degree, z).p; }

/// Values/derivatives of s -> P_j(cos s) on a colatitude grid.
/// d/ds P_j(cos s)   = -sin(s) P_j'(cos s)
/// d2/ds2 P_j(cos s) = -cos(s) P_j'(cos s) + sin^2(s) P_j''(cos s)
struct ZonalHarmonicJet {
  double value;
  double d1;
  double d2;
};

inline ZonalHarmonicJet zonal_harmonic_jet(int degree, double s) {
  const double c = std::cos(s), sn = std::sin(s);
  const LegendreJet lj = legendre_jet(degree, c);
  return {lj.p, -sn * lj.dp, -c * lj.dp + sn * sn * lj.ddp};
}

} // namespace wcrv
