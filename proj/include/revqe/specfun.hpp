#pragma once

// Closed-form spherical-harmonic backend for the round sphere: associated
// Legendre polynomials via the stable upward recurrence, fully normalized
// radial factors, and the classical large-degree asymptotic main term.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "revqe/numerics.hpp"

namespace revqe {

// Fully normalized radial factor of the spherical harmonic,
//   sqrt((2l+1)/(4pi) * (l-m)!/(l+m)!) * P_{l,m}(cos theta),
// including the Condon-Shortley (-1)^m of the Rodrigues convention.
// Computed by upward recurrence in l starting from the normalized P_{m,m};
// stable for degrees far beyond the factorial overflow limit.
inline double ylm_radial(int l, int m, double theta) {
  if (l < 0 || std::abs(m) > l)
    throw std::invalid_argument("ylm_radial: need |m| <= l");
  const int am = std::abs(m);
  const double x = std::cos(theta);

  // Normalized P_{am,am}: accumulate (1-x^2)^{am} together with the
  // normalization product to avoid underflow at moderate degrees.
  double pmm = 1.0;
  if (am > 0) {
    const double omx2 = (1.0 - x) * (1.0 + x);
    double fact = 1.0;
    for (int i = 1; i <= am; ++i) {
      pmm *= omx2 * fact / (fact + 1.0);
      fact += 2.0;
    }
  }
  pmm = std::sqrt((2.0 * am + 1.0) * pmm / (4.0 * std::numbers::pi));
  if (am & 1) pmm = -pmm;

  double val;
  if (l == am) {
    val = pmm;
  } else {
    double pprev = pmm;
    double pcur = x * std::sqrt(2.0 * am + 3.0) * pmm;
    double oldfact = std::sqrt(2.0 * am + 3.0);
    for (int ll = am + 2; ll <= l; ++ll) {
      const double fact = std::sqrt(
          (4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - am * am));
      const double pnext = (x * pcur - pprev / oldfact) * fact;
      oldfact = fact;
      pprev = pcur;
      pcur = pnext;
    }
    val = pcur;
  }
  // Negative m: standard reflection, (-1)^m times the |m| value.
  if (m < 0 && (am & 1)) val = -val;
  return val;
}

// log of the normalization prefactor sqrt((2l+1)/(4pi) (l-m)!/(l+m)!),
// factorial ratio in log space.
inline double log_ylm_prefactor(int l, int m) {
  return 0.5 * (std::log((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) +
                std::lgamma(l - m + 1.0) - std::lgamma(l + m + 1.0));
}

// Associated Legendre polynomial P_{l,m}(x), Rodrigues convention with the
// (-1)^m factor, 0 <= m <= l. Recovered from the normalized recurrence;
// valid as long as the un-normalized value fits in a double.
inline double legendre_assoc(int l, int m, double x) {
  if (l < 0 || m < 0 || m > l)
    throw std::invalid_argument("legendre_assoc: need 0 <= m <= l");
  if (std::abs(x) > 1.0)
    throw std::invalid_argument("legendre_assoc: need |x| <= 1");
  const double theta = std::acos(x);
  return ylm_radial(l, m, theta) * std::exp(-log_ylm_prefactor(l, m));
}

// The degree-scaled value l^{-m} P_{l,m}(cos theta), assembled in log space
// so large l and m stay finite.
inline double legendre_scaled(int l, int m, double theta) {
  const double scale =
      std::exp(-log_ylm_prefactor(l, m) - m * std::log(static_cast<double>(l)));
  return ylm_radial(l, m, theta) * scale;
}

// Main term of the classical asymptotic expansion of l^{-m} P_{l,m}(cos theta),
//   (2/(l pi sin theta))^{1/2} cos((l+1/2)theta - pi/4 + m pi/2),
// valid away from the poles.
inline double legendre_asymptotic_main(int l, int m, double theta) {
  const double s = std::sin(theta);
  if (!(s > 0.0))
    throw std::invalid_argument("legendre_asymptotic_main: sin(theta) <= 0");
  using std::numbers::pi;
  return std::sqrt(2.0 / (l * pi * s)) *
         std::cos((l + 0.5) * theta - pi / 4.0 + m * pi / 2.0);
}

struct AsymptoticFitReport {
  int l_min = 0;
  int l_max = 0;
  int m = 0;
  double epsilon = 0.0;
  std::vector<int> l_values;
  std::vector<double> residuals;  // sup over the theta-grid, per l
  double fitted_slope = 0.0;
  double fit_r2 = 0.0;
};

// Sup-norm residual of the asymptotic main term over a theta-grid in
// (epsilon, pi - epsilon), per degree, with a log-log least-squares fit.
inline AsymptoticFitReport asymptotic_residual_scan(int l_min, int l_max, int m,
                                                    double epsilon,
                                                    int theta_points = 400) {
  using std::numbers::pi;
  if (l_min > l_max || l_min < m + 1)
    throw std::invalid_argument("asymptotic_residual_scan: bad l range");
  if (!(epsilon > 0.0 && epsilon < pi / 2.0))
    throw std::invalid_argument("asymptotic_residual_scan: bad epsilon");

  AsymptoticFitReport rep;
  rep.l_min = l_min;
  rep.l_max = l_max;
  rep.m = m;
  rep.epsilon = epsilon;

  std::vector<double> logl, logr;
  for (int l = l_min; l <= l_max; ++l) {
    double sup = 0.0;
    for (int i = 0; i <= theta_points; ++i) {
      const double th =
          epsilon + (pi - 2.0 * epsilon) * i / static_cast<double>(theta_points);
      const double r =
          std::abs(legendre_scaled(l, m, th) - legendre_asymptotic_main(l, m, th));
      sup = std::max(sup, r);
    }
    rep.l_values.push_back(l);
    rep.residuals.push_back(sup);
    logl.push_back(std::log(static_cast<double>(l)));
    logr.push_back(std::log(sup));
  }
  const LineFit fit = fit_line(logl, logr);
  rep.fitted_slope = fit.slope;
  rep.fit_r2 = fit.r2;
  return rep;
}

}  // namespace revqe
