#pragma once

// Semiclassical bookkeeping and verification statistics: eigenvalue
// partitions, character families, spectral windows, quantum-limit
// functionals, the integrated quantum-ergodicity statistic, density-one
// selection, Weyl counting, Theta-densities and zonal concentration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "revqe/dynamics.hpp"
#include "revqe/geometry.hpp"
#include "revqe/numerics.hpp"
#include "revqe/specfun.hpp"
#include "revqe/spectral.hpp"

namespace revqe {

// ---------------------------------------------------------------------------
// Partitions of eigenvalue sequences
// ---------------------------------------------------------------------------

struct PartitionResult {
  double beta = 0.0;
  std::vector<std::size_t> jk;  // strictly increasing, 1-based, jk[0] = 1
  std::vector<std::size_t> P;   // P[j-1] for j = 1..P.size(), 1-based values
};

// Partition of a nondecreasing positive sequence of order beta:
//   j_1 = 1,  j_{k+1} = min{ j : a_{j_k} (1 + a_{j_k}^{-beta/2}) < a_j },
// P(j) = j_k where a_{j_k} <= a_j < a_{j_{k+1}}. Works on a finite prefix;
// P is reported for exactly those j whose bracket is determined by it.
inline PartitionResult partition(const std::vector<double>& a, double beta) {
  if (a.empty() || !(a.front() > 0.0))
    throw std::invalid_argument("partition: need positive entries");
  for (std::size_t i = 1; i < a.size(); ++i)
    if (a[i] < a[i - 1])
      throw std::invalid_argument("partition: sequence must be nondecreasing");
  if (!(beta > 0.0)) throw std::invalid_argument("partition: beta <= 0");

  PartitionResult out;
  out.beta = beta;
  out.jk.push_back(1);
  while (true) {
    const double ak = a[out.jk.back() - 1];
    const double threshold = ak * (1.0 + std::pow(ak, -beta / 2.0));
    std::size_t next = 0;
    for (std::size_t j = out.jk.back(); j < a.size(); ++j) {
      if (threshold < a[j]) {
        next = j + 1;  // 1-based
        break;
      }
    }
    if (next == 0) {
      // Prefix exhausted: P is still determined for a_j <= threshold.
      for (std::size_t j = out.jk.back(); j <= a.size(); ++j)
        if (a[j - 1] <= threshold) out.P.push_back(out.jk.back());
      break;
    }
    for (std::size_t j = out.jk.back(); j < next; ++j)
      out.P.push_back(out.jk.back());
    out.jk.push_back(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Character families and admissible exponents (kappa = 1 throughout)
// ---------------------------------------------------------------------------

struct CharacterFamily {
  double vartheta = 0.0;
  double h = 1.0;
  std::vector<int> members;  // {k : |k| <= h^{-vartheta}}
  bool admissible = true;    // vartheta < 1/(2*kappa+3) = 1/5
};

inline CharacterFamily character_family(double vartheta, double h) {
  if (!(h > 0.0 && h <= 1.0))
    throw std::invalid_argument("character_family: need h in (0,1]");
  if (vartheta < 0.0)
    throw std::invalid_argument("character_family: vartheta < 0");
  CharacterFamily fam;
  fam.vartheta = vartheta;
  fam.h = h;
  const int kmax = static_cast<int>(std::floor(std::pow(h, -vartheta)));
  for (int k = -kmax; k <= kmax; ++k) fam.members.push_back(k);
  fam.admissible = vartheta < 0.2;
  return fam;
}

struct BetaInterval {
  double lo = 0.0;  // open
  double hi = 0.0;  // open
};

// Admissible partition orders beta in (0, (1 - 5*vartheta)/6) for kappa = 1.
inline BetaInterval admissible_exponents(double vartheta) {
  if (!(vartheta >= 0.0 && vartheta < 0.2))
    throw std::invalid_argument("admissible_exponents: need vartheta in [0,1/5)");
  return {0.0, (1.0 - 5.0 * vartheta) / 6.0};
}

// ---------------------------------------------------------------------------
// Flattened spectra and spectral windows
// ---------------------------------------------------------------------------

struct SpectrumEntry {
  double E = 0.0;
  int m = 0;
  int k = 0;        // index within the mode
  int l_label = 0;  // round-sphere label |m| + k
};

// Deterministic flattening order: nondecreasing E, ties by (|m|, m >= 0
// first, k).
inline void sort_flattened(std::vector<SpectrumEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const SpectrumEntry& a, const SpectrumEntry& b) {
              if (a.E != b.E) return a.E < b.E;
              if (std::abs(a.m) != std::abs(b.m))
                return std::abs(a.m) < std::abs(b.m);
              if ((a.m >= 0) != (b.m >= 0)) return a.m >= 0;
              return a.k < b.k;
            });
}

inline std::vector<SpectrumEntry> flatten(
    const std::vector<ModeSpectrum>& spectra) {
  std::vector<SpectrumEntry> entries;
  for (const ModeSpectrum& ms : spectra)
    for (const EigenPair& p : ms.pairs)
      entries.push_back({p.eigenvalue, p.m, p.index_in_mode, p.l_label});
  sort_flattened(entries);
  return entries;
}

// Closed-form round-sphere spectrum up to degree l_max, all modes.
inline std::vector<SpectrumEntry> sphere_closed_spectrum(int l_max) {
  std::vector<SpectrumEntry> entries;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m)
      entries.push_back({static_cast<double>(l) * (l + 1.0), m, l - std::abs(m), l});
  sort_flattened(entries);
  return entries;
}

struct SpectralWindow {
  double c = 1.0;
  double beta = 0.0;
  double h = 0.0;
  std::vector<int> modes;                // the character set W_h
  std::vector<std::size_t> indices;      // into the flattened spectrum
  std::vector<SpectrumEntry> members;
};

// J(h) = { j : h^2 E_j in [c, c + h^beta], m_j in W_h }, by exact enumeration.
inline SpectralWindow spectral_window(const std::vector<SpectrumEntry>& spectrum,
                                      double c, double beta, double h,
                                      const std::vector<int>& modes) {
  if (!(c > 0.0)) throw std::invalid_argument("spectral_window: need c > 0");
  SpectralWindow w;
  w.c = c;
  w.beta = beta;
  w.h = h;
  w.modes = modes;
  const double lo = c / (h * h);
  const double hi = (c + std::pow(h, beta)) / (h * h);
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const SpectrumEntry& e = spectrum[i];
    if (e.E < lo || e.E > hi) continue;
    if (std::find(modes.begin(), modes.end(), e.m) == modes.end()) continue;
    w.indices.push_back(i);
    w.members.push_back(e);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Quantum-limit functionals
// ---------------------------------------------------------------------------

// mu_j[a] = 2*pi * int a(theta) |f|^2 R dtheta, the matrix element of the
// multiplication operator by a against a normalized eigenpair.
inline double matrix_element(const ProfileCurve& curve, const EigenPair& pair,
                             const std::function<double(double)>& a) {
  const auto& grid = curve.theta_grid();
  std::vector<double> af(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) af[i] = a(grid[i]) * pair.f[i];
  const double norm = weighted_inner(curve, pair.f, pair.f);
  if (std::abs(norm - 1.0) > 1e-8)
    throw std::invalid_argument("matrix_element: pair not normalized");
  return weighted_inner(curve, af, pair.f);
}

// Predicted quantum limit (1/L) int_0^L a dtheta.
inline double limit_target(const ProfileCurve& curve,
                           const std::function<double(double)>& a) {
  const double L = curve.arc_length();
  return adaptive_quad(a, 0.0, L, 1e-12) / L;
}

// Matrix elements mu_{l,m}[a] on the round sphere from the closed-form
// basis, batched over degrees l_min..l_max at fixed m. A single upward
// recurrence per grid node covers all degrees; each element is normalized
// against the same quadrature so that mu[1] = 1 identically.
inline std::vector<double> sphere_matrix_elements(
    int m, int l_min, int l_max, const std::function<double(double)>& a,
    std::size_t grid_intervals = 0) {
  using std::numbers::pi;
  const int am = std::abs(m);
  if (l_min < am || l_min > l_max)
    throw std::invalid_argument("sphere_matrix_elements: bad degree range");
  if (grid_intervals == 0)
    grid_intervals = std::max<std::size_t>(4096, 16 * static_cast<std::size_t>(l_max));
  if (grid_intervals % 2 != 0) ++grid_intervals;

  const std::size_t nl = static_cast<std::size_t>(l_max - l_min + 1);
  std::vector<double> num(nl, 0.0), den(nl, 0.0);
  const double dth = pi / static_cast<double>(grid_intervals);
  for (std::size_t i = 0; i <= grid_intervals; ++i) {
    const double th = dth * static_cast<double>(i);
    const double x = std::cos(th);
    const double s = std::sin(th);
    double wgt;  // Simpson weight
    if (i == 0 || i == grid_intervals)
      wgt = 1.0;
    else
      wgt = (i % 2 == 1) ? 4.0 : 2.0;
    wgt *= dth / 3.0;
    const double ath = a(th);

    // Normalized upward recurrence at this node.
    double pmm = 1.0;
    if (am > 0) {
      const double omx2 = (1.0 - x) * (1.0 + x);
      double fact = 1.0;
      for (int q = 1; q <= am; ++q) {
        pmm *= omx2 * fact / (fact + 1.0);
        fact += 2.0;
      }
    }
    pmm = std::sqrt((2.0 * am + 1.0) * pmm / (4.0 * pi));
    double pprev = pmm;
    double pcur = (l_max > am) ? x * std::sqrt(2.0 * am + 3.0) * pmm : 0.0;
    double oldfact = std::sqrt(2.0 * am + 3.0);
    for (int l = am; l <= l_max; ++l) {
      double val;
      if (l == am)
        val = pprev;
      else if (l == am + 1)
        val = pcur;
      else {
        const double fact = std::sqrt(
            (4.0 * static_cast<double>(l) * l - 1.0) /
            (static_cast<double>(l) * l - static_cast<double>(am) * am));
        const double pnext = (x * pcur - pprev / oldfact) * fact;
        oldfact = fact;
        pprev = pcur;
        pcur = pnext;
        val = pnext;
      }
      if (l >= l_min) {
        const double dens = val * val * s * wgt;
        num[static_cast<std::size_t>(l - l_min)] += ath * dens;
        den[static_cast<std::size_t>(l - l_min)] += dens;
      }
    }
  }
  std::vector<double> mu(nl);
  for (std::size_t i = 0; i < nl; ++i) mu[i] = num[i] / den[i];
  return mu;
}

struct QuantumLimitReport {
  int m = 0;
  std::vector<int> l_values;
  std::vector<double> mu;
  double alpha = 0.0;            // predicted limit
  std::vector<double> deviation; // |mu - alpha|
  double decay_slope = 0.0;      // log|dev| vs log l
  double decay_r2 = 0.0;
};

inline QuantumLimitReport quantum_limit_scan(
    const ProfileCurve& curve, int m, int l_min, int l_max,
    const std::function<double(double)>& a) {
  QuantumLimitReport rep;
  rep.m = m;
  rep.alpha = limit_target(curve, a);
  rep.mu = sphere_matrix_elements(m, l_min, l_max, a);
  std::vector<double> logl, logd;
  for (int l = l_min; l <= l_max; ++l) {
    rep.l_values.push_back(l);
    const double d = std::abs(rep.mu[static_cast<std::size_t>(l - l_min)] - rep.alpha);
    rep.deviation.push_back(d);
    if (d > 0.0) {
      logl.push_back(std::log(static_cast<double>(l)));
      logd.push_back(std::log(d));
    }
  }
  if (logl.size() >= 2) {
    const LineFit fit = fit_line(logl, logd);
    rep.decay_slope = fit.slope;
    rep.decay_r2 = fit.r2;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Integrated QE statistic, selection, Weyl counting
// ---------------------------------------------------------------------------

// S(h) = h^{1-beta}/#W_h * sum_{j in J(h)} |mu_j[a] - alpha|^2
// (the n = 2, kappa = 1, d_chi = 1 specialization).
inline double integrated_qe_statistic(
    const SpectralWindow& window,
    const std::function<double(const SpectrumEntry&)>& mu_of, double alpha) {
  if (window.modes.empty())
    throw std::invalid_argument("integrated_qe_statistic: empty family");
  double sum = 0.0;
  for (const SpectrumEntry& e : window.members) {
    const double d = mu_of(e) - alpha;
    sum += d * d;
  }
  return std::pow(window.h, 1.0 - window.beta) * sum /
         static_cast<double>(window.modes.size());
}

struct SelectionResult {
  std::vector<std::size_t> lambda;  // positions within the window
  std::vector<std::size_t> gamma;
  double threshold = 0.0;           // sqrt(r)
  double density_ratio = 0.0;       // #Lambda / #J
};

// Gamma(h) = { j in J(h) : |deviation_j|^2 >= sqrt(r) }, Lambda = J - Gamma.
inline SelectionResult select_density_one(const SpectralWindow& window,
                                          const std::vector<double>& deviations,
                                          double r) {
  if (r < 0.0) throw std::invalid_argument("select_density_one: r < 0");
  if (deviations.size() != window.members.size())
    throw std::invalid_argument("select_density_one: deviation size mismatch");
  SelectionResult out;
  out.threshold = std::sqrt(r);
  for (std::size_t i = 0; i < deviations.size(); ++i) {
    if (deviations[i] * deviations[i] >= out.threshold)
      out.gamma.push_back(i);
    else
      out.lambda.push_back(i);
  }
  out.density_ratio =
      window.members.empty()
          ? 1.0
          : static_cast<double>(out.lambda.size()) / window.members.size();
  return out;
}

struct WeylResult {
  double statistic = 0.0;         // 2*pi * h^{1-beta} * #J / #W
  double reference_volume = 0.0;  // vol of the reduced shell
  std::size_t window_size = 0;
};

inline WeylResult weyl_statistic(const ProfileCurve& curve,
                                 const SpectralWindow& window) {
  if (window.members.empty())
    throw std::invalid_argument("weyl_statistic: empty window");
  WeylResult out;
  out.window_size = window.members.size();
  out.statistic = 2.0 * std::numbers::pi *
                  std::pow(window.h, 1.0 - window.beta) *
                  static_cast<double>(window.members.size()) /
                  static_cast<double>(window.modes.size());
  out.reference_volume =
      space_average_reduced_shell(curve, [](double) { return 1.0; }, window.c)
          .volume;
  return out;
}

// ---------------------------------------------------------------------------
// Theta densities and zonal concentration
// ---------------------------------------------------------------------------

// The G-invariant density Theta(theta) = |f(theta)|^2, normalized so that
// int Theta dM~ = int_0^L Theta * 2*pi*R dtheta = 1.
inline std::vector<double> theta_density(const ProfileCurve& curve,
                                         const EigenPair& pair) {
  const double norm = weighted_inner(curve, pair.f, pair.f);
  if (std::abs(norm - 1.0) > 1e-8)
    throw std::invalid_argument("theta_density: pair not normalized");
  std::vector<double> dens(pair.f.size());
  for (std::size_t i = 0; i < pair.f.size(); ++i)
    dens[i] = pair.f[i] * pair.f[i];
  return dens;
}

// Mass of |Y_{l,l}|^2 outside the equatorial band |theta - pi/2| <= epsilon.
inline double zonal_mass(int l, double epsilon) {
  using std::numbers::pi;
  if (!(epsilon > 0.0 && epsilon < pi / 2.0))
    throw std::invalid_argument("zonal_mass: epsilon out of range");
  const auto dens = [l](double th) {
    const double y = ylm_radial(l, l, th);
    return 2.0 * pi * y * y * std::sin(th);
  };
  return adaptive_quad(dens, 0.0, pi / 2.0 - epsilon, 1e-14) +
         adaptive_quad(dens, pi / 2.0 + epsilon, pi, 1e-14);
}

struct ZonalReport {
  double epsilon = 0.0;
  std::vector<int> l_values;
  std::vector<double> outside_mass;
  double decay_rate = 0.0;  // c(epsilon) = -slope of log-mass vs l
  double fit_r2 = 0.0;
};

inline ZonalReport zonal_decay_scan(int l_min, int l_max, double epsilon) {
  ZonalReport rep;
  rep.epsilon = epsilon;
  std::vector<double> ls, logm;
  for (int l = l_min; l <= l_max; ++l) {
    const double mass = zonal_mass(l, epsilon);
    rep.l_values.push_back(l);
    rep.outside_mass.push_back(mass);
    ls.push_back(static_cast<double>(l));
    logm.push_back(std::log(mass));
  }
  const LineFit fit = fit_line(ls, logm);
  rep.decay_rate = -fit.slope;
  rep.fit_r2 = fit.r2;
  return rep;
}

}  // namespace revqe
