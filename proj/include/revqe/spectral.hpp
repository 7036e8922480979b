#pragma once

// Laplace-Beltrami eigenproblem on a surface of revolution by separation of
// variables: per angular mode m, the singular Sturm-Liouville problem
//   -(R f')' + (m^2/R) f = E R f   on (0,L)
// discretized with second-order finite differences in self-adjoint form and
// solved as a symmetric tridiagonal eigenproblem.

#include <lapacke.h>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "revqe/geometry.hpp"
#include "revqe/numerics.hpp"
#include "revqe/specfun.hpp"

namespace revqe {

struct ModeProblem {
  const ProfileCurve* curve = nullptr;
  int m = 0;
  std::size_t n_interior = 0;   // unknowns at theta_1..theta_{N-1}
  double dtheta = 0.0;
  std::vector<double> stiff_diag;  // K_ii
  std::vector<double> stiff_off;   // K_{i,i+1}
  std::vector<double> mass;        // diagonal weight R_i > 0
};

struct EigenPair {
  int m = 0;
  int index_in_mode = 0;  // k = 0,1,2,...
  int l_label = 0;        // round-sphere label |m| + k
  double eigenvalue = 0.0;
  std::vector<double> f;  // radial profile on theta_0..theta_N (poles included)
};

struct ModeSpectrum {
  int m = 0;
  std::vector<EigenPair> pairs;  // nondecreasing eigenvalue order
};

// Weighted L2 inner product 2*pi * int f g R dtheta by the trapezoid rule on
// the curve's grid (the weight R vanishes at both endpoints, so this equals
// the discrete mass inner product in which the eigenvectors are exactly
// orthogonal). Profiles are sampled on the full grid including poles.
inline double weighted_inner(const ProfileCurve& curve,
                             const std::vector<double>& f,
                             const std::vector<double>& g) {
  const auto& R = curve.radius_samples();
  const std::size_t n = R.size();
  if (f.size() != n || g.size() != n)
    throw std::invalid_argument("weighted_inner: grid mismatch");
  double s = 0.5 * (f[0] * g[0] * R[0] + f[n - 1] * g[n - 1] * R[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += f[i] * g[i] * R[i];
  return 2.0 * std::numbers::pi * s * curve.grid_step();
}

inline ModeProblem assemble_mode(const ProfileCurve& curve, int m,
                                 std::size_t grid_intervals) {
  if (grid_intervals < 64)
    throw std::invalid_argument("assemble_mode: need N >= 64");
  if (curve.grid_points() != grid_intervals + 1)
    throw std::invalid_argument("assemble_mode: grid size mismatch with curve");

  const std::size_t N = grid_intervals;
  const double dth = curve.grid_step();
  const std::size_t ni = N - 1;

  ModeProblem prob;
  prob.curve = &curve;
  prob.m = m;
  prob.n_interior = ni;
  prob.dtheta = dth;
  prob.stiff_diag.assign(ni, 0.0);
  prob.stiff_off.assign(ni - 1, 0.0);
  prob.mass.assign(ni, 0.0);

  // Fluxes through the half nodes theta_{i+1/2}.
  std::vector<double> Rhalf(N);
  for (std::size_t i = 0; i < N; ++i)
    Rhalf[i] = curve.radius(dth * (static_cast<double>(i) + 0.5));

  const double mm = static_cast<double>(m) * static_cast<double>(m);
  for (std::size_t i = 1; i <= ni; ++i) {
    const double Ri = curve.radius(dth * static_cast<double>(i));
    if (!(Ri > 0.0))
      throw std::invalid_argument("assemble_mode: R vanishes at interior node");
    double diag = (Rhalf[i - 1] + Rhalf[i]) / (dth * dth);
    if (m == 0) {
      // Ghost-node Neumann closure at the poles: the pole-side flux drops.
      if (i == 1) diag -= Rhalf[0] / (dth * dth);
      if (i == ni) diag -= Rhalf[N - 1] / (dth * dth);
    }
    prob.stiff_diag[i - 1] = diag + mm / Ri;
    if (i < ni) prob.stiff_off[i - 1] = -Rhalf[i] / (dth * dth);
    prob.mass[i - 1] = Ri;
  }
  return prob;
}

inline ModeSpectrum solve_mode(const ModeProblem& prob, std::size_t count) {
  const std::size_t ni = prob.n_interior;
  if (count == 0 || count > (ni + 1) / 4)
    throw std::invalid_argument("solve_mode: count exceeds resolution guard");

  // Symmetrize the generalized problem K f = E diag(R) f with D^{-1/2}.
  std::vector<double> d(ni), e(ni > 1 ? ni - 1 : 0);
  for (std::size_t i = 0; i < ni; ++i)
    d[i] = prob.stiff_diag[i] / prob.mass[i];
  for (std::size_t i = 0; i + 1 < ni; ++i)
    e[i] = prob.stiff_off[i] / std::sqrt(prob.mass[i] * prob.mass[i + 1]);

  const lapack_int n = static_cast<lapack_int>(ni);
  const lapack_int iu = static_cast<lapack_int>(count);
  std::vector<double> w(ni), zvec(ni * count);
  std::vector<lapack_int> isuppz(2 * count);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_ROW_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, iu,
      0.0, &found, w.data(), zvec.data(), iu, isuppz.data());
  if (info != 0 || found < iu)
    throw std::runtime_error("solve_mode: tridiagonal eigensolver failed");

  const ProfileCurve& curve = *prob.curve;
  ModeSpectrum spec;
  spec.m = prob.m;
  for (std::size_t k = 0; k < count; ++k) {
    EigenPair pair;
    pair.m = prob.m;
    pair.index_in_mode = static_cast<int>(k);
    pair.l_label = std::abs(prob.m) + static_cast<int>(k);
    pair.eigenvalue = (std::abs(w[k]) < 1e-9) ? 0.0 : w[k];

    pair.f.assign(ni + 2, 0.0);
    for (std::size_t i = 0; i < ni; ++i)
      pair.f[i + 1] = zvec[i * count + k] / std::sqrt(prob.mass[i]);
    // Pole values: Dirichlet for m != 0; constant extension for m = 0
    // matching the Neumann closure.
    if (prob.m == 0) {
      pair.f.front() = pair.f[1];
      pair.f.back() = pair.f[ni];
    }

    // Sign convention: first non-negligible value near theta = 0 positive.
    double peak = 0.0;
    for (double v : pair.f) peak = std::max(peak, std::abs(v));
    for (double v : pair.f) {
      if (std::abs(v) > 1e-8 * peak) {
        if (v < 0.0)
          for (double& x : pair.f) x = -x;
        break;
      }
    }

    const double nrm = std::sqrt(weighted_inner(curve, pair.f, pair.f));
    for (double& x : pair.f) x /= nrm;
    spec.pairs.push_back(std::move(pair));
  }
  return spec;
}

// Closed-form round-sphere eigenpair: E = l(l+1), radial profile the fully
// normalized spherical-harmonic factor sampled on the curve's grid. Serves
// as the oracle backend for high-degree experiments.
inline EigenPair closed_form_sphere(const ProfileCurve& curve, int l, int m) {
  if (!curve.is_round_sphere())
    throw std::invalid_argument("closed_form_sphere: round sphere only");
  if (std::abs(m) > l)
    throw std::invalid_argument("closed_form_sphere: need |m| <= l");
  EigenPair pair;
  pair.m = m;
  pair.index_in_mode = l - std::abs(m);
  pair.l_label = l;
  pair.eigenvalue = static_cast<double>(l) * (l + 1.0);
  const auto& grid = curve.theta_grid();
  pair.f.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    pair.f[i] = ylm_radial(l, m, grid[i]);
  // Fix the sign convention near theta = 0.
  double peak = 0.0;
  for (double v : pair.f) peak = std::max(peak, std::abs(v));
  for (double v : pair.f) {
    if (std::abs(v) > 1e-8 * peak) {
      if (v < 0.0)
        for (double& x : pair.f) x = -x;
      break;
    }
  }
  // Renormalize in the grid inner product so the discrete invariant holds
  // exactly; the scale factor is 1 + O(dtheta^2).
  const double nrm = std::sqrt(weighted_inner(curve, pair.f, pair.f));
  for (double& x : pair.f) x /= nrm;
  return pair;
}

// Weighted-L2 distance between two normalized profiles, insensitive to sign.
inline double profile_distance(const ProfileCurve& curve,
                               const std::vector<double>& f,
                               const std::vector<double>& g) {
  std::vector<double> diff(f.size()), sum(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    diff[i] = f[i] - g[i];
    sum[i] = f[i] + g[i];
  }
  return std::min(std::sqrt(weighted_inner(curve, diff, diff)),
                  std::sqrt(weighted_inner(curve, sum, sum)));
}

}  // namespace revqe
