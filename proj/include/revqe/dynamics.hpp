#pragma once

// Geodesic flow on T*M for a surface of revolution, the angular-momentum
// map, symplectic reduction to the (theta, p_theta) plane, the periodic
// reduced flow on the energy shell, and Birkhoff / space averages.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "revqe/geometry.hpp"
#include "revqe/numerics.hpp"

namespace revqe {

struct PhaseState {
  double theta = 0.0;
  double phi = 0.0;
  double p_theta = 0.0;
  double p_phi = 0.0;  // Clairaut integral
};

enum class Branch { Up, Down };

struct ReducedState {
  double theta = 0.0;
  double p_theta = 0.0;
  Branch branch = Branch::Up;
};

struct TrajectoryReport {
  std::vector<double> times;
  std::vector<PhaseState> states;
  double energy_drift = 0.0;  // max relative drift along the run
  double p_phi_drift = 0.0;   // max absolute drift
  double dt = 0.0;
};

// H = p_theta^2 + p_phi^2 / R(theta)^2 (the squared-norm Hamiltonian, so the
// flow speed in theta is 2 p_theta).
inline double hamiltonian(const ProfileCurve& curve, const PhaseState& s) {
  const double R = curve.radius(s.theta);
  if (!(R > 0.0)) {
    if (s.p_phi != 0.0)
      throw std::invalid_argument("hamiltonian: p_phi != 0 at a pole");
    return s.p_theta * s.p_theta;
  }
  return s.p_theta * s.p_theta + s.p_phi * s.p_phi / (R * R);
}

inline double momentum_map(const PhaseState& s) { return s.p_phi; }

namespace detail {

// One implicit midpoint step of the (theta, p_theta) subsystem; p_phi is an
// exact invariant and phi is advanced by midpoint quadrature afterwards.
inline bool midpoint_step(const ProfileCurve& curve, PhaseState& s, double dt,
                          double newton_tol = 1e-13) {
  const double pphi2 = s.p_phi * s.p_phi;
  const auto force = [&](double th) {
    if (pphi2 == 0.0) return 0.0;
    const double R = curve.radius(th);
    return 2.0 * pphi2 * curve.radius_deriv(th) / (R * R * R);
  };

  double th1 = s.theta + dt * 2.0 * s.p_theta;
  double pt1 = s.p_theta + dt * force(s.theta);
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const double thm = 0.5 * (s.theta + th1);
    const double ptm = 0.5 * (s.p_theta + pt1);
    const double g1 = th1 - s.theta - dt * 2.0 * ptm;
    const double g2 = pt1 - s.p_theta - dt * force(thm);
    if (std::abs(g1) + std::abs(g2) < newton_tol) {
      converged = true;
      break;
    }
    // 2x2 Newton with a finite-difference force Jacobian.
    const double eps = 1e-7;
    const double dfdth = (force(thm + eps) - force(thm - eps)) / (2.0 * eps);
    const double a11 = 1.0, a12 = -dt;
    const double a21 = -0.5 * dt * dfdth, a22 = 1.0;
    const double det = a11 * a22 - a12 * a21;
    th1 -= (a22 * g1 - a12 * g2) / det;
    pt1 -= (a11 * g2 - a21 * g1) / det;
  }
  if (!converged) return false;

  const double thm = 0.5 * (s.theta + th1);
  if (s.p_phi != 0.0) {
    const double Rm = curve.radius(thm);
    s.phi += dt * 2.0 * s.p_phi / (Rm * Rm);
    s.phi = std::fmod(s.phi, 2.0 * std::numbers::pi);
    if (s.phi < 0.0) s.phi += 2.0 * std::numbers::pi;
  }
  s.theta = th1;
  s.p_theta = pt1;
  return true;
}

}  // namespace detail

// Fixed-step reversible integration of the geodesic flow. Steps are halved
// near the poles when p_phi != 0; persistent failure is a hard error.
inline TrajectoryReport integrate(const ProfileCurve& curve, PhaseState s0,
                                  double T, double dt,
                                  std::size_t sample_every = 1) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt <= 0");
  const double H0 = hamiltonian(curve, s0);
  const double pphi0 = s0.p_phi;

  TrajectoryReport rep;
  rep.dt = dt;
  rep.times.push_back(0.0);
  rep.states.push_back(s0);

  PhaseState s = s0;
  const long nsteps = std::lround(T / dt);
  const double L = curve.arc_length();
  for (long n = 1; n <= nsteps; ++n) {
    // Near-pole guard: refine the step when the centrifugal term is stiff.
    const double pole_dist = std::min(s.theta, L - s.theta);
    int substeps = 1;
    if (s.p_phi != 0.0 && pole_dist < 16.0 * dt * std::abs(2.0 * s.p_theta))
      substeps = 16;
    const double h = dt / substeps;
    for (int k = 0; k < substeps; ++k) {
      if (!detail::midpoint_step(curve, s, h)) {
        throw std::runtime_error("integrate: midpoint Newton failed near pole");
      }
      // Meridian geodesics (p_phi = 0) pass through the poles: continue the
      // chart by reflection, phi jumping by pi.
      if (s.p_phi == 0.0) {
        while (s.theta < 0.0 || s.theta > L) {
          if (s.theta < 0.0) s.theta = -s.theta;
          if (s.theta > L) s.theta = 2.0 * L - s.theta;
          s.p_theta = -s.p_theta;
          s.phi = std::fmod(s.phi + std::numbers::pi, 2.0 * std::numbers::pi);
        }
      } else if (s.theta < 0.0 || s.theta > L) {
        throw std::runtime_error("integrate: pole crossed with p_phi != 0");
      }
    }
    if (n % static_cast<long>(sample_every) == 0 || n == nsteps) {
      rep.times.push_back(h * substeps * static_cast<double>(n));
      rep.states.push_back(s);
    }
    const double H = hamiltonian(curve, s);
    rep.energy_drift = std::max(rep.energy_drift,
                                std::abs(H - H0) / std::max(1.0, std::abs(H0)));
    rep.p_phi_drift = std::max(rep.p_phi_drift, std::abs(s.p_phi - pphi0));
  }
  return rep;
}

// Projection to the reduced phase space; defined on the zero momentum level.
inline ReducedState reduce(const PhaseState& s) {
  if (s.p_phi != 0.0)
    throw std::invalid_argument("reduce: momentum map must vanish");
  ReducedState r;
  r.theta = s.theta;
  r.p_theta = s.p_theta;
  r.branch = (s.p_theta >= 0.0) ? Branch::Up : Branch::Down;
  return r;
}

struct ReducedTrajectory {
  std::vector<double> times;
  std::vector<ReducedState> states;
  double measured_period = 0.0;  // closed-orbit period 2L / (2 sqrt(c)) * 2
};

namespace detail {

// The reduced orbit on the shell p_theta^2 = c is a cycle of length 2L in
// theta traversed at speed 2 sqrt(c): theta runs 0 -> L on one branch, then
// back on the other. Position on the cycle at time t, exactly.
inline ReducedState cycle_state(double u0, double v, double L, double t) {
  double u = std::fmod(u0 + v * t, 2.0 * L);
  if (u < 0.0) u += 2.0 * L;
  ReducedState r;
  if (u <= L) {
    r.theta = u;
    r.branch = Branch::Up;
    r.p_theta = 0.5 * v;
  } else {
    r.theta = 2.0 * L - u;
    r.branch = Branch::Down;
    r.p_theta = -0.5 * v;
  }
  return r;
}

inline double cycle_coordinate(const ReducedState& r, double L) {
  return (r.branch == Branch::Up) ? r.theta : 2.0 * L - r.theta;
}

}  // namespace detail

// Exact piecewise-linear reduced flow on the shell p_theta^2 = c, with
// branch flips at the poles.
inline ReducedTrajectory reduced_flow(const ProfileCurve& curve,
                                      const ReducedState& r0, double T,
                                      std::size_t samples = 256) {
  const double c = r0.p_theta * r0.p_theta;
  if (!(c > 0.0)) throw std::invalid_argument("reduced_flow: need c > 0");
  const double L = curve.arc_length();
  const double v = 2.0 * std::sqrt(c);
  const double u0 = detail::cycle_coordinate(r0, L);

  ReducedTrajectory traj;
  traj.measured_period = 2.0 * L / v;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(samples);
    traj.times.push_back(t);
    traj.states.push_back(detail::cycle_state(u0, v, L, t));
  }
  return traj;
}

// Time average of f(theta) along the reduced flow, by exact piecewise
// integration (adaptive quadrature per linear segment).
inline double birkhoff_average(const ProfileCurve& curve,
                               const std::function<double(double)>& f,
                               const ReducedState& r0, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("birkhoff_average: T <= 0");
  const double c = r0.p_theta * r0.p_theta;
  if (!(c > 0.0)) throw std::invalid_argument("birkhoff_average: need c > 0");
  const double L = curve.arc_length();
  const double v = 2.0 * std::sqrt(c);
  const double u0 = detail::cycle_coordinate(r0, L);

  // Integrate f(theta(u)) du along the cycle; theta(u) folds at u = L.
  const auto f_cycle = [&](double u) {
    u = std::fmod(u, 2.0 * L);
    if (u < 0.0) u += 2.0 * L;
    return f(u <= L ? u : 2.0 * L - u);
  };
  double total = 0.0;
  const double u_end = u0 + v * T;
  // Split at fold points so each quadrature panel sees a smooth integrand.
  double u = u0;
  while (u < u_end - 1e-14) {
    const double next_fold = (std::floor(u / L + 1e-12) + 1.0) * L;
    const double stop = std::min(next_fold, u_end);
    total += adaptive_quad(f_cycle, u, stop, 1e-12);
    u = stop;
  }
  return total / (v * T);
}

// Normalized average of f over the reduced shell with branch density
// dtheta / (2 sqrt(c)) on each of the two branches; also exposes the
// unnormalized shell volume.
struct ShellAverage {
  double mean = 0.0;
  double volume = 0.0;
};

inline ShellAverage space_average_reduced_shell(
    const ProfileCurve& curve, const std::function<double(double)>& f,
    double c) {
  if (!(c > 0.0))
    throw std::invalid_argument("space_average_reduced_shell: need c > 0");
  const double L = curve.arc_length();
  const double density = 1.0 / (2.0 * std::sqrt(c));
  const double integral =
      2.0 * density * adaptive_quad(f, 0.0, L, 1e-12);  // both branches
  ShellAverage out;
  out.volume = 2.0 * density * L;
  out.mean = integral / out.volume;
  return out;
}

// Max discrepancy of |<a o phi_t>_G - <a>_G o phi_t| over the given sample
// states, the group average taken by periodic trapezoid over the circle.
inline double check_evolvred(const ProfileCurve& curve,
                             const std::function<double(const PhaseState&)>& a,
                             double t, const std::vector<PhaseState>& samples,
                             double dt = 1e-3, std::size_t n_phi = 64) {
  const double two_pi = 2.0 * std::numbers::pi;
  double worst = 0.0;
  for (const PhaseState& s : samples) {
    // <a>_G o phi_t at s.
    const TrajectoryReport fwd = integrate(curve, s, t, dt);
    const PhaseState st = fwd.states.back();
    double avg_then_flow = 0.0;
    for (std::size_t i = 0; i < n_phi; ++i) {
      PhaseState rot = st;
      rot.phi = std::fmod(st.phi + two_pi * i / n_phi, two_pi);
      avg_then_flow += a(rot);
    }
    avg_then_flow /= static_cast<double>(n_phi);

    // <a o phi_t>_G at s: flow each rotated copy, then average.
    double flow_then_avg = 0.0;
    for (std::size_t i = 0; i < n_phi; ++i) {
      PhaseState rot = s;
      rot.phi = std::fmod(s.phi + two_pi * i / n_phi, two_pi);
      const TrajectoryReport traj = integrate(curve, rot, t, dt);
      flow_then_avg += a(traj.states.back());
    }
    flow_then_avg /= static_cast<double>(n_phi);

    worst = std::max(worst, std::abs(flow_then_avg - avg_then_flow));
  }
  return worst;
}

}  // namespace revqe
