#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "revqe/dynamics.hpp"
#include "revqe/geometry.hpp"
#include "revqe/semiclassics.hpp"

using namespace revqe;
using std::numbers::pi;

TEST_CASE("hamiltonian values on the round sphere") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  CHECK(hamiltonian(curve, {pi / 2.0, 0.0, 1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(hamiltonian(curve, {pi / 2.0, 0.0, 0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(hamiltonian(curve, {pi / 4.0, 0.0, 0.0, 1.0}) == doctest::Approx(2.0));
  CHECK_THROWS(hamiltonian(curve, {0.0, 0.0, 1.0, 0.5}));
}

TEST_CASE("momentum map is the Clairaut integral and is conserved") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  CHECK(momentum_map({0.3, 0.0, 0.0, 2.0}) == doctest::Approx(2.0));

  const PhaseState s0{pi / 3.0, 0.2, 0.5, 0.7};
  const TrajectoryReport rep = integrate(curve, s0, 1.0, 1e-3);
  CHECK(rep.p_phi_drift < 1e-12);

  // Meridian data: p_phi stays identically zero.
  const TrajectoryReport mer = integrate(curve, {1.0, 0.0, 0.8, 0.0}, 2.0, 1e-3);
  for (const auto& s : mer.states) CHECK(s.p_phi == 0.0);
}

TEST_CASE("energy conservation and reversibility") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  const PhaseState s0{pi / 2.0, 0.1, 0.6, 0.8};
  const double dt = 2e-4;  // 10^3 steps over T = 0.2
  const TrajectoryReport fwd = integrate(curve, s0, 0.2, dt);
  CHECK(fwd.energy_drift < 1e-8);

  // Time reversal: flip momenta, integrate the same span, flip back.
  PhaseState back = fwd.states.back();
  back.p_theta = -back.p_theta;
  back.p_phi = -back.p_phi;
  const TrajectoryReport rev = integrate(curve, back, 0.2, dt);
  const PhaseState end = rev.states.back();
  CHECK(std::abs(end.theta - s0.theta) < 1e-8);
  CHECK(std::abs(-end.p_theta - s0.p_theta) < 1e-8);
  CHECK(std::abs(-end.p_phi - s0.p_phi) < 1e-8);
}

TEST_CASE("equatorial circle keeps theta constant") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  const TrajectoryReport rep =
      integrate(curve, {pi / 2.0, 0.0, 0.0, 1.0}, 1.0, 1e-3);
  for (const auto& s : rep.states)
    CHECK(std::abs(s.theta - pi / 2.0) < 1e-10);
}

TEST_CASE("rotation equivariance of the flow") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  const PhaseState s0{1.1, 0.4, 0.3, 0.9};
  const double alpha = 1.7;
  PhaseState rot = s0;
  rot.phi = s0.phi + alpha;
  const PhaseState a = integrate(curve, s0, 0.8, 1e-3).states.back();
  const PhaseState b = integrate(curve, rot, 0.8, 1e-3).states.back();
  CHECK(b.theta == doctest::Approx(a.theta).epsilon(1e-12));
  CHECK(b.p_theta == doctest::Approx(a.p_theta).epsilon(1e-12));
  CHECK(b.p_phi == doctest::Approx(a.p_phi).epsilon(1e-12));
  const double dphi = std::remainder(b.phi - a.phi - alpha, 2.0 * pi);
  CHECK(std::abs(dphi) < 1e-9);
}

TEST_CASE("reduction forgets phi and rejects nonzero momentum") {
  const ReducedState r1 = reduce({0.7, 0.1, 0.5, 0.0});
  const ReducedState r2 = reduce({0.7, 2.9, 0.5, 0.0});
  CHECK(r1.theta == r2.theta);
  CHECK(r1.p_theta == r2.p_theta);
  CHECK(r1.branch == r2.branch);
  CHECK_THROWS(reduce({0.7, 0.1, 0.5, 0.1}));
}

TEST_CASE("reduction commutes with time evolution for meridian data") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  const PhaseState s0{0.9, 0.0, 0.7, 0.0};
  const double T = 1.3;
  const PhaseState sT = integrate(curve, s0, T, 1e-4).states.back();
  const ReducedState direct = reduce(sT);

  const ReducedState r0 = reduce(s0);
  ReducedTrajectory traj = reduced_flow(curve, r0, T, 1);
  const ReducedState via_reduced = traj.states.back();
  CHECK(direct.theta == doctest::Approx(via_reduced.theta).epsilon(1e-7));
  CHECK(std::abs(direct.p_theta - via_reduced.p_theta) < 1e-7);
}

TEST_CASE("reduced flow is periodic and covers both branches") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  const ReducedState r0{0.4, 1.0, Branch::Up};  // c = 1
  const ReducedTrajectory traj = reduced_flow(curve, r0, pi, 512);
  CHECK(traj.measured_period == doctest::Approx(pi).epsilon(1e-14));

  bool up = false, down = false;
  for (const auto& s : traj.states) {
    up = up || (s.branch == Branch::Up);
    down = down || (s.branch == Branch::Down);
  }
  CHECK(up);
  CHECK(down);

  // Closed orbit: back to the start after one period.
  const ReducedState end = traj.states.back();
  CHECK(end.theta == doctest::Approx(r0.theta).epsilon(1e-12));
  CHECK(end.p_theta == doctest::Approx(r0.p_theta).epsilon(1e-12));

  CHECK_THROWS(reduced_flow(curve, {0.4, 0.0, Branch::Up}, 1.0));
}

TEST_CASE("Birkhoff averages over one period") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  const ReducedState r0{0.4, 1.0, Branch::Up};
  const double period = pi;
  CHECK(birkhoff_average(curve, [](double) { return 1.0; }, r0, period) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(birkhoff_average(curve, [](double th) { return std::cos(th); },
                                  r0, period)) < 1e-10);
  CHECK(birkhoff_average(curve, [](double th) { return th; }, r0, period) ==
        doctest::Approx(pi / 2.0).epsilon(1e-8));
}

TEST_CASE("space average on the reduced shell and the shell volume") {
  const ProfileCurve sphere = build_profile(SurfaceSpec::round_sphere(512));
  const ShellAverage one =
      space_average_reduced_shell(sphere, [](double) { return 1.0; }, 1.0);
  CHECK(one.mean == doctest::Approx(1.0));
  CHECK(one.volume == doctest::Approx(pi).epsilon(1e-10));

  const ShellAverage lin =
      space_average_reduced_shell(sphere, [](double th) { return th; }, 1.0);
  CHECK(lin.mean == doctest::Approx(pi / 2.0).epsilon(1e-10));

  // Equality with the Birkhoff average over a full period, several f.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (const auto& spec :
       {SurfaceSpec::round_sphere(512), SurfaceSpec::ellipsoid(2.0, 512)}) {
    const ProfileCurve curve = build_profile(spec);
    const double L = curve.arc_length();
    for (int trial = 0; trial < 5; ++trial) {
      const double a = coef(rng), b = coef(rng), c = coef(rng);
      const auto f = [=](double th) {
        return a + b * std::sin(2.0 * pi * th / L) + c * th * th;
      };
      const double cval = 2.25;
      const ReducedState r0{0.3 * L, std::sqrt(cval), Branch::Down};
      const double period = 2.0 * L / (2.0 * std::sqrt(cval));
      const double time_avg = birkhoff_average(curve, f, r0, period);
      const double space_avg =
          space_average_reduced_shell(curve, f, cval).mean;
      CHECK(time_avg == doctest::Approx(space_avg).epsilon(1e-8));
    }
  }
}

TEST_CASE("classical-quantum correspondence of the shell average") {
  for (const auto& spec :
       {SurfaceSpec::round_sphere(512), SurfaceSpec::ellipsoid(2.0, 512)}) {
    const ProfileCurve curve = build_profile(spec);
    const auto f = [](double th) { return th + std::cos(3.0 * th); };
    CHECK(space_average_reduced_shell(curve, f, 1.0).mean ==
          doctest::Approx(limit_target(curve, f)).epsilon(1e-8));
  }
}

TEST_CASE("time evolution commutes with the group average") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(512));
  std::mt19937 rng(0);
  std::uniform_real_distribution<double> th_dist(0.3, pi - 0.3);
  std::uniform_real_distribution<double> p_dist(0.4, 1.2);
  std::vector<PhaseState> samples;
  for (int i = 0; i < 8; ++i)
    samples.push_back({th_dist(rng), th_dist(rng), p_dist(rng), 0.0});

  // Non-invariant observable cos(phi) g(theta): both sides average to zero.
  const auto a = [](const PhaseState& s) {
    return std::cos(s.phi) * (1.0 + 0.5 * std::sin(s.theta));
  };
  CHECK(check_evolvred(curve, a, 0.7, samples) < 1e-6);

  // Invariant observable: discrepancy at integrator tolerance.
  const auto inv = [](const PhaseState& s) {
    return s.theta * s.theta + s.p_theta;
  };
  CHECK(check_evolvred(curve, inv, 0.7, samples) < 1e-9);
}
