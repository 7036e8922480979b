#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "revqe/geometry.hpp"
#include "revqe/spectral.hpp"

using namespace revqe;
using std::numbers::pi;

namespace {

int sign_changes(const std::vector<double>& f, double tol) {
  int changes = 0;
  double prev = 0.0;
  for (double v : f) {
    if (std::abs(v) < tol) continue;
    if (prev != 0.0 && v * prev < 0.0) ++changes;
    prev = v;
  }
  return changes;
}

}  // namespace

TEST_CASE("assembly basics on the round sphere") {
  const std::size_t N = 512;
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(N));

  const ModeProblem p0 = assemble_mode(curve, 0, N);
  CHECK(p0.n_interior == N - 1);
  for (double r : p0.mass) CHECK(r > 0.0);

  // m = 0 admits the constant eigenvector with eigenvalue 0.
  const ModeSpectrum s0 = solve_mode(p0, 3);
  CHECK(std::abs(s0.pairs[0].eigenvalue) < 1e-8);
  const auto& f0 = s0.pairs[0].f;
  for (std::size_t i = 1; i + 1 < f0.size(); ++i)
    CHECK(f0[i] == doctest::Approx(f0[1]).epsilon(1e-8));

  // m = 2: strictly positive spectrum.
  const ModeSpectrum s2 = solve_mode(assemble_mode(curve, 2, N), 3);
  for (const auto& pair : s2.pairs) CHECK(pair.eigenvalue > 0.0);

  CHECK_THROWS(assemble_mode(curve, 0, 32));
  CHECK_THROWS(solve_mode(p0, N));
}

TEST_CASE("round-sphere eigenvalues match l(l+1)") {
  const std::size_t N = 4000;
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(N));
  for (int m : {0, 1, 2, 5}) {
    const ModeSpectrum spec = solve_mode(assemble_mode(curve, m, N), 10);
    for (int k = 0; k < 10; ++k) {
      const int l = m + k;
      const double exact = static_cast<double>(l) * (l + 1.0);
      if (exact == 0.0) {
        CHECK(std::abs(spec.pairs[k].eigenvalue) < 1e-8);
      } else {
        CHECK(spec.pairs[k].eigenvalue ==
              doctest::Approx(exact).epsilon(1e-4));
      }
      CHECK(spec.pairs[k].l_label == l);
    }
  }
}

TEST_CASE("eigenfunctions match the closed-form spherical harmonics") {
  const std::size_t N = 4000;
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(N));
  const ModeSpectrum spec = solve_mode(assemble_mode(curve, 3, N), 8);
  // Fourth pair of mode 3 is l = 6; also check l = 10 against the oracle run.
  for (int k : {0, 3, 7}) {
    const int l = 3 + k;
    const EigenPair oracle = closed_form_sphere(curve, l, 3);
    CHECK(profile_distance(curve, spec.pairs[k].f, oracle.f) < 1e-3);
  }
}

TEST_CASE("mode spectra are orthonormal") {
  const std::size_t N = 1024;
  for (const auto& s :
       {SurfaceSpec::round_sphere(N), SurfaceSpec::ellipsoid(2.0, N)}) {
    const ProfileCurve curve = build_profile(s);
    for (int m : {0, 2}) {
      const ModeSpectrum spec = solve_mode(assemble_mode(curve, m, N), 8);
      for (std::size_t i = 0; i < spec.pairs.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double g =
              weighted_inner(curve, spec.pairs[i].f, spec.pairs[j].f);
          const double want = (i == j) ? 1.0 : 0.0;
          CHECK(std::abs(g - want) < 1e-8);
        }
      }
      // Eigenvalues nondecreasing.
      for (std::size_t i = 1; i < spec.pairs.size(); ++i)
        CHECK(spec.pairs[i].eigenvalue >= spec.pairs[i - 1].eigenvalue);
    }
  }
}

TEST_CASE("Sturm oscillation: k-th eigenfunction has k interior sign changes") {
  const std::size_t N = 1024;
  for (const auto& s :
       {SurfaceSpec::round_sphere(N), SurfaceSpec::ellipsoid(2.0, N)}) {
    const ProfileCurve curve = build_profile(s);
    for (int m : {0, 1, 4}) {
      const ModeSpectrum spec = solve_mode(assemble_mode(curve, m, N), 6);
      for (const auto& pair : spec.pairs) {
        double peak = 0.0;
        for (double v : pair.f) peak = std::max(peak, std::abs(v));
        CHECK(sign_changes(pair.f, 1e-6 * peak) == pair.index_in_mode);
      }
    }
  }
}

TEST_CASE("sign convention: positive near the south pole") {
  const std::size_t N = 1024;
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(N));
  const ModeSpectrum spec = solve_mode(assemble_mode(curve, 1, N), 5);
  for (const auto& pair : spec.pairs) {
    double peak = 0.0;
    for (double v : pair.f) peak = std::max(peak, std::abs(v));
    for (double v : pair.f) {
      if (std::abs(v) > 1e-8 * peak) {
        CHECK(v > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("unit-ratio ellipsoid reproduces the sphere spectrum") {
  const std::size_t N = 1024;
  const ProfileCurve sphere = build_profile(SurfaceSpec::round_sphere(N));
  const ProfileCurve ell = build_profile(SurfaceSpec::ellipsoid(1.0, N));
  const ModeSpectrum a = solve_mode(assemble_mode(sphere, 1, N), 6);
  const ModeSpectrum b = solve_mode(assemble_mode(ell, 1, N), 6);
  for (int k = 0; k < 6; ++k)
    CHECK(a.pairs[k].eigenvalue ==
          doctest::Approx(b.pairs[k].eigenvalue).epsilon(1e-6));
}

TEST_CASE("mesh doubling reduces eigenvalue error by the scheme order") {
  const int m = 0, k = 5;  // l = 5, E = 30
  const double exact = 30.0;
  double err[2];
  std::size_t Ns[2] = {1000, 2000};
  for (int i = 0; i < 2; ++i) {
    const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(Ns[i]));
    const ModeSpectrum spec = solve_mode(assemble_mode(curve, m, Ns[i]), k + 1);
    err[i] = std::abs(spec.pairs[k].eigenvalue - exact);
  }
  CHECK(err[0] / err[1] >= 3.5);
}

TEST_CASE("closed-form backend") {
  const ProfileCurve curve = build_profile(SurfaceSpec::round_sphere(2000));
  const EigenPair e00 = closed_form_sphere(curve, 0, 0);
  CHECK(e00.eigenvalue == 0.0);
  for (double v : e00.f)
    CHECK(v == doctest::Approx(1.0 / std::sqrt(4.0 * pi)));

  const EigenPair e = closed_form_sphere(curve, 10, 3);
  CHECK(weighted_inner(curve, e.f, e.f) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS(closed_form_sphere(curve, 2, 5));
}
