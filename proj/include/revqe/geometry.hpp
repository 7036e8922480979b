#pragma once

// Surfaces of revolution: generating curves, arc-length reparametrization,
// orbit volumes and the pushforward measure on the orbit space [0,L].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "revqe/numerics.hpp"

namespace revqe {

enum class SurfaceKind { RoundSphere, Ellipsoid, TableCurve };

struct TableSample {
  double t;
  double R;
  double z;
};

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::RoundSphere;
  double axis_ratio = 1.0;             // Ellipsoid: polar semi-axis / equatorial
  std::vector<TableSample> samples;    // TableCurve only
  std::size_t grid_size = 2000;        // number of theta intervals (even)

  static SurfaceSpec round_sphere(std::size_t n = 2000) {
    return {SurfaceKind::RoundSphere, 1.0, {}, n};
  }
  static SurfaceSpec ellipsoid(double ratio, std::size_t n = 2000) {
    return {SurfaceKind::Ellipsoid, ratio, {}, n};
  }
  static SurfaceSpec table(std::vector<TableSample> s, std::size_t n = 2000) {
    return {SurfaceKind::TableCurve, 1.0, std::move(s), n};
  }
};

// Arc-length parametrized generating curve theta -> (R(theta), z(theta)),
// theta in [0,L], with R(0) = R(L) = 0 and R > 0 inside. z increases from
// the south pole, z(0) = -1 for the built-in shapes.
//
// Immutable after construction; all evaluations are pure.
class ProfileCurve {
 public:
  ProfileCurve(double L, std::vector<double> R, std::vector<double> z,
               std::vector<double> dR, bool analytic_sphere = false)
      : L_(L),
        R_(std::move(R)),
        z_(std::move(z)),
        dR_(std::move(dR)),
        analytic_sphere_(analytic_sphere) {
    const std::size_t n = R_.size();
    if (n < 3 || z_.size() != n || dR_.size() != n)
      throw std::invalid_argument("ProfileCurve: inconsistent sample arrays");
    if (!(L_ > 0.0)) throw std::invalid_argument("ProfileCurve: L <= 0");
    R_.front() = 0.0;
    R_.back() = 0.0;
    dtheta_ = L_ / static_cast<double>(n - 1);
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
      grid[i] = dtheta_ * static_cast<double>(i);
    grid.back() = L_;
    theta_grid_ = grid;
    interp_R_ = CubicHermite(theta_grid_, R_, dR_);
    interp_z_ = CubicHermite(theta_grid_, z_);
  }

  double arc_length() const { return L_; }
  std::size_t grid_points() const { return R_.size(); }
  double grid_step() const { return dtheta_; }
  const std::vector<double>& theta_grid() const { return theta_grid_; }
  const std::vector<double>& radius_samples() const { return R_; }
  const std::vector<double>& height_samples() const { return z_; }
  const std::vector<double>& radius_deriv_samples() const { return dR_; }

  double radius(double theta) const {
    check_range(theta);
    if (analytic_sphere_) return std::sin(theta);
    if (theta <= 0.0 || theta >= L_) return 0.0;
    return interp_R_(theta);
  }

  double radius_deriv(double theta) const {
    check_range(theta);
    if (analytic_sphere_) return std::cos(theta);
    return interp_R_.derivative(theta);
  }

  double height(double theta) const {
    check_range(theta);
    if (analytic_sphere_) return -std::cos(theta);
    return interp_z_(theta);
  }

  bool is_round_sphere() const { return analytic_sphere_; }

 private:
  void check_range(double theta) const {
    if (theta < -1e-12 || theta > L_ + 1e-12)
      throw std::out_of_range("ProfileCurve: theta outside [0,L]");
  }

  double L_;
  std::vector<double> R_, z_, dR_, theta_grid_;
  double dtheta_;
  CubicHermite interp_R_, interp_z_;
  bool analytic_sphere_;
};

namespace detail {

// Arc-length reparametrization of a regular parametrized curve
// t -> (R(t), z(t)), t in [t0,t1], onto a uniform grid of n intervals.
inline ProfileCurve reparametrize(
    const std::function<double(double)>& R, const std::function<double(double)>& dRdt,
    const std::function<double(double)>& z, const std::function<double(double)>& dzdt,
    double t0, double t1, std::size_t n) {
  const auto speed = [&](double t) {
    const double rp = dRdt(t), zp = dzdt(t);
    return std::sqrt(rp * rp + zp * zp);
  };

  // Cumulative arc length on a fine t-grid, then invert s(t).
  const std::size_t fine = 8 * n;
  std::vector<double> tf(fine + 1), sf(fine + 1);
  const double dt = (t1 - t0) / static_cast<double>(fine);
  tf[0] = t0;
  sf[0] = 0.0;
  for (std::size_t i = 1; i <= fine; ++i) {
    tf[i] = t0 + dt * static_cast<double>(i);
    const double ds = adaptive_quad(speed, tf[i - 1], tf[i], 1e-14);
    if (!(ds > 0.0))
      throw std::invalid_argument("reparametrize: degenerate curve segment");
    sf[i] = sf[i - 1] + ds;
  }
  const double L = sf.back();
  CubicHermite t_of_s(sf, tf);

  std::vector<double> Rv(n + 1), zv(n + 1), dRv(n + 1);
  const double dth = L / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = dth * static_cast<double>(i);
    double t = t_of_s(std::min(s, L));
    // Newton polish of s(t) = s; the interpolated guess is already close.
    for (int it = 0; it < 50; ++it) {
      const std::size_t j = std::min<std::size_t>(
          fine - 1, static_cast<std::size_t>((t - t0) / dt));
      const double s_t = sf[j] + adaptive_quad(speed, tf[j], t, 1e-14);
      const double err = s_t - s;
      if (std::abs(err) < 1e-13 * std::max(1.0, L)) break;
      t -= err / speed(t);
      t = std::clamp(t, t0, t1);
    }
    const double sp = speed(t);
    Rv[i] = R(t);
    zv[i] = z(t);
    dRv[i] = dRdt(t) / sp;  // dR/dtheta by the chain rule
  }
  Rv.front() = 0.0;
  Rv.back() = 0.0;
  return ProfileCurve(L, std::move(Rv), std::move(zv), std::move(dRv));
}

}  // namespace detail

inline ProfileCurve build_profile(const SurfaceSpec& spec) {
  using std::numbers::pi;
  std::size_t n = spec.grid_size;
  if (n < 4) throw std::invalid_argument("build_profile: grid_size too small");
  if (n % 2 != 0) ++n;  // Simpson-friendly

  switch (spec.kind) {
    case SurfaceKind::RoundSphere: {
      // Unit circle profile is already arc length: L = pi, R = sin, z = -cos.
      std::vector<double> R(n + 1), z(n + 1), dR(n + 1);
      const double dth = pi / static_cast<double>(n);
      for (std::size_t i = 0; i <= n; ++i) {
        const double th = dth * static_cast<double>(i);
        R[i] = std::sin(th);
        z[i] = -std::cos(th);
        dR[i] = std::cos(th);
      }
      R.front() = 0.0;
      R.back() = 0.0;
      return ProfileCurve(pi, std::move(R), std::move(z), std::move(dR), true);
    }
    case SurfaceKind::Ellipsoid: {
      const double a = spec.axis_ratio;
      if (!(a > 0.0))
        throw std::invalid_argument("build_profile: axis_ratio <= 0");
      return detail::reparametrize(
          [](double t) { return std::sin(t); },
          [](double t) { return std::cos(t); },
          [a](double t) { return -a * std::cos(t); },
          [a](double t) { return a * std::sin(t); }, 0.0, pi, n);
    }
    case SurfaceKind::TableCurve: {
      const auto& s = spec.samples;
      if (s.size() < 4)
        throw std::invalid_argument("build_profile: too few table samples");
      std::vector<double> t(s.size()), R(s.size()), z(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        t[i] = s[i].t;
        R[i] = s[i].R;
        z[i] = s[i].z;
        if (R[i] < 0.0)
          throw std::invalid_argument("build_profile: negative radius sample");
        const bool endpoint = (i == 0 || i + 1 == s.size());
        if (endpoint && R[i] != 0.0)
          throw std::invalid_argument(
              "build_profile: table radius must vanish at endpoints");
        if (!endpoint && !(R[i] > 0.0))
          throw std::invalid_argument(
              "build_profile: interior radius must be positive");
      }
      CubicHermite Rc(t, R), zc(t, z);
      const auto speed = [&](double u) {
        const double rp = Rc.derivative(u), zp = zc.derivative(u);
        return std::sqrt(rp * rp + zp * zp);
      };

      // If the table is already parametrized by arc length, resample it
      // directly; node values are reproduced exactly.
      std::vector<double> svals(t.size(), 0.0);
      double worst = 0.0;
      for (std::size_t i = 1; i < t.size(); ++i) {
        svals[i] = svals[i - 1] + adaptive_quad(speed, t[i - 1], t[i], 1e-14);
        worst = std::max(worst, std::abs(svals[i] - (t[i] - t.front())));
      }
      // Interpolation noise caps the detectable deviation near dtheta^2, so
      // the test is a coarse relative one.
      if (worst < 1e-4 * (t.back() - t.front())) {
        const double L = t.back() - t.front();
        std::vector<double> Rv(n + 1), zv(n + 1), dRv(n + 1);
        const double dth = L / static_cast<double>(n);
        for (std::size_t j = 0; j <= n; ++j) {
          const double th = dth * static_cast<double>(j);
          const double u = t.front() + th;
          // Snap to table nodes when the grids coincide.
          std::size_t hit = t.size();
          for (std::size_t i = 0; i < t.size(); ++i) {
            if (std::abs(t[i] - u) < 1e-12) {
              hit = i;
              break;
            }
          }
          if (hit < t.size()) {
            Rv[j] = R[hit];
            zv[j] = z[hit];
            dRv[j] = Rc.derivative(t[hit]);
          } else {
            Rv[j] = Rc(u);
            zv[j] = zc(u);
            dRv[j] = Rc.derivative(u);
          }
        }
        Rv.front() = 0.0;
        Rv.back() = 0.0;
        return ProfileCurve(L, std::move(Rv), std::move(zv), std::move(dRv));
      }
      return detail::reparametrize(
          [Rc](double u) { return Rc(u); },
          [Rc](double u) { return Rc.derivative(u); },
          [zc](double u) { return zc(u); },
          [zc](double u) { return zc.derivative(u); }, t.front(), t.back(), n);
    }
  }
  throw std::logic_error("build_profile: unknown surface kind");
}

// Circumference of the SO(2) orbit through theta: 2*pi*R(theta).
inline double orbit_volume(const ProfileCurve& curve, double theta) {
  return 2.0 * std::numbers::pi * curve.radius(theta);
}

// Density of the pushforward measure on the orbit space [0,L].
inline double quotient_measure_density(const ProfileCurve& curve, double theta) {
  return 2.0 * std::numbers::pi * curve.radius(theta);
}

// Total surface area by quadrature of the quotient density.
inline double surface_area(const ProfileCurve& curve) {
  return adaptive_quad(
      [&](double th) { return quotient_measure_density(curve, th); }, 0.0,
      curve.arc_length(), 1e-12);
}

}  // namespace revqe
