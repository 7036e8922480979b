#pragma once

// Small numerical toolkit shared by all modules: quadrature rules,
// monotone cubic Hermite interpolation, and least-squares line fits.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace revqe {

// Composite Simpson on a uniform grid of n+1 samples, n even.
inline double simpson(std::span<const double> f, double dx) {
  const std::size_t n = f.size() - 1;
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("simpson: need an even number of intervals");
  double s = f[0] + f[n];
  for (std::size_t i = 1; i < n; i += 2) s += 4.0 * f[i];
  for (std::size_t i = 2; i < n; i += 2) s += 2.0 * f[i];
  return s * dx / 3.0;
}

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, std::size_t n_intervals) {
  if (n_intervals % 2 != 0) ++n_intervals;
  const double dx = (b - a) / static_cast<double>(n_intervals);
  std::vector<double> vals(n_intervals + 1);
  for (std::size_t i = 0; i <= n_intervals; ++i)
    vals[i] = f(a + dx * static_cast<double>(i));
  return simpson(vals, dx);
}

namespace detail {
inline double adaptive_step(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Roundoff floor: once the refinement signal is at machine precision
  // relative to the local L1 mass, further subdivision only chases noise.
  const double mag = h / 12.0 *
                     (std::abs(fa) + 4.0 * std::abs(flm) + 2.0 * std::abs(fm) +
                      4.0 * std::abs(frm) + std::abs(fb));
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol ||
      std::abs(delta) <= 1e-15 * mag)
    return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson with absolute tolerance.
inline double adaptive_quad(const std::function<double(double)>& f, double a,
                            double b, double tol = 1e-12, int max_depth = 50) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Monotone cubic Hermite interpolant (Fritsch-Carlson slope limiting).
// Optionally accepts caller-supplied node derivatives, in which case no
// limiting is applied (plain cubic Hermite).
class CubicHermite {
 public:
  CubicHermite() = default;

  CubicHermite(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    check_nodes();
    d_ = fritsch_carlson_slopes(x_, y_);
  }

  CubicHermite(std::vector<double> x, std::vector<double> y,
               std::vector<double> dy)
      : x_(std::move(x)), y_(std::move(y)), d_(std::move(dy)) {
    check_nodes();
    if (d_.size() != x_.size())
      throw std::invalid_argument("CubicHermite: derivative size mismatch");
  }

  double operator()(double x) const {
    const auto [i, t, h] = locate(x);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
  }

  double derivative(double x) const {
    const auto [i, t, h] = locate(x);
    const double g00 = 6 * t * (t - 1) / h;
    const double g10 = (3 * t - 1) * (t - 1);
    const double g01 = -g00;
    const double g11 = t * (3 * t - 2);
    return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
  }

  const std::vector<double>& nodes() const { return x_; }

  static std::vector<double> fritsch_carlson_slopes(
      const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> delta(n - 1), d(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
      delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
      d[i] = (delta[i - 1] * delta[i] > 0.0)
                 ? 0.5 * (delta[i - 1] + delta[i])
                 : 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (delta[i] == 0.0) {
        d[i] = d[i + 1] = 0.0;
        continue;
      }
      const double a = d[i] / delta[i], b = d[i + 1] / delta[i];
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double tau = 3.0 / std::sqrt(s);
        d[i] = tau * a * delta[i];
        d[i + 1] = tau * b * delta[i];
      }
    }
    return d;
  }

 private:
  void check_nodes() const {
    if (x_.size() < 2 || x_.size() != y_.size())
      throw std::invalid_argument("CubicHermite: bad node data");
    for (std::size_t i = 0; i + 1 < x_.size(); ++i)
      if (!(x_[i] < x_[i + 1]))
        throw std::invalid_argument("CubicHermite: nodes not increasing");
  }

  struct Segment {
    std::size_t i;
    double t;
    double h;
  };

  Segment locate(double x) const {
    if (x <= x_.front()) return {0, 0.0, x_[1] - x_[0]};
    if (x >= x_.back()) {
      const std::size_t i = x_.size() - 2;
      return {i, 1.0, x_[i + 1] - x_[i]};
    }
    std::size_t lo = 0, hi = x_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (x_[mid] <= x ? lo : hi) = mid;
    }
    const double h = x_[lo + 1] - x_[lo];
    return {lo, (x - x_[lo]) / h, h};
  }

  std::vector<double> x_, y_, d_;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = slope*x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw std::invalid_argument("fit_line: need >= 2 matched samples");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace revqe
