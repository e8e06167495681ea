#pragma once

// Internal quadrature helpers shared by the density and estimator code.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace patchdyn::quad {

namespace detail {

inline double simpson_rule(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_step(const F& f, double a, double b, double fa, double fm,
                     double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(a, m, fa, flm, fm);
  const double right = simpson_rule(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  // Rounding floor: no panel can beat machine precision relative to the
  // absolute mass it integrates, which matters when large contributions of
  // opposite sign cancel in the total.
  const double local_abs =
      (std::abs(fa) + 4.0 * (std::abs(flm) + std::abs(frm)) +
       2.0 * std::abs(fm) + std::abs(fb)) /
      12.0 * (b - a);
  const double floor_tol = 5e-15 * local_abs;
  if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, floor_tol))
    return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left,
                       std::max(0.5 * tol, floor_tol), depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right,
                       std::max(0.5 * tol, floor_tol), depth - 1);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction; handles a > b by sign flip.
template <typename F>
double adaptive(const F& f, double a, double b, double tol = 1e-12,
                int max_depth = 52) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = detail::simpson_rule(a, b, fa, fm, fb);
  const double scaled_tol = std::max(tol, 1e-14 * std::abs(whole));
  return sign *
         detail::adaptive_step(f, a, b, fa, fm, fb, whole, scaled_tol, max_depth);
}

// Composite Simpson over a uniform grid (odd point count preferred; a
// trapezoid patch covers a trailing even interval).
inline double simpson_uniform(const std::vector<double>& values, double h) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  std::size_t limit = n;
  if (n % 2 == 0) {
    total += 0.5 * h * (values[n - 2] + values[n - 1]);
    limit = n - 1;
  }
  double acc = values[0] + values[limit - 1];
  for (std::size_t i = 1; i + 1 < limit; ++i)
    acc += values[i] * (i % 2 == 1 ? 4.0 : 2.0);
  total += acc * h / 3.0;
  return total;
}

inline double trapezoid_uniform(const std::vector<double>& values, double h) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < n; ++i) acc += values[i];
  return acc * h;
}

}  // namespace patchdyn::quad
