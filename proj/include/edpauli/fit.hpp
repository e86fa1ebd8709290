#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "edpauli/errors.hpp"

namespace edpauli {

struct CosineFit {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double rss = 0.0;  // residual sum of squares
};

namespace detail {

/// For fixed omega the model A cos(wt + p) + c is linear in
/// (a, b, c) = (A cos p, -A sin p, c); returns the optimal RSS.
inline double cosine_rss(const std::vector<double>& t, const std::vector<double>& y, double omega,
                         double* a_out = nullptr, double* b_out = nullptr,
                         double* c_out = nullptr) {
  const std::size_t n = t.size();
  double scc = 0, scs = 0, sss = 0, sc = 0, ss = 0, syc = 0, sys = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double co = std::cos(omega * t[i]);
    const double si = std::sin(omega * t[i]);
    scc += co * co;
    scs += co * si;
    sss += si * si;
    sc += co;
    ss += si;
    syc += y[i] * co;
    sys += y[i] * si;
    sy += y[i];
  }
  // 3x3 normal equations, solved by Cramer's rule.
  const double m[3][3] = {{scc, scs, sc}, {scs, sss, ss}, {sc, ss, static_cast<double>(n)}};
  const double rhs[3] = {syc, sys, sy};
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (std::abs(det) < 1e-300) return 1e300;
  auto solve = [&](int col) {
    double mm[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) mm[i][j] = (j == col) ? rhs[i] : m[i][j];
    return (mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
            mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
            mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0])) /
           det;
  };
  const double a = solve(0), b = solve(1), c = solve(2);
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - a * std::cos(omega * t[i]) - b * std::sin(omega * t[i]) - c;
    rss += r * r;
  }
  if (a_out) *a_out = a;
  if (b_out) *b_out = b;
  if (c_out) *c_out = c;
  return rss;
}

}  // namespace detail

/// Least-squares fit of y(t) to A cos(omega t + phase) + const: separable in
/// the linear parameters, golden-section search over omega seeded by the
/// zero-crossing count.
inline CosineFit fit_cosine(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 8)
    throw structural_error("fit_cosine: need at least 8 samples");
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw structural_error("fit_cosine: time must increase");

  // Seed from sign changes of the mean-removed signal.
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  int crossings = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if ((y[i] - mean) * (y[i - 1] - mean) < 0.0) ++crossings;
  const double omega0 = std::max(std::numbers::pi * crossings / span, 2.0 / span);

  // Golden-section minimization of RSS(omega) in a bracket around the seed.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.5 * omega0, hi = 1.5 * omega0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = detail::cosine_rss(t, y, x1), f2 = detail::cosine_rss(t, y, x2);
  for (int i = 0; i < 200 && (hi - lo) > 1e-12 * omega0; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = detail::cosine_rss(t, y, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = detail::cosine_rss(t, y, x2);
    }
  }

  CosineFit fit;
  fit.omega = 0.5 * (lo + hi);
  double a = 0, b = 0, c = 0;
  fit.rss = detail::cosine_rss(t, y, fit.omega, &a, &b, &c);
  fit.amplitude = std::sqrt(a * a + b * b);
  fit.phase = std::atan2(-b, a);
  return fit;
}

}  // namespace edpauli
