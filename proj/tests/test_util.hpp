#pragma once

// Shared helpers for the unit suites: deterministic random fields and
// normalized Gaussian packets.

#include <array>
#include <cmath>
#include <complex>

#include "edpauli/field.hpp"
#include "edpauli/phase_space.hpp"
#include "edpauli/rng.hpp"

namespace testutil {

using edpauli::cplx;
using edpauli::Grid;
using edpauli::ScalarField;
using edpauli::SpinorField;

inline SpinorField random_spinor(const Grid& g, std::uint64_t seed, bool normalize = true) {
  SpinorField psi(g);
  edpauli::CounterRng rng(seed, 0, 0);
  for (auto& v : psi.values) v = cplx(rng.next_gaussian(), rng.next_gaussian());
  if (normalize) {
    const double n = std::sqrt(edpauli::squared_norm(psi));
    for (auto& v : psi.values) v /= n;
  }
  return psi;
}

inline ScalarField random_scalar(const Grid& g, std::uint64_t seed) {
  ScalarField f(g);
  edpauli::CounterRng rng(seed, 0, 0);
  for (auto& v : f.values) v = rng.next_gaussian();
  return f;
}

inline edpauli::PhaseSpaceTangent random_tangent(const Grid& g, std::uint64_t seed) {
  edpauli::PhaseSpaceTangent t(g);
  edpauli::CounterRng rng(seed, 0, 0);
  for (auto& v : t.dpsi) v = cplx(rng.next_gaussian(), rng.next_gaussian());
  return t;
}

/// Normalized Gaussian packet with position standard deviation `sigma`,
/// center `x0`, uniform momentum `p` and spinor coefficients (c_plus, c_minus).
inline SpinorField gaussian_packet(const Grid& g, const std::array<double, 3>& x0, double sigma,
                                   const std::array<double, 3>& p, cplx c_plus, cplx c_minus,
                                   double hbar = 1.0) {
  SpinorField psi(g);
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = g.unflatten(i);
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double dx = g.coordinate(a, idx[a]) - x0[a];
      r2 += dx * dx;
      phase += p[a] * g.coordinate(a, idx[a]);
    }
    const cplx env = std::exp(cplx(-r2 / (4.0 * sigma * sigma), phase / hbar));
    psi.values[i] = c_plus * env;
    psi.values[n + i] = c_minus * env;
  }
  const double nrm = std::sqrt(edpauli::squared_norm(psi));
  for (auto& v : psi.values) v /= nrm;
  return psi;
}

}  // namespace testutil
