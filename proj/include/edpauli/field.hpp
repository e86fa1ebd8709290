#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "edpauli/grid.hpp"

namespace edpauli {

using cplx = std::complex<double>;

/// Real scalar field on a grid, one value per point.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  explicit ScalarField(const Grid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}

  static ScalarField constant(const Grid& g, double v) { return ScalarField(g, v); }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Complex scalar field on a grid.
struct ComplexField {
  Grid grid;
  std::vector<cplx> values;

  explicit ComplexField(const Grid& g, cplx fill = {})
      : grid(g), values(g.size(), fill) {}

  cplx& operator[](std::size_t i) { return values[i]; }
  cplx operator[](std::size_t i) const { return values[i]; }
};

/// Two-component complex wave function psi_{k x}, k in {+, -}.
///
/// Component k = 0 is psi_+ and k = 1 is psi_-. Values are stored as one
/// flat array, component-major: values[k * npoints + i].
struct SpinorField {
  Grid grid;
  std::vector<cplx> values;

  explicit SpinorField(const Grid& g) : grid(g), values(2 * g.size(), cplx{}) {}

  std::size_t npoints() const { return grid.size(); }

  cplx& at(int k, std::size_t i) { return values[static_cast<std::size_t>(k) * npoints() + i]; }
  cplx at(int k, std::size_t i) const {
    return values[static_cast<std::size_t>(k) * npoints() + i];
  }

  /// Uniform spinor (c_plus, c_minus) over the whole grid.
  static SpinorField uniform(const Grid& g, cplx c_plus, cplx c_minus) {
    SpinorField f(g);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
      f.values[i] = c_plus;
      f.values[n + i] = c_minus;
    }
    return f;
  }

  bool finite() const {
    for (const cplx& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

/// rho_x = sum_k |psi_k|^2, the spatial (k-summed) probability density.
inline ScalarField spatial_density(const SpinorField& psi) {
  ScalarField rho(psi.grid);
  const std::size_t n = psi.npoints();
  for (std::size_t i = 0; i < n; ++i)
    rho.values[i] = std::norm(psi.values[i]) + std::norm(psi.values[n + i]);
  return rho;
}

/// External potentials: scalar potential A0, covector A_a (one component per
/// grid axis) and magnetic axial vector B_a (always three components; B
/// couples through the Pauli matrices regardless of the grid dimension).
struct GaugeField {
  Grid grid;
  ScalarField a0;
  std::vector<ScalarField> a;     // size dim
  std::array<ScalarField, 3> b;
  /// When set, the discrete curl of A is declared to reproduce B
  /// (checkable with curl_mismatch; meaningful for dim >= 2).
  bool b_matches_a = false;

  explicit GaugeField(const Grid& g)
      : grid(g),
        a0(g),
        a(static_cast<std::size_t>(g.dim()), ScalarField(g)),
        b{ScalarField(g), ScalarField(g), ScalarField(g)} {}

  static GaugeField zero(const Grid& g) { return GaugeField(g); }

  static GaugeField uniform_b(const Grid& g, const std::array<double, 3>& b0) {
    GaugeField f(g);
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < g.size(); ++i) f.b[c].values[i] = b0[c];
    return f;
  }

  bool is_zero_a() const {
    for (const auto& comp : a)
      for (double v : comp.values)
        if (v != 0.0) return false;
    return true;
  }
};

}  // namespace edpauli
