#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "edpauli/field.hpp"
#include "edpauli/params.hpp"

namespace edpauli {

namespace detail {

/// Central second-order difference along `axis`, periodic wraparound.
template <class T>
void central_diff(const Grid& g, std::span<const T> in, std::span<T> out, int axis) {
  const double inv2h = 1.0 / (2.0 * g.spacing(axis));
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = g.neighbor(i, axis, +1);
    const std::size_t im = g.neighbor(i, axis, -1);
    out[i] = (in[ip] - in[im]) * inv2h;
  }
}

/// Multilinear interpolation of flat values at a continuous position,
/// periodic in every axis. Positions are taken in box coordinates.
template <class T>
T interpolate_periodic(const Grid& g, std::span<const T> values,
                       const std::array<double, 3>& pos) {
  const int dim = g.dim();
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const double u = (pos[a] + 0.5 * g.extent(a)) / g.spacing(a);
    const double fl = std::floor(u);
    base[a] = g.wrap_index(a, static_cast<long>(fl));
    frac[a] = u - fl;
  }
  T acc{};
  const int corners = 1 << dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      const int bit = (c >> a) & 1;
      idx[a] = bit ? g.wrap_index(a, base[a] + 1) : base[a];
      w *= bit ? frac[a] : (1.0 - frac[a]);
    }
    acc += w * values[g.flatten(idx)];
  }
  return acc;
}

/// Standard 3-point second difference along `axis`, periodic.
template <class T>
void second_diff_add(const Grid& g, std::span<const T> in, std::span<T> out, int axis,
                     double scale) {
  const double invh2 = scale / (g.spacing(axis) * g.spacing(axis));
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = g.neighbor(i, axis, +1);
    const std::size_t im = g.neighbor(i, axis, -1);
    out[i] += (in[ip] - 2.0 * in[i] + in[im]) * invh2;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quadrature

/// Sum over grid points times the cell volume; linear in its argument.
inline double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

inline cplx integrate(const ComplexField& f) {
  cplx s{};
  for (const cplx& v : f.values) s += v;
  return s * f.grid.cell_volume();
}

/// Integral of psi_+ + psi_- over the box.
inline cplx integrate(const SpinorField& f) {
  cplx s{};
  for (const cplx& v : f.values) s += v;
  return s * f.grid.cell_volume();
}

inline double l1_norm(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += std::abs(v);
  return s * f.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// Derivative stencils

inline ScalarField gradient(const ScalarField& f, int axis) {
  f.grid.require_axis(axis);
  ScalarField out(f.grid);
  detail::central_diff<double>(f.grid, f.values, out.values, axis);
  return out;
}

inline ComplexField gradient(const ComplexField& f, int axis) {
  f.grid.require_axis(axis);
  ComplexField out(f.grid);
  detail::central_diff<cplx>(f.grid, f.values, out.values, axis);
  return out;
}

inline SpinorField gradient(const SpinorField& f, int axis) {
  f.grid.require_axis(axis);
  SpinorField out(f.grid);
  const std::size_t n = f.npoints();
  for (int k = 0; k < 2; ++k) {
    auto in = std::span<const cplx>(f.values).subspan(k * n, n);
    auto o = std::span<cplx>(out.values).subspan(k * n, n);
    detail::central_diff<cplx>(f.grid, in, o, axis);
  }
  return out;
}

/// 3-point (per axis) Laplacian of a spinor field.
inline SpinorField laplacian(const SpinorField& f) {
  SpinorField out(f.grid);
  const std::size_t n = f.npoints();
  for (int k = 0; k < 2; ++k) {
    auto in = std::span<const cplx>(f.values).subspan(k * n, n);
    auto o = std::span<cplx>(out.values).subspan(k * n, n);
    for (int a = 0; a < f.grid.dim(); ++a)
      detail::second_diff_add<cplx>(f.grid, in, o, a, 1.0);
  }
  return out;
}

/// D_a psi = d_a psi - (i beta / hbar) A_a psi, with the central gradient.
inline SpinorField covariant_derivative(const SpinorField& psi, const GaugeField& gauge,
                                        const EdParams& params, int axis) {
  psi.grid.require_axis(axis);
  require_same_grid(psi.grid, gauge.grid, "covariant_derivative");
  SpinorField out = gradient(psi, axis);
  const std::size_t n = psi.npoints();
  const cplx coef = cplx(0.0, -params.beta / params.hbar);
  const std::vector<double>& a = gauge.a[axis].values;
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < n; ++i) out.at(k, i) += coef * a[i] * psi.at(k, i);
  return out;
}

/// Covariant Laplacian sum_a D_a D_a psi in expanded form:
///   lap3 psi - (i beta/hbar) sum_a [A_a d_a psi + d_a(A_a psi)]
///            - (beta/hbar)^2 sum_a A_a^2 psi,
/// with the 3-point stencil for the pure second derivative (discrete
/// dispersion -(2 - 2 cos kh)/h^2) and central differences for the mixed
/// terms. Hermitian on the periodic grid for real A.
inline SpinorField covariant_laplacian(const SpinorField& psi, const GaugeField& gauge,
                                       const EdParams& params) {
  require_same_grid(psi.grid, gauge.grid, "covariant_laplacian");
  const Grid& g = psi.grid;
  const std::size_t n = psi.npoints();
  SpinorField out(g);

  for (int k = 0; k < 2; ++k) {
    auto in = std::span<const cplx>(psi.values).subspan(k * n, n);
    auto o = std::span<cplx>(out.values).subspan(k * n, n);
    for (int a = 0; a < g.dim(); ++a) detail::second_diff_add<cplx>(g, in, o, a, 1.0);
  }
  if (gauge.is_zero_a()) return out;

  const double bh = params.beta / params.hbar;
  std::vector<cplx> tmp(n), tmp2(n);
  for (int k = 0; k < 2; ++k) {
    auto in = std::span<const cplx>(psi.values).subspan(k * n, n);
    for (int a = 0; a < g.dim(); ++a) {
      const std::vector<double>& av = gauge.a[a].values;
      // A d_a psi
      detail::central_diff<cplx>(g, in, std::span<cplx>(tmp), a);
      for (std::size_t i = 0; i < n; ++i) tmp[i] *= av[i];
      // + d_a (A psi)
      for (std::size_t i = 0; i < n; ++i) tmp2[i] = av[i] * in[i];
      std::vector<cplx> dtmp2(n);
      detail::central_diff<cplx>(g, std::span<const cplx>(tmp2), std::span<cplx>(dtmp2), a);
      const cplx coef(0.0, -bh);
      for (std::size_t i = 0; i < n; ++i)
        out.at(k, i) += coef * (tmp[i] + dtmp2[i]) - bh * bh * av[i] * av[i] * in[i];
    }
  }
  return out;
}

/// Max pointwise |curl A - B| over the components representable on the grid
/// (dim = 3: all three; dim = 2: the z component; dim = 1: none, returns 0
/// unless B is nonzero, in which case the B magnitude itself is reported).
inline double curl_mismatch(const GaugeField& gauge) {
  const Grid& g = gauge.grid;
  const std::size_t n = g.size();
  double worst = 0.0;
  auto d = [&](int comp, int axis) {
    ScalarField out(g);
    detail::central_diff<double>(g, gauge.a[comp].values, out.values, axis);
    return out;
  };
  if (g.dim() == 3) {
    const ScalarField dyAz = d(2, 1), dzAy = d(1, 2);
    const ScalarField dzAx = d(0, 2), dxAz = d(2, 0);
    const ScalarField dxAy = d(1, 0), dyAx = d(0, 1);
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(dyAz[i] - dzAy[i] - gauge.b[0][i]));
      worst = std::max(worst, std::abs(dzAx[i] - dxAz[i] - gauge.b[1][i]));
      worst = std::max(worst, std::abs(dxAy[i] - dyAx[i] - gauge.b[2][i]));
    }
  } else if (g.dim() == 2) {
    const ScalarField dxAy = d(1, 0), dyAx = d(0, 1);
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(dxAy[i] - dyAx[i] - gauge.b[2][i]));
  } else {
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(gauge.b[c][i]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Density moments

/// <x_a> of a (not necessarily normalized) density.
inline std::array<double, 3> density_mean(const ScalarField& rho) {
  const Grid& g = rho.grid;
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  double w = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    w += rho[i];
    for (int a = 0; a < g.dim(); ++a) mean[a] += rho[i] * g.coordinate(a, idx[a]);
  }
  for (int a = 0; a < g.dim(); ++a) mean[a] = (w != 0.0) ? mean[a] / w : 0.0;
  return mean;
}

inline double density_variance(const ScalarField& rho, int axis) {
  rho.grid.require_axis(axis);
  const Grid& g = rho.grid;
  const auto mean = density_mean(rho);
  double w = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    const double dx = g.coordinate(axis, idx[axis]) - mean[axis];
    w += rho[i];
    m2 += rho[i] * dx * dx;
  }
  return (w != 0.0) ? m2 / w : 0.0;
}

}  // namespace edpauli
