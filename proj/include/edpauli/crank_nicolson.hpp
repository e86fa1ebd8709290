#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "edpauli/errors.hpp"
#include "edpauli/field.hpp"

namespace edpauli {

/// Iterative-solver knobs for the Crank-Nicolson half-step systems.
struct CnOptions {
  double tol = 1e-12;  // relative residual of (1 + i dt/2hbar H) psi' = rhs
  int max_iter = 500;
};

namespace detail {

inline cplx dotc(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double norm2(const std::vector<cplx>& a) {
  double s = 0.0;
  for (const cplx& v : a) s += std::norm(v);
  return std::sqrt(s);
}

}  // namespace detail

/// One Crank-Nicolson step psi' = (1 + i lam H)^{-1} (1 - i lam H) psi with
/// lam = dt / (2 hbar). H must act as a linear Hermitian operator on spinor
/// fields; the Cayley transform is then exactly unitary up to the solver
/// tolerance. The linear system is solved matrix-free by conjugate gradients
/// on the normal equations (A^dag A = 1 + lam^2 H^2, Hermitian positive
/// definite) with Jacobi preconditioning from `h_diag` (pass empty to skip).
template <class Op>
SpinorField cn_step(Op&& apply_h, const SpinorField& psi, double dt, double hbar,
                    const std::vector<double>& h_diag, const CnOptions& opts = {}) {
  const double lam = dt / (2.0 * hbar);
  const std::size_t m = psi.values.size();

  auto apply_vec = [&](const std::vector<cplx>& in) {
    SpinorField f(psi.grid);
    f.values = in;
    return apply_h(f).values;
  };
  // A x = x + i lam H x
  auto apply_a = [&](const std::vector<cplx>& in) {
    std::vector<cplx> out = apply_vec(in);
    for (std::size_t i = 0; i < m; ++i) out[i] = in[i] + cplx(0.0, lam) * out[i];
    return out;
  };
  // A^dag A x = x + lam^2 H (H x)
  auto apply_n = [&](const std::vector<cplx>& in) {
    std::vector<cplx> hx = apply_vec(in);
    std::vector<cplx> hhx = apply_vec(hx);
    std::vector<cplx> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = in[i] + lam * lam * hhx[i];
    return out;
  };

  std::vector<double> precond(m, 1.0);
  if (h_diag.size() == m)
    for (std::size_t i = 0; i < m; ++i) precond[i] = 1.0 / (1.0 + lam * lam * h_diag[i] * h_diag[i]);

  // rhs = (1 - i lam H) psi
  std::vector<cplx> rhs = apply_vec(psi.values);
  for (std::size_t i = 0; i < m; ++i) rhs[i] = psi.values[i] - cplx(0.0, lam) * rhs[i];
  const double rhs_norm = detail::norm2(rhs);
  if (rhs_norm == 0.0) return SpinorField(psi.grid);

  // Normal-equation right-hand side c = A^dag rhs = rhs - i lam H rhs.
  std::vector<cplx> c = apply_vec(rhs);
  for (std::size_t i = 0; i < m; ++i) c[i] = rhs[i] - cplx(0.0, lam) * c[i];

  std::vector<cplx> x = psi.values;  // warm start
  std::vector<cplx> r = apply_n(x);
  for (std::size_t i = 0; i < m; ++i) r[i] = c[i] - r[i];
  std::vector<cplx> z(m), p(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = precond[i] * r[i];
  p = z;
  double rz = detail::dotc(r, z).real();

  double true_res = 1.0;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    // True residual of the original system, checked every iteration.
    std::vector<cplx> ax = apply_a(x);
    for (std::size_t i = 0; i < m; ++i) ax[i] = rhs[i] - ax[i];
    true_res = detail::norm2(ax) / rhs_norm;
    if (true_res <= opts.tol) break;

    std::vector<cplx> np = apply_n(p);
    const double pnp = detail::dotc(p, np).real();
    if (!(pnp > 0.0)) break;  // stagnation at rounding level
    const double alpha = rz / pnp;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * np[i];
    }
    for (std::size_t i = 0; i < m; ++i) z[i] = precond[i] * r[i];
    const double rz_new = detail::dotc(r, z).real();
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
  }
  if (true_res > opts.tol)
    throw numerical_error(
        "cn_step: linear solve did not reach tolerance (residual " + std::to_string(true_res) + ")",
        true_res, it);

  SpinorField out(psi.grid);
  out.values = std::move(x);
  return out;
}

/// Crank-Nicolson step by fixed-point iteration on
///   psi' = (1 - i lam H) psi - i lam H psi'.
/// Does not assume Hermiticity; converges only when lam * ||H|| < 1. Used by
/// diagnostics that must evolve deliberately non-Hermitian kernels.
template <class Op>
SpinorField cn_step_picard(Op&& apply_h, const SpinorField& psi, double dt, double hbar,
                           const CnOptions& opts = {}) {
  const double lam = dt / (2.0 * hbar);
  const std::size_t m = psi.values.size();

  auto apply_vec = [&](const std::vector<cplx>& in) {
    SpinorField f(psi.grid);
    f.values = in;
    return apply_h(f).values;
  };

  std::vector<cplx> rhs = apply_vec(psi.values);
  for (std::size_t i = 0; i < m; ++i) rhs[i] = psi.values[i] - cplx(0.0, lam) * rhs[i];
  const double rhs_norm = std::max(detail::norm2(rhs), 1e-300);

  std::vector<cplx> x = rhs, next(m);
  double res = 1.0;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    std::vector<cplx> hx = apply_vec(x);
    for (std::size_t i = 0; i < m; ++i) next[i] = rhs[i] - cplx(0.0, lam) * hx[i];
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) d += std::norm(next[i] - x[i]);
    res = std::sqrt(d) / rhs_norm;
    x.swap(next);
    if (res <= opts.tol) break;
  }
  if (res > opts.tol)
    throw numerical_error("cn_step_picard: fixed-point iteration did not converge", res, it);

  SpinorField out(psi.grid);
  out.values = std::move(x);
  return out;
}

}  // namespace edpauli
