#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "edpauli/field.hpp"
#include "edpauli/ops.hpp"

namespace edpauli {

/// 2x2 complex matrix, row-major: {m00, m01, m10, m11}.
using Mat2 = std::array<cplx, 4>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

inline Mat2 sigma_x() { return {cplx(0, 0), cplx(1, 0), cplx(1, 0), cplx(0, 0)}; }
inline Mat2 sigma_y() { return {cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0)}; }
inline Mat2 sigma_z() { return {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(-1, 0)}; }
inline Mat2 pauli_matrix(int a) { return a == 0 ? sigma_x() : (a == 1 ? sigma_y() : sigma_z()); }

inline Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

inline Mat2 mat2_adjoint(const Mat2& a) {
  return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
}

inline std::array<cplx, 2> mat2_apply(const Mat2& m, const std::array<cplx, 2>& v) {
  return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

/// Axis (unit 3-vector) and angle in radians.
struct RotationSpec {
  Vec3 axis{0.0, 0.0, 1.0};
  double angle = 0.0;

  void validate() const {
    const double n2 = axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2];
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
      throw domain_error("RotationSpec: axis must be a unit vector");
  }
};

inline Vec3 normalized_axis(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(n > 0.0)) throw domain_error("normalized_axis: zero vector");
  return {v[0] / n, v[1] / n, v[2] / n};
}

/// Spin kernel (hbar/2) n_a sigma^a; Hermitian, traceless, eigenvalues
/// +-hbar/2.
inline Mat2 spin_matrix(const Vec3& axis, double hbar) {
  const double n2 = axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2];
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
    throw domain_error("spin_matrix: axis must be a unit vector");
  const double s = 0.5 * hbar;
  return {s * cplx(axis[2], 0), s * cplx(axis[0], -axis[1]), s * cplx(axis[0], axis[1]),
          s * cplx(-axis[2], 0)};
}

/// U_zeta = exp(-i n.sigma zeta/2) = cos(zeta/2) 1 - i sin(zeta/2) n.sigma.
/// Unitary with determinant 1.
inline Mat2 su2_rotation(const RotationSpec& spec) {
  spec.validate();
  const double c = std::cos(0.5 * spec.angle);
  const double s = std::sin(0.5 * spec.angle);
  const Vec3& n = spec.axis;
  return {cplx(c, -s * n[2]), cplx(-s * n[1], -s * n[0]), cplx(s * n[1], -s * n[0]),
          cplx(c, s * n[2])};
}

/// Rodrigues form of the classical rotation by `angle` about `axis`.
inline Mat3 rotation3(const RotationSpec& spec) {
  spec.validate();
  const double c = std::cos(spec.angle), s = std::sin(spec.angle);
  const Vec3& n = spec.axis;
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = c * (i == j ? 1.0 : 0.0) + (1.0 - c) * n[i] * n[j];
  r[0][1] += -s * n[2];
  r[0][2] += s * n[1];
  r[1][0] += s * n[2];
  r[1][2] += -s * n[0];
  r[2][0] += -s * n[1];
  r[2][1] += s * n[0];
  return r;
}

inline Vec3 mat3_apply(const Mat3& m, const Vec3& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return out;
}

/// Levi-Civita symbol eps^{abc}.
inline int levi_civita(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

enum class RotateMode { automatic, spin_only };

/// Psi_zeta(x) = U_zeta Psi(x_{-zeta}): spatial pullback by the inverse
/// rotation (multilinear interpolation on the periodic grid) composed with
/// the SU(2) matrix. Requires dim = 3, or dim = 2 with axis = +-e_z;
/// spin_only ignores the spatial part entirely.
inline SpinorField rotate_state(const SpinorField& psi, const RotationSpec& spec,
                                RotateMode mode = RotateMode::automatic) {
  spec.validate();
  const Mat2 u = su2_rotation(spec);
  const Grid& g = psi.grid;
  const std::size_t n = g.size();
  SpinorField out(g);

  if (mode == RotateMode::spin_only) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = mat2_apply(u, {psi.values[i], psi.values[n + i]});
      out.values[i] = r[0];
      out.values[n + i] = r[1];
    }
    return out;
  }

  if (g.dim() == 1)
    throw structural_error("rotate_state: 1-D grids admit spin-only rotations");
  if (g.dim() == 2 &&
      (std::abs(spec.axis[0]) > 1e-12 || std::abs(spec.axis[1]) > 1e-12))
    throw structural_error("rotate_state: 2-D grids admit only the z axis");
  if (spec.angle == 0.0) return psi;

  const Mat3 rinv = rotation3({spec.axis, -spec.angle});
  auto comp_plus = std::span<const cplx>(psi.values).subspan(0, n);
  auto comp_minus = std::span<const cplx>(psi.values).subspan(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = g.unflatten(i);
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) x[a] = g.coordinate(a, idx[a]);
    Vec3 y = mat3_apply(rinv, x);
    std::array<double, 3> pos{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) pos[a] = g.wrap_coordinate(a, y[a]);
    const cplx up = detail::interpolate_periodic<cplx>(g, comp_plus, pos);
    const cplx dn = detail::interpolate_periodic<cplx>(g, comp_minus, pos);
    const auto r = mat2_apply(u, {up, dn});
    out.values[i] = r[0];
    out.values[n + i] = r[1];
  }
  return out;
}

/// L^a = int dx sum_k psi^* eps^{abc} x_b (hbar/i) d_c psi, as the raw
/// complex quadrature (real to rounding for smooth fields). dim = 2 exposes
/// the z component only; dim = 1 has no orbital sector.
inline std::array<cplx, 3> orbital_angular_momentum_raw(const SpinorField& psi, double hbar) {
  const Grid& g = psi.grid;
  if (g.dim() < 2)
    throw structural_error("orbital_angular_momentum: requires dim >= 2");
  const std::size_t n = g.size();
  std::array<cplx, 3> l{};
  const cplx hbar_over_i(0.0, -hbar);
  for (int c = 0; c < g.dim(); ++c) {
    const SpinorField dpsi = gradient(psi, c);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = g.unflatten(i);
      const cplx val = hbar_over_i * (std::conj(psi.values[i]) * dpsi.values[i] +
                                      std::conj(psi.values[n + i]) * dpsi.values[n + i]);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < g.dim(); ++b) {
          const int e = levi_civita(a, b, c);
          if (e != 0) l[a] += static_cast<double>(e) * g.coordinate(b, idx[b]) * val;
        }
    }
  }
  const double vol = g.cell_volume();
  for (auto& v : l) v *= vol;
  return l;
}

inline Vec3 orbital_angular_momentum(const SpinorField& psi, double hbar) {
  const auto raw = orbital_angular_momentum_raw(psi, hbar);
  return {raw[0].real(), raw[1].real(), raw[2].real()};
}

/// Spin functional S^a = int dx sum psi^* (hbar/2) sigma^a psi. Each
/// component lies in [-hbar/2, hbar/2] for normalized states.
inline Vec3 spin_functional(const SpinorField& psi, double hbar) {
  const std::size_t n = psi.grid.size();
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx up = psi.values[i];
    const cplx dn = psi.values[n + i];
    const cplx cross = std::conj(up) * dn;
    sx += 2.0 * cross.real();
    sy += 2.0 * cross.imag();
    sz += std::norm(up) - std::norm(dn);
  }
  const double coef = 0.5 * hbar * psi.grid.cell_volume();
  return {coef * sx, coef * sy, coef * sz};
}

struct GeneratorFlowReport {
  double l1_mismatch = 0.0;
  double lhs_l1 = 0.0;
  double dzeta = 0.0;

  std::string to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"l1_mismatch\": " << l1_mismatch << ", \"lhs_l1\": " << lhs_l1
       << ", \"dzeta\": " << dzeta << "}";
    return os.str();
  }
};

/// Compares the finite rotation derivative (rho of rotate_state(psi, dzeta)
/// - rho)/dzeta against the generator flow -eps^{abc} n_a x_b d_c rho.
/// Vanishes to O(dzeta) + O(h^2).
inline GeneratorFlowReport generator_flow_check(const SpinorField& psi, const RotationSpec& spec,
                                                double dzeta, double hbar) {
  (void)hbar;
  const Grid& g = psi.grid;
  const std::size_t n = g.size();
  const SpinorField rotated = rotate_state(psi, {spec.axis, dzeta});
  const ScalarField rho = spatial_density(psi);
  const ScalarField rho_rot = spatial_density(rotated);

  ScalarField lhs(g);
  for (std::size_t i = 0; i < n; ++i)
    lhs.values[i] = (rho_rot.values[i] - rho.values[i]) / dzeta;

  ScalarField rhs(g);
  for (int c = 0; c < g.dim(); ++c) {
    const ScalarField drho = gradient(rho, c);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = g.unflatten(i);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < g.dim(); ++b) {
          const int e = levi_civita(a, b, c);
          if (e != 0)
            rhs.values[i] -=
                static_cast<double>(e) * spec.axis[a] * g.coordinate(b, idx[b]) * drho.values[i];
        }
    }
  }

  GeneratorFlowReport rep;
  rep.dzeta = dzeta;
  rep.lhs_l1 = l1_norm(lhs);
  ScalarField diff(g);
  for (std::size_t i = 0; i < n; ++i) diff.values[i] = lhs.values[i] - rhs.values[i];
  rep.l1_mismatch = l1_norm(diff);
  return rep;
}

}  // namespace edpauli
