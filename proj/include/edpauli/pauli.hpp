#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "edpauli/crank_nicolson.hpp"
#include "edpauli/field.hpp"
#include "edpauli/ops.hpp"
#include "edpauli/params.hpp"
#include "edpauli/phase_space.hpp"
#include "edpauli/sampler.hpp"

namespace edpauli {

/// Local Hermitian potential kernel V0(x) delta_kk' + V_a(x) sigma^a_kk'.
/// Strictly diagonal in x; Hermiticity is automatic for real V0, V_a.
struct PotentialKernel {
  ScalarField v0;
  std::array<ScalarField, 3> v;

  explicit PotentialKernel(const Grid& g) : v0(g), v{ScalarField(g), ScalarField(g), ScalarField(g)} {}

  static PotentialKernel zero(const Grid& g) { return PotentialKernel(g); }

  bool has_sigma_term() const {
    for (const auto& comp : v)
      for (double x : comp.values)
        if (x != 0.0) return true;
    return false;
  }
};

/// Pauli coupling V_a = -(hbar beta / 2m) B_a pointwise. V0 (= beta A0 for a
/// point charge) is supplied separately by the caller.
inline PotentialKernel pauli_coupling_from_b(const EdParams& params,
                                             const std::array<ScalarField, 3>& b) {
  PotentialKernel kernel(b[0].grid);
  const double coef = -params.hbar * params.beta / (2.0 * params.mass);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < b[c].values.size(); ++i)
      kernel.v[c].values[i] = coef * b[c].values[i];
  return kernel;
}

/// The e-Hamiltonian kernel: kinetic term from the covariant Laplacian plus
/// the local potential kernel. Applies to spinor fields as a linear,
/// Hermitian operator.
struct HamiltonianSpec {
  EdParams params;
  GaugeField gauge;
  PotentialKernel potential;

  HamiltonianSpec(const EdParams& p, const GaugeField& g, const PotentialKernel& k)
      : params(p), gauge(g), potential(k) {
    require_same_grid(g.grid, k.v0.grid, "HamiltonianSpec");
  }

  static HamiltonianSpec free_particle(const Grid& g, const EdParams& p) {
    return HamiltonianSpec(p, GaugeField::zero(g), PotentialKernel::zero(g));
  }

  /// Diagonal estimate used for Jacobi preconditioning of the implicit solve.
  std::vector<double> diagonal() const {
    const Grid& g = gauge.grid;
    const std::size_t n = g.size();
    double lap_diag = 0.0;
    for (int a = 0; a < g.dim(); ++a) lap_diag += 2.0 / (g.spacing(a) * g.spacing(a));
    const double kin = params.hbar * params.hbar / (2.0 * params.mass) * lap_diag;
    const double b2 = params.beta * params.beta / (2.0 * params.mass);
    std::vector<double> d(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      double a2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) a2 += gauge.a[a].values[i] * gauge.a[a].values[i];
      const double common = kin + b2 * a2 + potential.v0.values[i];
      d[i] = common + potential.v[2].values[i];
      d[n + i] = common - potential.v[2].values[i];
    }
    return d;
  }
};

/// H psi = -(hbar^2/2m) D_a D_a psi + V0 psi + V_a sigma^a psi.
inline SpinorField apply_hamiltonian(const HamiltonianSpec& spec, const SpinorField& psi) {
  require_same_grid(spec.gauge.grid, psi.grid, "apply_hamiltonian");
  const Grid& g = psi.grid;
  const std::size_t n = g.size();
  const double kin_coef = -spec.params.hbar * spec.params.hbar / (2.0 * spec.params.mass);

  SpinorField out = covariant_laplacian(psi, spec.gauge, spec.params);
  for (cplx& v : out.values) v *= kin_coef;

  const std::vector<double>& v0 = spec.potential.v0.values;
  const std::vector<double>& v1 = spec.potential.v[0].values;
  const std::vector<double>& v2 = spec.potential.v[1].values;
  const std::vector<double>& v3 = spec.potential.v[2].values;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx up = psi.values[i];
    const cplx dn = psi.values[n + i];
    out.values[i] += (v0[i] + v3[i]) * up + cplx(v1[i], -v2[i]) * dn;
    out.values[n + i] += (v0[i] - v3[i]) * dn + cplx(v1[i], v2[i]) * up;
  }
  return out;
}

/// One Crank-Nicolson step of the Pauli equation. Norm is preserved to the
/// solver tolerance; dt may be negative (the exact inverse step).
inline SpinorField step(const HamiltonianSpec& spec, const SpinorField& psi, double dt,
                        const CnOptions& opts = {}) {
  return cn_step([&](const SpinorField& f) { return apply_hamiltonian(spec, f); }, psi, dt,
                 spec.params.hbar, spec.diagonal(), opts);
}

/// <psi|H psi>; real to rounding for the Hermitian kernel, conserved under
/// step for time-independent specs.
inline double energy(const HamiltonianSpec& spec, const SpinorField& psi) {
  return inner_product(psi, apply_hamiltonian(spec, psi)).real();
}

/// Continuity-equation residual d_t rho_x + d_a(v^a rho_x) with d_t rho from
/// two half-steps (centered difference) and v from current_velocity.
inline ResidualReport continuity_residual(const HamiltonianSpec& spec, const SpinorField& psi,
                                          const CnOptions& opts = {}) {
  const Grid& g = psi.grid;
  const std::size_t n = g.size();
  const double dt = spec.params.dt;

  const SpinorField fwd = step(spec, psi, 0.5 * dt, opts);
  const SpinorField bwd = step(spec, psi, -0.5 * dt, opts);
  const ScalarField rho_f = spatial_density(fwd);
  const ScalarField rho_b = spatial_density(bwd);
  const ScalarField rho = spatial_density(psi);
  const VectorField v = current_velocity(psi, spec.gauge, spec.params);

  ResidualReport rep{ScalarField(g), 0.0};
  for (std::size_t i = 0; i < n; ++i)
    rep.field.values[i] = (rho_f.values[i] - rho_b.values[i]) / dt;
  for (int a = 0; a < g.dim(); ++a) {
    ScalarField flux(g);
    for (std::size_t i = 0; i < n; ++i) flux.values[i] = v[a].values[i] * rho.values[i];
    const ScalarField dflux = gradient(flux, a);
    for (std::size_t i = 0; i < n; ++i) rep.field.values[i] += dflux.values[i];
  }
  rep.l1 = l1_norm(rep.field);
  return rep;
}

/// Continuity residual evaluated from pre-computed consecutive snapshots,
/// sharing the centered time difference with fokker_planck_residual; the two
/// residual fields then differ only by the algebraic identity between the
/// b-form and the v-form.
inline ResidualReport continuity_residual_from_snapshots(const HamiltonianSpec& spec,
                                                         const SpinorField& psi_prev,
                                                         const SpinorField& psi_mid,
                                                         const SpinorField& psi_next) {
  const Grid& g = psi_mid.grid;
  const std::size_t n = g.size();
  const ScalarField rho_prev = spatial_density(psi_prev);
  const ScalarField rho_mid = spatial_density(psi_mid);
  const ScalarField rho_next = spatial_density(psi_next);
  const VectorField v = current_velocity(psi_mid, spec.gauge, spec.params);

  ResidualReport rep{ScalarField(g), 0.0};
  for (std::size_t i = 0; i < n; ++i)
    rep.field.values[i] = (rho_next.values[i] - rho_prev.values[i]) / (2.0 * spec.params.dt);
  for (int a = 0; a < g.dim(); ++a) {
    ScalarField flux(g);
    for (std::size_t i = 0; i < n; ++i) flux.values[i] = v[a].values[i] * rho_mid.values[i];
    const ScalarField dflux = gradient(flux, a);
    for (std::size_t i = 0; i < n; ++i) rep.field.values[i] += dflux.values[i];
  }
  rep.l1 = l1_norm(rep.field);
  return rep;
}

}  // namespace edpauli
