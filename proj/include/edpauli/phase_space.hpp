#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "edpauli/crank_nicolson.hpp"
#include "edpauli/field.hpp"
#include "edpauli/ops.hpp"
#include "edpauli/rng.hpp"

namespace edpauli {

// ---------------------------------------------------------------------------
// Canonical coordinates (rho_kx, xi_kx) and the maps to wave functions.

/// Real canonical coordinates of the e-phase space: probability density
/// rho_kx >= 0 and its conjugate phase xi_kx (defined modulo 2 pi hbar
/// wherever rho > 0). Layout matches SpinorField: [k * npoints + i].
struct DensityPhasePair {
  Grid grid;
  std::vector<double> rho;
  std::vector<double> xi;

  explicit DensityPhasePair(const Grid& g)
      : grid(g), rho(2 * g.size(), 0.0), xi(2 * g.size(), 0.0) {}

  std::size_t npoints() const { return grid.size(); }

  /// integrate(sum_k rho); 1 for normalized states.
  double total_probability() const {
    double s = 0.0;
    for (double v : rho) s += v;
    return s * grid.cell_volume();
  }
};

/// psi_kx = rho_kx^{1/2} exp(i xi_kx / hbar). |psi_kx|^2 = rho_kx exactly.
inline SpinorField to_wavefunction(const DensityPhasePair& dp, double hbar) {
  SpinorField psi(dp.grid);
  for (std::size_t j = 0; j < dp.rho.size(); ++j) {
    const double r = dp.rho[j];
    if (r < 0.0) throw domain_error("to_wavefunction: negative rho");
    psi.values[j] = std::sqrt(r) * std::exp(cplx(0.0, dp.xi[j] / hbar));
  }
  return psi;
}

/// rho = |psi|^2, xi = hbar arg(psi) in (-pi hbar, pi hbar]; xi = 0 at nodes.
inline DensityPhasePair from_wavefunction(const SpinorField& psi, double hbar) {
  DensityPhasePair dp(psi.grid);
  for (std::size_t j = 0; j < psi.values.size(); ++j) {
    const cplx v = psi.values[j];
    dp.rho[j] = std::norm(v);
    dp.xi[j] = (v == cplx{}) ? 0.0 : hbar * std::arg(v);
  }
  return dp;
}

// ---------------------------------------------------------------------------
// Tangent vectors and the geometric tensors.

/// Tangent to the e-phase space at a point, holding the four real components
/// (d psi_+, d(i hbar psi_+^*), d psi_-, d(i hbar psi_-^*)) as the two
/// complex perturbation fields d psi_k; the conjugate components are derived
/// when contracting.
struct PhaseSpaceTangent {
  Grid grid;
  std::vector<cplx> dpsi;  // [k * npoints + i]

  explicit PhaseSpaceTangent(const Grid& g) : grid(g), dpsi(2 * g.size(), cplx{}) {}

  static PhaseSpaceTangent from_spinor(const SpinorField& f) {
    PhaseSpaceTangent t(f.grid);
    t.dpsi = f.values;
    return t;
  }

  SpinorField as_spinor() const {
    SpinorField f(grid);
    f.values = dpsi;
    return f;
  }

  /// Tangent induced by real perturbations (d rho_k, d xi_k) at a base state:
  /// d psi = (d rho / (2 sqrt(rho)) + i sqrt(rho) d xi / hbar) e^{i xi/hbar}.
  static PhaseSpaceTangent from_rho_xi(const DensityPhasePair& base,
                                       const std::vector<double>& drho,
                                       const std::vector<double>& dxi, double hbar) {
    PhaseSpaceTangent t(base.grid);
    for (std::size_t j = 0; j < t.dpsi.size(); ++j) {
      const double r = base.rho[j];
      const cplx phase = std::exp(cplx(0.0, base.xi[j] / hbar));
      const double sr = std::sqrt(r);
      const double radial = (r > 0.0) ? drho[j] / (2.0 * sr) : 0.0;
      t.dpsi[j] = phase * cplx(radial, sr * dxi[j] / hbar);
    }
    return t;
  }
};

/// Omega(v1, v2) = int dx sum_k [dpsi1 (i hbar dpsi2^*) - (i hbar dpsi1^*) dpsi2]
///              = 2 hbar int dx sum_k Im(dpsi1^* dpsi2).
/// Antisymmetric bilinear form; in (rho, xi) components it is the canonical
/// int sum_k (drho1 dxi2 - dxi1 drho2).
inline double symplectic_form(const PhaseSpaceTangent& v1, const PhaseSpaceTangent& v2,
                              double hbar) {
  require_same_grid(v1.grid, v2.grid, "symplectic_form");
  double s = 0.0;
  for (std::size_t j = 0; j < v1.dpsi.size(); ++j)
    s += std::imag(std::conj(v1.dpsi[j]) * v2.dpsi[j]);
  return 2.0 * hbar * s * v1.grid.cell_volume();
}

/// G(v1, v2) = 2 hbar int dx sum_k Re(dpsi1^* dpsi2); the line element is
/// dl^2 = G(v, v) = 2 hbar int dx sum_k dpsi dpsi^*.
inline double metric(const PhaseSpaceTangent& v1, const PhaseSpaceTangent& v2, double hbar) {
  require_same_grid(v1.grid, v2.grid, "metric");
  double s = 0.0;
  for (std::size_t j = 0; j < v1.dpsi.size(); ++j)
    s += std::real(std::conj(v1.dpsi[j]) * v2.dpsi[j]);
  return 2.0 * hbar * s * v1.grid.cell_volume();
}

/// J acts diagonally as (i, -i, i, -i) on (dpsi, i hbar dpsi^*, ...); on the
/// stored complex fields this is multiplication by i. J^2 = -1.
inline PhaseSpaceTangent complex_structure(const PhaseSpaceTangent& v) {
  PhaseSpaceTangent out(v.grid);
  for (std::size_t j = 0; j < v.dpsi.size(); ++j) out.dpsi[j] = cplx(0.0, 1.0) * v.dpsi[j];
  return out;
}

/// <psi1|psi2> = int dx sum_k psi1^* psi2. Equals (G + i Omega) / (2 hbar)
/// on the tangent encodings of the two states.
inline cplx inner_product(const SpinorField& psi1, const SpinorField& psi2) {
  require_same_grid(psi1.grid, psi2.grid, "inner_product");
  cplx s{};
  for (std::size_t j = 0; j < psi1.values.size(); ++j)
    s += std::conj(psi1.values[j]) * psi2.values[j];
  return s * psi1.grid.cell_volume();
}

inline double squared_norm(const SpinorField& psi) {
  double s = 0.0;
  for (const cplx& v : psi.values) s += std::norm(v);
  return s * psi.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// Poisson brackets of functionals given by their functional gradients.

/// A functional F[rho, xi] represented by its functional-gradient fields
/// dF/drho_kx and dF/dxi_kx (layout [k * npoints + i]).
struct FunctionalGradient {
  Grid grid;
  std::vector<double> d_rho;
  std::vector<double> d_xi;

  explicit FunctionalGradient(const Grid& g)
      : grid(g), d_rho(2 * g.size(), 0.0), d_xi(2 * g.size(), 0.0) {}
};

/// {F, G} = int dx sum_k (dF/drho dG/dxi - dF/dxi dG/drho) under grid
/// quadrature; with discrete-delta gradients (1 / cell volume at one point)
/// this reproduces {rho_kx, xi_k'x'} = delta_kk' delta(x, x').
inline double poisson_bracket(const FunctionalGradient& f, const FunctionalGradient& g) {
  require_same_grid(f.grid, g.grid, "poisson_bracket");
  if (f.d_rho.size() != 2 * f.grid.size() || g.d_rho.size() != 2 * g.grid.size() ||
      f.d_xi.size() != 2 * f.grid.size() || g.d_xi.size() != 2 * g.grid.size())
    throw structural_error("poisson_bracket: missing or misshapen gradient fields");
  double s = 0.0;
  for (std::size_t j = 0; j < f.d_rho.size(); ++j)
    s += f.d_rho[j] * g.d_xi[j] - f.d_xi[j] * g.d_rho[j];
  return s * f.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// Hamilton-Killing flow diagnostics.

struct FlowCheckReport {
  double omega_before = 0.0, omega_after = 0.0;
  double metric_before = 0.0, metric_after = 0.0;
  double omega_drift = 0.0, metric_drift = 0.0;
  int steps = 0;
  bool hermitian_ok = true;

  std::string to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"omega_drift\": " << omega_drift << ", \"metric_drift\": " << metric_drift
       << ", \"steps\": " << steps << ", \"hermitian_ok\": " << (hermitian_ok ? "true" : "false")
       << "}";
    return os.str();
  }
};

/// Evolves the state and two tangents by Crank-Nicolson steps under a
/// bilinear Hamiltonian supplied as a linear map on spinor fields, and
/// reports the change of Omega(v1, v2) and G(v1, v2). A failed superposition
/// probe (nonlinear map) raises contract_error; a failed Hermiticity probe
/// is flagged in the report and the drift is still measured.
template <class Op>
FlowCheckReport hk_flow_check(Op&& ham, const SpinorField& psi, const PhaseSpaceTangent& v1,
                              const PhaseSpaceTangent& v2, double dt, double hbar, int steps = 1,
                              const CnOptions& opts = {}) {
  require_same_grid(psi.grid, v1.grid, "hk_flow_check");
  require_same_grid(psi.grid, v2.grid, "hk_flow_check");

  // Superposition and Hermiticity probes on deterministic pseudo-random fields.
  SpinorField f(psi.grid), g(psi.grid);
  CounterRng rng(0x9d5u, 0, 0);
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    f.values[j] = cplx(rng.next_gaussian(), rng.next_gaussian());
    g.values[j] = cplx(rng.next_gaussian(), rng.next_gaussian());
  }
  const cplx a(0.7, -0.3), b(-0.2, 1.1);
  SpinorField sum(psi.grid);
  for (std::size_t j = 0; j < sum.values.size(); ++j)
    sum.values[j] = a * f.values[j] + b * g.values[j];
  const SpinorField lhs = ham(sum);
  const SpinorField hf = ham(f), hg = ham(g);
  double diff = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < lhs.values.size(); ++j) {
    diff += std::norm(lhs.values[j] - a * hf.values[j] - b * hg.values[j]);
    scale += std::norm(lhs.values[j]);
  }
  if (diff > 1e-16 * std::max(scale, 1e-300))
    throw contract_error("hk_flow_check: hamiltonian application is not linear");

  FlowCheckReport report;
  const cplx fg = inner_product(f, hg);
  const cplx gf = inner_product(hf, g);
  report.hermitian_ok = std::abs(fg - gf) <= 1e-8 * (std::abs(fg) + std::abs(gf) + 1.0);
  report.steps = steps;
  report.omega_before = symplectic_form(v1, v2, hbar);
  report.metric_before = metric(v1, v2, hbar);

  const std::vector<double> no_diag;
  auto advance = [&](const SpinorField& in) {
    return report.hermitian_ok ? cn_step(ham, in, dt, hbar, no_diag, opts)
                               : cn_step_picard(ham, in, dt, hbar, opts);
  };
  SpinorField s = psi;
  SpinorField t1 = v1.as_spinor(), t2 = v2.as_spinor();
  for (int n = 0; n < steps; ++n) {
    s = advance(s);
    t1 = advance(t1);
    t2 = advance(t2);
  }
  const PhaseSpaceTangent w1 = PhaseSpaceTangent::from_spinor(t1);
  const PhaseSpaceTangent w2 = PhaseSpaceTangent::from_spinor(t2);
  report.omega_after = symplectic_form(w1, w2, hbar);
  report.metric_after = metric(w1, w2, hbar);
  report.omega_drift = std::abs(report.omega_after - report.omega_before);
  report.metric_drift = std::abs(report.metric_after - report.metric_before);
  return report;
}

}  // namespace edpauli
