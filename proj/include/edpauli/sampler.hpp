#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

#include "edpauli/field.hpp"
#include "edpauli/ops.hpp"
#include "edpauli/params.hpp"
#include "edpauli/rng.hpp"

namespace edpauli {

/// One real component per grid axis.
using VectorField = std::vector<ScalarField>;

namespace detail {

/// Relative density floor below which phase gradients are undefined; drift
/// is zeroed there and walkers take pure-noise steps.
inline constexpr double dead_zone_rel = 1e-12;

inline int sampler_threads() {
  if (const char* env = std::getenv("EDPAULI_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(std::min<long>(v, 256));
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hc, 1u, 16u));
}

template <class Fn>
void parallel_for_walkers(int n_walkers, Fn&& fn) {
  const int nt = std::min(sampler_threads(), std::max(1, n_walkers));
  if (nt == 1) {
    fn(0, n_walkers, 0);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n_walkers + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n_walkers, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=, &fn] { fn(lo, hi, t); });
  }
  for (auto& th : pool) th.join();
}

/// Multilinear periodic interpolation of a scalar field at a position.
inline double interpolate(const ScalarField& f, const std::array<double, 3>& pos) {
  return interpolate_periodic<double>(f.grid, f.values, pos);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Velocity fields derived from the epistemic state.

/// Effective drift-potential gradient
///   dbar_a phi = sum_k rho_{k|x} d_a xi_k + (eta/2) d_a log rho_x,
/// with sum_k rho_{k|x} d_a xi_k evaluated as hbar sum_k Im(psi_k^* d_a psi_k) / rho_x.
/// Zero where rho_x is below the dead-zone floor.
inline VectorField effective_phase_gradient(const SpinorField& psi, const EdParams& params) {
  const Grid& g = psi.grid;
  const std::size_t n = g.size();
  const ScalarField rho = spatial_density(psi);
  double rho_max = 0.0;
  for (double r : rho.values) rho_max = std::max(rho_max, r);
  const double floor = detail::dead_zone_rel * rho_max;

  VectorField out(static_cast<std::size_t>(g.dim()), ScalarField(g));
  for (int a = 0; a < g.dim(); ++a) {
    const SpinorField dpsi = gradient(psi, a);
    const ScalarField drho = gradient(rho, a);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(rho.values[i] > floor) || rho_max == 0.0) {
        out[a].values[i] = 0.0;
        continue;
      }
      const double phase_part =
          params.hbar *
          (std::imag(std::conj(psi.values[i]) * dpsi.values[i]) +
           std::imag(std::conj(psi.values[n + i]) * dpsi.values[n + i])) /
          rho.values[i];
      out[a].values[i] = phase_part + 0.5 * params.eta * drho.values[i] / rho.values[i];
    }
  }
  return out;
}

/// Drift velocity b^a = (dbar_a phi - beta A_a) / m. Includes the osmotic term.
inline VectorField drift_velocity(const SpinorField& psi, const GaugeField& gauge,
                                  const EdParams& params) {
  require_same_grid(psi.grid, gauge.grid, "drift_velocity");
  VectorField b = effective_phase_gradient(psi, params);
  const std::size_t n = psi.grid.size();
  for (int a = 0; a < psi.grid.dim(); ++a)
    for (std::size_t i = 0; i < n; ++i)
      b[a].values[i] = (b[a].values[i] - params.beta * gauge.a[a].values[i]) / params.mass;
  return b;
}

/// Current velocity v^a = (sum_k rho_{k|x} d_a xi_k - beta A_a) / m.
/// Computed directly from the phase gradients, so it carries no eta
/// dependence at all; equals b - (eta/2m) d log rho identically.
inline VectorField current_velocity(const SpinorField& psi, const GaugeField& gauge,
                                    const EdParams& params) {
  require_same_grid(psi.grid, gauge.grid, "current_velocity");
  const Grid& g = psi.grid;
  const std::size_t n = g.size();
  const ScalarField rho = spatial_density(psi);
  double rho_max = 0.0;
  for (double r : rho.values) rho_max = std::max(rho_max, r);
  const double floor = detail::dead_zone_rel * rho_max;

  VectorField out(static_cast<std::size_t>(g.dim()), ScalarField(g));
  for (int a = 0; a < g.dim(); ++a) {
    const SpinorField dpsi = gradient(psi, a);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(rho.values[i] > floor) || rho_max == 0.0) {
        out[a].values[i] = 0.0;
        continue;
      }
      const double phase_part =
          params.hbar *
          (std::imag(std::conj(psi.values[i]) * dpsi.values[i]) +
           std::imag(std::conj(psi.values[n + i]) * dpsi.values[n + i])) /
          rho.values[i];
      out[a].values[i] = (phase_part - params.beta * gauge.a[a].values[i]) / params.mass;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory ensembles.

/// N ontic sample paths. Positions are wrapped into the periodic box after
/// every step; identical seed and inputs reproduce paths bitwise.
struct TrajectoryEnsemble {
  Grid grid;
  int n_walkers = 0;
  std::vector<double> positions;   // [w * dim + a]
  std::vector<std::int8_t> k_labels;  // empty unless enabled; values in {-1, +1}
  std::uint64_t seed = 0;
  double time = 0.0;
  std::uint64_t step_index = 0;

  TrajectoryEnsemble(const Grid& g, int n, std::uint64_t s, bool with_k_labels = false)
      : grid(g),
        n_walkers(n),
        positions(static_cast<std::size_t>(n) * g.dim(), 0.0),
        seed(s) {
    if (with_k_labels) k_labels.assign(n, +1);
  }

  std::array<double, 3> position(int w) const {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dim(); ++a) p[a] = positions[static_cast<std::size_t>(w) * grid.dim() + a];
    return p;
  }
};

namespace detail {
inline constexpr std::uint64_t purpose_seed_position = 0;
inline constexpr std::uint64_t purpose_step_noise = 1;
inline constexpr std::uint64_t purpose_resample_k = 2;
}  // namespace detail

/// Draws initial walker positions from a grid density: categorical over
/// cells, uniform inside each cell.
inline void seed_from_density(TrajectoryEnsemble& ens, const ScalarField& rho) {
  require_same_grid(ens.grid, rho.grid, "seed_from_density");
  const Grid& g = ens.grid;
  const std::size_t n = g.size();
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::max(rho.values[i], 0.0);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw domain_error("seed_from_density: density integrates to zero");
  for (double& c : cdf) c /= acc;

  detail::parallel_for_walkers(ens.n_walkers, [&](int lo, int hi, int) {
    for (int w = lo; w < hi; ++w) {
      CounterRng rng(ens.seed, static_cast<std::uint64_t>(w), 0, detail::purpose_seed_position);
      const double u = rng.next_uniform();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      const std::size_t cell = static_cast<std::size_t>(it - cdf.begin());
      const auto idx = g.unflatten(std::min(cell, n - 1));
      for (int a = 0; a < g.dim(); ++a) {
        const double x = g.coordinate(a, idx[a]) + (rng.next_uniform() - 0.5) * g.spacing(a);
        ens.positions[static_cast<std::size_t>(w) * g.dim() + a] = g.wrap_coordinate(a, x);
      }
    }
  });
}

/// Empirical moments of the displacements taken in one step.
struct StepMoments {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<std::array<double, 3>, 3> cov{};
};

/// Advances every walker by dx = b(x) dt + dw with Gaussian dw of covariance
/// (eta/m) dt per axis, wraps positions, advances entropic time, and returns
/// the empirical moments of the displacements (pre-wrap).
inline StepMoments sample_step(TrajectoryEnsemble& ens, const SpinorField& psi,
                               const GaugeField& gauge, const EdParams& params) {
  require_same_grid(ens.grid, psi.grid, "sample_step");
  const Grid& g = ens.grid;
  const int dim = g.dim();
  const VectorField b = drift_velocity(psi, gauge, params);
  const double noise_std = std::sqrt(params.eta / params.mass * params.dt);

  const int nt = std::min(detail::sampler_threads(), std::max(1, ens.n_walkers));
  std::vector<std::array<double, 3>> sums(nt, {0.0, 0.0, 0.0});
  std::vector<std::array<double, 9>> sums2(nt, std::array<double, 9>{});

  detail::parallel_for_walkers(ens.n_walkers, [&](int lo, int hi, int tid) {
    for (int w = lo; w < hi; ++w) {
      CounterRng rng(ens.seed, static_cast<std::uint64_t>(w), ens.step_index + 1,
                     detail::purpose_step_noise);
      std::array<double, 3> pos = ens.position(w);
      std::array<double, 3> dx{0.0, 0.0, 0.0};
      for (int a = 0; a < dim; ++a)
        dx[a] = detail::interpolate(b[a], pos) * params.dt + noise_std * rng.next_gaussian();
      for (int a = 0; a < dim; ++a) {
        sums[tid][a] += dx[a];
        for (int c = 0; c < dim; ++c) sums2[tid][a * 3 + c] += dx[a] * dx[c];
        ens.positions[static_cast<std::size_t>(w) * dim + a] =
            g.wrap_coordinate(a, pos[a] + dx[a]);
      }
    }
  });

  StepMoments m;
  if (ens.n_walkers > 0) {
    std::array<double, 3> s{0.0, 0.0, 0.0};
    std::array<double, 9> s2{};
    for (int t = 0; t < nt; ++t)
      for (int a = 0; a < 3; ++a) {
        s[a] += sums[t][a];
        for (int c = 0; c < 3; ++c) s2[a * 3 + c] += sums2[t][a * 3 + c];
      }
    const double inv = 1.0 / ens.n_walkers;
    for (int a = 0; a < dim; ++a) m.mean[a] = s[a] * inv;
    for (int a = 0; a < dim; ++a)
      for (int c = 0; c < dim; ++c) m.cov[a][c] = s2[a * 3 + c] * inv - m.mean[a] * m.mean[c];
  }
  ens.time += params.dt;
  ens.step_index += 1;
  return m;
}

/// Redraws each walker's k from the current conditional rho_{k|x(w)}
/// (uniform 1/2 where rho_x vanishes). Positions untouched.
inline void resample_k(TrajectoryEnsemble& ens, const SpinorField& psi) {
  require_same_grid(ens.grid, psi.grid, "resample_k");
  if (ens.k_labels.empty()) throw structural_error("resample_k: k labels not enabled");
  const std::size_t n = psi.grid.size();
  ScalarField rho_plus(psi.grid), rho_minus(psi.grid);
  for (std::size_t i = 0; i < n; ++i) {
    rho_plus.values[i] = std::norm(psi.values[i]);
    rho_minus.values[i] = std::norm(psi.values[n + i]);
  }
  detail::parallel_for_walkers(ens.n_walkers, [&](int lo, int hi, int) {
    for (int w = lo; w < hi; ++w) {
      CounterRng rng(ens.seed, static_cast<std::uint64_t>(w), ens.step_index,
                     detail::purpose_resample_k);
      const auto pos = ens.position(w);
      const double rp = std::max(detail::interpolate(rho_plus, pos), 0.0);
      const double rm = std::max(detail::interpolate(rho_minus, pos), 0.0);
      const double p_plus = (rp + rm > 0.0) ? rp / (rp + rm) : 0.5;
      ens.k_labels[w] = (rng.next_uniform() < p_plus) ? +1 : -1;
    }
  });
}

/// Cell-count histogram normalized to integrate to 1; optional Gaussian
/// smoothing with the given bandwidth (length units; 0 disables it).
inline ScalarField density_estimate(const TrajectoryEnsemble& ens, const Grid& grid,
                                    double smoothing_bandwidth = 0.0) {
  require_same_grid(ens.grid, grid, "density_estimate");
  if (ens.n_walkers <= 0) throw structural_error("density_estimate: empty ensemble");
  const int dim = grid.dim();
  const int nt = std::min(detail::sampler_threads(), std::max(1, ens.n_walkers));
  std::vector<std::vector<std::uint32_t>> counts(nt, std::vector<std::uint32_t>(grid.size(), 0));

  // cells are centered on grid nodes, matching seed_from_density
  detail::parallel_for_walkers(ens.n_walkers, [&](int lo, int hi, int tid) {
    for (int w = lo; w < hi; ++w) {
      std::array<int, 3> idx{0, 0, 0};
      for (int a = 0; a < dim; ++a) {
        const double u = (ens.positions[static_cast<std::size_t>(w) * dim + a] +
                          0.5 * grid.extent(a)) /
                             grid.spacing(a) +
                         0.5;
        idx[a] = grid.wrap_index(a, static_cast<long>(std::floor(u)));
      }
      counts[tid][grid.flatten(idx)] += 1;
    }
  });

  ScalarField rho(grid);
  for (int t = 0; t < nt; ++t)
    for (std::size_t i = 0; i < grid.size(); ++i) rho.values[i] += counts[t][i];
  const double norm = 1.0 / (static_cast<double>(ens.n_walkers) * grid.cell_volume());
  for (double& v : rho.values) v *= norm;

  if (smoothing_bandwidth > 0.0) {
    for (int a = 0; a < dim; ++a) {
      const double h = grid.spacing(a);
      const int reach = std::max(1, static_cast<int>(std::ceil(4.0 * smoothing_bandwidth / h)));
      std::vector<double> kernel(2 * reach + 1);
      double ksum = 0.0;
      for (int j = -reach; j <= reach; ++j) {
        kernel[j + reach] = std::exp(-0.5 * (j * h) * (j * h) /
                                     (smoothing_bandwidth * smoothing_bandwidth));
        ksum += kernel[j + reach];
      }
      for (double& k : kernel) k /= ksum;
      ScalarField smoothed(grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double acc = 0.0;
        for (int j = -reach; j <= reach; ++j)
          acc += kernel[j + reach] * rho.values[grid.neighbor(i, a, j)];
        smoothed.values[i] = acc;
      }
      rho = smoothed;
    }
  }
  return rho;
}

// ---------------------------------------------------------------------------
// Fokker-Planck residual.

struct ResidualReport {
  ScalarField field;
  double l1 = 0.0;
};

/// Residual of d_t rho = -d_a(b^a rho) + (1/2)(eta/m) d_a d_a rho evaluated
/// from three consecutive solver snapshots with a centered time difference.
/// The diffusion flux is the central gradient masked by the same dead-zone
/// rule as the drift, so that substituting b = v + (eta/2m) d log rho
/// cancels it identically against the continuity form.
inline ResidualReport fokker_planck_residual(const SpinorField& psi_prev,
                                             const SpinorField& psi_mid,
                                             const SpinorField& psi_next,
                                             const GaugeField& gauge, const EdParams& params) {
  require_same_grid(psi_prev.grid, psi_mid.grid, "fokker_planck_residual");
  require_same_grid(psi_mid.grid, psi_next.grid, "fokker_planck_residual");
  const Grid& g = psi_mid.grid;
  const std::size_t n = g.size();

  const ScalarField rho_prev = spatial_density(psi_prev);
  const ScalarField rho_mid = spatial_density(psi_mid);
  const ScalarField rho_next = spatial_density(psi_next);
  const VectorField b = drift_velocity(psi_mid, gauge, params);
  double rho_max = 0.0;
  for (double r : rho_mid.values) rho_max = std::max(rho_max, r);
  const double floor = detail::dead_zone_rel * rho_max;

  ResidualReport rep{ScalarField(g), 0.0};
  for (std::size_t i = 0; i < n; ++i)
    rep.field.values[i] = (rho_next.values[i] - rho_prev.values[i]) / (2.0 * params.dt);

  const double diff_coef = 0.5 * params.eta / params.mass;
  for (int a = 0; a < g.dim(); ++a) {
    ScalarField flux(g);
    ScalarField masked_drho = gradient(rho_mid, a);
    for (std::size_t i = 0; i < n; ++i) {
      flux.values[i] = b[a].values[i] * rho_mid.values[i];
      if (!(rho_mid.values[i] > floor)) masked_drho.values[i] = 0.0;
    }
    const ScalarField dflux = gradient(flux, a);
    const ScalarField ddrho = gradient(masked_drho, a);
    for (std::size_t i = 0; i < n; ++i)
      rep.field.values[i] += dflux.values[i] - diff_coef * ddrho.values[i];
  }
  rep.l1 = l1_norm(rep.field);
  return rep;
}

}  // namespace edpauli
