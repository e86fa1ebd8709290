#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edpauli/config.hpp"
#include "edpauli/fit.hpp"
#include "edpauli/io.hpp"
#include "edpauli/pauli.hpp"
#include "edpauli/phase_space.hpp"
#include "edpauli/rotations.hpp"
#include "edpauli/sampler.hpp"

namespace edpauli {

// ---------------------------------------------------------------------------
// Scenario assembly helpers.

inline Grid make_grid(const GridConfig& gc) { return Grid(gc.points, gc.extent); }

/// Uniform A0/A/B plus the Stern-Gerlach gradient B_z = b' z on the last axis.
inline GaugeField make_gauge(const Grid& g, const GaugeConfig& gc) {
  GaugeField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f.a0.values[i] = gc.a0;
  for (int a = 0; a < g.dim() && a < static_cast<int>(gc.a.size()); ++a)
    for (std::size_t i = 0; i < g.size(); ++i) f.a[a].values[i] = gc.a[a];
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g.size(); ++i) f.b[c].values[i] = gc.b[c];
  if (gc.b_z_gradient != 0.0) {
    const int zaxis = g.dim() - 1;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto idx = g.unflatten(i);
      f.b[2].values[i] += gc.b_z_gradient * g.coordinate(zaxis, idx[zaxis]);
    }
  }
  return f;
}

/// Gaussian packet (position std = width) with uniform phase momentum and
/// fixed spinor coefficients, normalized on the grid.
inline SpinorField make_gaussian_state(const Grid& g, const InitialStateConfig& init,
                                       double hbar) {
  SpinorField psi(g);
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = g.unflatten(i);
    double r2 = 0.0, px = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double dx = g.coordinate(a, idx[a]) - init.center[a];
      r2 += dx * dx;
      px += init.momentum[a] * g.coordinate(a, idx[a]);
    }
    const cplx env = std::exp(cplx(-r2 / (4.0 * init.width * init.width), px / hbar));
    psi.values[i] = init.spinor[0] * env;
    psi.values[n + i] = init.spinor[1] * env;
  }
  const double nrm = std::sqrt(squared_norm(psi));
  for (cplx& v : psi.values) v /= nrm;
  return psi;
}

inline HamiltonianSpec make_hamiltonian(const Grid& g, const EdParams& params,
                                        const GaugeConfig& gc) {
  const GaugeField gauge = make_gauge(g, gc);
  PotentialKernel kernel = pauli_coupling_from_b(params, gauge.b);
  for (std::size_t i = 0; i < g.size(); ++i)
    kernel.v0.values[i] = params.beta * gauge.a0.values[i];
  return HamiltonianSpec(params, gauge, kernel);
}

// ---------------------------------------------------------------------------
// Run report.

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunReport {
  ScenarioId id = ScenarioId::custom;
  // per-recorded-stride observables
  std::vector<double> time;
  std::vector<double> norm;
  std::vector<double> energy;
  std::vector<std::array<double, 3>> x_mean;
  std::vector<std::array<double, 3>> x_var;
  std::vector<std::array<double, 3>> spin;
  std::vector<std::array<double, 3>> orbital;  // dim >= 2 only
  // sampler series (same stride)
  std::vector<double> ensemble_l1;
  std::vector<StepMoments> moments;
  // rotation_demo payload
  std::array<cplx, 2> rotated_spinor{cplx(0, 0), cplx(0, 0)};
  std::array<double, 2> k_probabilities{0.0, 0.0};

  std::vector<CheckResult> checks;
  std::vector<std::string> messages;
  std::optional<SpinorField> final_state;
  bool numerical_failure = false;
  double wall_seconds = 0.0;

  bool failed() const {
    if (numerical_failure) return true;
    for (const auto& c : checks)
      if (!c.pass) return true;
    return false;
  }

  /// 0 = all checks pass, 3 = numerical failure, 4 = tolerance failure.
  int exit_code() const {
    if (numerical_failure) return 3;
    return failed() ? 4 : 0;
  }
};

namespace scenario_detail {

inline void record_state(RunReport& rep, double t, const HamiltonianSpec& spec,
                         const SpinorField& psi) {
  rep.time.push_back(t);
  rep.norm.push_back(squared_norm(psi));
  rep.energy.push_back(energy(spec, psi));
  const ScalarField rho = spatial_density(psi);
  rep.x_mean.push_back(density_mean(rho));
  std::array<double, 3> var{0.0, 0.0, 0.0};
  for (int a = 0; a < psi.grid.dim(); ++a) var[a] = density_variance(rho, a);
  rep.x_var.push_back(var);
  rep.spin.push_back(spin_functional(psi, spec.params.hbar));
  if (psi.grid.dim() >= 2)
    rep.orbital.push_back(orbital_angular_momentum(psi, spec.params.hbar));
}

/// Weight of the spatial density on the positive side of the last axis.
inline double upper_lobe_weight(const SpinorField& psi) {
  const Grid& g = psi.grid;
  const int zaxis = g.dim() - 1;
  const ScalarField rho = spatial_density(psi);
  double upper = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    total += rho.values[i];
    if (g.coordinate(zaxis, idx[zaxis]) > 0.0) upper += rho.values[i];
  }
  return (total > 0.0) ? upper / total : 0.0;
}

}  // namespace scenario_detail

// ---------------------------------------------------------------------------
// The runner.

/// Executes a validated scenario: Crank-Nicolson solver steps, optional
/// sampler steps per solver step, diagnostics per output stride, and the
/// scenario's own tolerance checks. Output emission is separate
/// (emit_outputs) so validation failures never create files.
inline RunReport run_scenario(const ScenarioConfig& cfg, bool quiet = true) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.id = cfg.id;

  const Grid grid = make_grid(cfg.grid);
  const HamiltonianSpec spec = make_hamiltonian(grid, cfg.params, cfg.gauge);

  if (cfg.id == ScenarioId::rotation_demo) {
    // The pi/2 rotation about e_y: certainty about k becomes a 50/50 split.
    SpinorField psi = SpinorField::uniform(grid, cfg.initial.spinor[0], cfg.initial.spinor[1]);
    const double nrm = std::sqrt(squared_norm(psi));
    for (cplx& v : psi.values) v /= nrm;
    const RotationSpec rot{{0.0, 1.0, 0.0}, 0.5 * std::numbers::pi};
    const SpinorField rotated = rotate_state(psi, rot, RotateMode::spin_only);
    // report the unit spinor amplitudes and the k probabilities
    const std::size_t n = grid.size();
    const double box_volume = grid.cell_volume() * static_cast<double>(n);
    const cplx up = rotated.values[0] * std::sqrt(box_volume);
    const cplx dn = rotated.values[n] * std::sqrt(box_volume);
    rep.rotated_spinor = {up, dn};
    rep.k_probabilities = {std::norm(up), std::norm(dn)};
    if (!quiet) {
      std::printf("initial spinor: (%.6f%+.6fi, %.6f%+.6fi)\n", cfg.initial.spinor[0].real(),
                  cfg.initial.spinor[0].imag(), cfg.initial.spinor[1].real(),
                  cfg.initial.spinor[1].imag());
      std::printf("rotated spinor: (%.6f%+.6fi, %.6f%+.6fi)\n", up.real(), up.imag(), dn.real(),
                  dn.imag());
      std::printf("k probabilities: (%.6f, %.6f)\n", rep.k_probabilities[0],
                  rep.k_probabilities[1]);
    }
    CheckResult prob{"k_probability_sum", rep.k_probabilities[0] + rep.k_probabilities[1], 1e-12,
                     false};
    prob.pass = std::abs(prob.value - 1.0) < prob.threshold;
    prob.value = std::abs(prob.value - 1.0);
    rep.checks.push_back(prob);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }

  SpinorField psi = make_gaussian_state(grid, cfg.initial, cfg.params.hbar);

  std::optional<TrajectoryEnsemble> ensemble;
  if (cfg.sampler.walkers > 0) {
    ensemble.emplace(grid, cfg.sampler.walkers, cfg.sampler.seed, cfg.sampler.k_labels);
    seed_from_density(*ensemble, spatial_density(psi));
    if (cfg.sampler.k_labels) resample_k(*ensemble, psi);
  }

  const int stride = cfg.output.stride;
  try {
    for (int n = 0; n <= cfg.steps; ++n) {
      if (n % stride == 0 || n == cfg.steps) {
        const double t = n * cfg.params.dt;
        scenario_detail::record_state(rep, t, spec, psi);
        if (ensemble) {
          const ScalarField est = density_estimate(*ensemble, grid);
          const ScalarField rho = spatial_density(psi);
          ScalarField diff(grid);
          for (std::size_t i = 0; i < grid.size(); ++i)
            diff.values[i] = est.values[i] - rho.values[i];
          rep.ensemble_l1.push_back(l1_norm(diff));
        }
      }
      if (n == cfg.steps) break;
      if (ensemble) {
        const StepMoments m = sample_step(*ensemble, psi, spec.gauge, cfg.params);
        if ((n + 1) % stride == 0) rep.moments.push_back(m);
        if (cfg.sampler.k_labels && (n + 1) % cfg.sampler.stride == 0)
          resample_k(*ensemble, psi);
      }
      psi = step(spec, psi, cfg.params.dt);
    }
  } catch (const numerical_error& e) {
    rep.numerical_failure = true;
    rep.messages.push_back(std::string("numerical failure: ") + e.what());
  }
  rep.final_state = psi;

  // Norm drift is checked for every evolving scenario.
  if (!rep.norm.empty()) {
    double drift = 0.0;
    for (double v : rep.norm) drift = std::max(drift, std::abs(v - 1.0));
    rep.checks.push_back({"norm_drift", drift, 1e-10, drift < 1e-10});
  }

  if (cfg.id == ScenarioId::larmor && !rep.numerical_failure) {
    // sigma^1 expectation = 2 S_x / hbar; frequency must match beta B0 / m.
    std::vector<double> sx(rep.time.size());
    for (std::size_t i = 0; i < sx.size(); ++i)
      sx[i] = 2.0 * rep.spin[i][0] / cfg.params.hbar;
    const double bnorm = std::sqrt(cfg.gauge.b[0] * cfg.gauge.b[0] +
                                   cfg.gauge.b[1] * cfg.gauge.b[1] +
                                   cfg.gauge.b[2] * cfg.gauge.b[2]);
    const double omega_expected = std::abs(cfg.params.beta) * bnorm / cfg.params.mass;
    const CosineFit fit = fit_cosine(rep.time, sx);
    const double rel = std::abs(fit.omega - omega_expected) / omega_expected;
    rep.checks.push_back({"larmor_frequency_rel_error", rel, 1e-3, rel < 1e-3});
    std::ostringstream os;
    os << "fitted omega = " << fit.omega << ", expected = " << omega_expected;
    rep.messages.push_back(os.str());
  }

  if (cfg.id == ScenarioId::stern_gerlach && !rep.numerical_failure) {
    const double upper = scenario_detail::upper_lobe_weight(psi);
    const double expected_upper = std::norm(cfg.initial.spinor[0]);
    const double dev = std::abs(upper - expected_upper);
    rep.checks.push_back({"stern_gerlach_upper_weight_error", dev, 0.01, dev < 0.01});
    std::ostringstream os;
    os << "upper lobe weight = " << upper << ", |c+|^2 = " << expected_upper;
    rep.messages.push_back(os.str());
  }

  if (!quiet) {
    for (const auto& m : rep.messages) std::printf("%s\n", m.c_str());
    for (const auto& c : rep.checks)
      std::printf("%s %s: %.3e (threshold %.3e)\n", c.pass ? "[PASS]" : "[FAIL]", c.name.c_str(),
                  c.value, c.threshold);
  }

  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Output emission.

/// Writes observables.csv, the sampler series, summary.json, optional
/// snapshots and a README describing the gnuplot-ready column layout.
inline void emit_outputs(const RunReport& rep, const ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output.directory);
  fs::create_directories(dir);

  const int dim = cfg.grid.dim;
  {
    std::vector<std::string> cols{"t", "norm", "energy"};
    if (dim == 1) {
      cols.push_back("x_mean");
      cols.push_back("var_x");
    } else {
      for (int a = 0; a < dim; ++a) cols.push_back("x_mean_" + std::to_string(a));
      for (int a = 0; a < dim; ++a) cols.push_back("var_x_" + std::to_string(a));
    }
    cols.insert(cols.end(), {"Sx", "Sy", "Sz"});
    if (dim >= 2) cols.insert(cols.end(), {"Lx", "Ly", "Lz"});
    io::CsvWriter csv((dir / "observables.csv").string(), cols);
    for (std::size_t i = 0; i < rep.time.size(); ++i) {
      std::vector<double> row{rep.time[i], rep.norm[i], rep.energy[i]};
      for (int a = 0; a < dim; ++a) row.push_back(rep.x_mean[i][a]);
      for (int a = 0; a < dim; ++a) row.push_back(rep.x_var[i][a]);
      for (int a = 0; a < 3; ++a) row.push_back(rep.spin[i][a]);
      if (dim >= 2)
        for (int a = 0; a < 3; ++a) row.push_back(rep.orbital[i][a]);
      csv.row(row);
    }
  }

  if (!rep.ensemble_l1.empty()) {
    std::vector<std::string> cols{"t"};
    for (int a = 0; a < dim; ++a) cols.push_back("mean_dx_" + std::to_string(a));
    for (int a = 0; a < dim; ++a)
      for (int c = 0; c < dim; ++c) cols.push_back("cov_" + std::to_string(a) + std::to_string(c));
    cols.push_back("L1_distance_to_rho");
    io::CsvWriter csv((dir / "ensemble_L1.csv").string(), cols);
    for (std::size_t i = 0; i < rep.ensemble_l1.size(); ++i) {
      std::vector<double> row{rep.time[i]};
      const StepMoments m = (i > 0 && i - 1 < rep.moments.size()) ? rep.moments[i - 1]
                                                                  : StepMoments{};
      for (int a = 0; a < dim; ++a) row.push_back(m.mean[a]);
      for (int a = 0; a < dim; ++a)
        for (int c = 0; c < dim; ++c) row.push_back(m.cov[a][c]);
      row.push_back(rep.ensemble_l1[i]);
      csv.row(row);
    }
  }

  if (cfg.output.snapshots && rep.final_state)
    io::write_spinor_dump((dir / "psi_final").string(), *rep.final_state);

  {
    nlohmann::json j;
    j["scenario"] = to_string(rep.id);
    j["wall_seconds"] = rep.wall_seconds;
    j["numerical_failure"] = rep.numerical_failure;
    j["failed"] = rep.failed();
    j["exit_code"] = rep.exit_code();
    for (const auto& c : rep.checks) {
      j["checks"][c.name] = {{"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
      if (c.name == "norm_drift") j["norm_drift"] = c.pass ? "pass" : "fail";
    }
    if (rep.id == ScenarioId::rotation_demo) {
      j["k_probabilities"] = {rep.k_probabilities[0], rep.k_probabilities[1]};
      j["rotated_spinor"] = {rep.rotated_spinor[0].real(), rep.rotated_spinor[0].imag(),
                             rep.rotated_spinor[1].real(), rep.rotated_spinor[1].imag()};
    }
    for (const auto& m : rep.messages) j["messages"].push_back(m);
    std::ofstream os(dir / "summary.json");
    os << j.dump(2) << "\n";
  }

  {
    std::ofstream os(dir / "README.md");
    os << "# Run outputs\n\n"
       << "Scenario: " << to_string(rep.id) << "\n\n"
       << "## observables.csv\n\n"
       << "One row per recorded step; comma separated, gnuplot-ready\n"
       << "(`set datafile separator ','`). Columns:\n\n";
    if (dim == 1)
      os << "    1 t | 2 norm | 3 energy | 4 x_mean | 5 var_x | 6 Sx | 7 Sy | 8 Sz\n";
    else
      os << "    t, norm, energy, x_mean per axis, var_x per axis, Sx, Sy, Sz, Lx, Ly, Lz\n";
    os << "\n`norm` is <psi|psi>; `Sx,Sy,Sz` the spin functional; `Lx,Ly,Lz`\n"
       << "orbital angular momentum (present for dim >= 2).\n";
    if (!rep.ensemble_l1.empty())
      os << "\n## ensemble_L1.csv\n\n"
         << "Per recorded step: empirical step-displacement mean and covariance\n"
         << "of the walker ensemble, and the L1 distance between the walker\n"
         << "density estimate and the solver marginal rho_x.\n";
    os << "\n## summary.json\n\nPer-check values, thresholds and verdicts; exit code 0 means\n"
       << "every check passed, 4 a tolerance failure, 3 a numerical failure.\n";
    if (cfg.output.snapshots)
      os << "\n## psi_final.bin / psi_final.json\n\n"
         << "Little-endian float64 dump of the final spinor, row-major over grid\n"
         << "points, component order + then -, real/imaginary interleaved; the\n"
         << "sidecar records dim, points, extents and the layout.\n";
  }
}

}  // namespace edpauli
