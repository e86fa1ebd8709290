#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>

#include "edpauli/pauli.hpp"
#include "edpauli/sampler.hpp"
#include "test_util.hpp"

using namespace edpauli;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

SpinorField plane_wave_plus(const Grid& g, double p, double hbar = 1.0) {
  SpinorField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    psi.values[i] = std::exp(cplx(0.0, p * g.coordinate(0, static_cast<int>(i)) / hbar));
  const double nrm = std::sqrt(squared_norm(psi));
  for (auto& v : psi.values) v /= nrm;
  return psi;
}
}  // namespace

TEST_CASE("effective phase gradient", "[sampler]") {
  const Grid g({256}, {2.0 * pi * 4.0});
  EdParams params;
  const double h = g.spacing(0);

  SECTION("single-component plane wave: uniform momentum, eta term vanishes") {
    const double p = 1.0;  // integer mode on the box: k = p/hbar = 1 -> 4 periods
    const auto psi = plane_wave_plus(g, p);
    const auto grad = effective_phase_gradient(psi, params);
    const double symbol = params.hbar * std::sin(p * h / params.hbar) / h;
    for (double v : grad[0].values) {
      CHECK(v == Approx(symbol).epsilon(1e-12));          // exact stencil value
      CHECK(v == Approx(p).epsilon(p * h * h / 5.0));     // continuum within O(h^2)
    }
  }

  SECTION("real gaussian: pure osmotic gradient (eta/2) d log rho") {
    const auto psi = testutil::gaussian_packet(g, {0, 0, 0}, 1.5, {0, 0, 0}, 1.0, 0.0);
    params.eta = 0.8;
    const auto grad = effective_phase_gradient(psi, params);
    const ScalarField rho = spatial_density(psi);
    const ScalarField drho = gradient(rho, 0);
    double rho_max = 0.0;
    for (double r : rho.values) rho_max = std::max(rho_max, r);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (rho.values[i] > 1e-10 * rho_max) {
        const double expected = 0.5 * params.eta * drho.values[i] / rho.values[i];
        CHECK(grad[0].values[i] == Approx(expected).margin(1e-12));
      }
    }
  }

  SECTION("opposite k phases at equal weight cancel") {
    // xi_+ = +p x, xi_- = -p x with rho_{k|x} = 1/2: the phase part averages
    // to zero and only the (vanishing) osmotic term remains.
    const double p = 1.0;
    SpinorField psi(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.coordinate(0, static_cast<int>(i));
      psi.values[i] = std::exp(cplx(0.0, p * x));
      psi.values[g.size() + i] = std::exp(cplx(0.0, -p * x));
    }
    const double nrm = std::sqrt(squared_norm(psi));
    for (auto& v : psi.values) v /= nrm;
    const auto grad = effective_phase_gradient(psi, params);
    for (double v : grad[0].values) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("drift and current velocities", "[sampler]") {
  const Grid g({256}, {8.0 * pi});
  EdParams params;
  const double h = g.spacing(0);

  SECTION("plane wave: b = v = p_eff / m") {
    const double p = 1.0;
    const auto psi = plane_wave_plus(g, p);
    const auto gauge = GaugeField::zero(g);
    const auto b = drift_velocity(psi, gauge, params);
    const auto v = current_velocity(psi, gauge, params);
    const double expected = params.hbar * std::sin(p * h / params.hbar) / (h * params.mass);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(b[0].values[i] == Approx(expected).epsilon(1e-12));
      CHECK(v[0].values[i] == Approx(expected).epsilon(1e-12));
    }
  }

  SECTION("real gaussian: pure osmotic drift, zero current") {
    params.eta = 1.3;
    const auto psi = testutil::gaussian_packet(g, {0, 0, 0}, 1.5, {0, 0, 0}, 1.0, 0.0);
    const auto gauge = GaugeField::zero(g);
    const auto b = drift_velocity(psi, gauge, params);
    const auto v = current_velocity(psi, gauge, params);
    const ScalarField rho = spatial_density(psi);
    const ScalarField drho = gradient(rho, 0);
    double rho_max = 0.0;
    for (double r : rho.values) rho_max = std::max(rho_max, r);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(v[0].values[i] == 0.0);  // Im of a real product is exactly zero
      if (rho.values[i] > 1e-10 * rho_max) {
        const double osmotic =
            0.5 * params.eta / params.mass * drho.values[i] / rho.values[i];
        CHECK(b[0].values[i] == Approx(osmotic).margin(1e-12));
      }
    }
  }

  SECTION("uniform A on a constant state") {
    GaugeField gauge = GaugeField::zero(g);
    const double a0 = 0.9;
    for (auto& v : gauge.a[0].values) v = a0;
    params.beta = 0.7;
    const auto psi = SpinorField::uniform(g, 1.0, 0.0);
    const auto b = drift_velocity(psi, gauge, params);
    for (double v : b[0].values)
      CHECK(v == Approx(-params.beta * a0 / params.mass).epsilon(1e-14));
  }

  SECTION("mandatory cross-check: v = b - (eta/2m) d log rho") {
    const auto psi = testutil::gaussian_packet(g, {1, 0, 0}, 1.2, {0.7, 0, 0}, 0.8, 0.6);
    GaugeField gauge = GaugeField::zero(g);
    for (std::size_t i = 0; i < g.size(); ++i)
      gauge.a[0].values[i] = 0.3 * std::sin(g.coordinate(0, static_cast<int>(i)) / 4.0);
    params.eta = 2.2;
    const auto b = drift_velocity(psi, gauge, params);
    const auto v = current_velocity(psi, gauge, params);
    const ScalarField rho = spatial_density(psi);
    const ScalarField drho = gradient(rho, 0);
    double rho_max = 0.0;
    for (double r : rho.values) rho_max = std::max(rho_max, r);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (rho.values[i] > 1e-10 * rho_max) {
        const double osmotic =
            0.5 * params.eta / params.mass * drho.values[i] / rho.values[i];
        CHECK(std::abs(v[0].values[i] - (b[0].values[i] - osmotic)) < 1e-10);
      }
    }
  }

  SECTION("eta-independence of the current velocity") {
    const auto psi = testutil::gaussian_packet(g, {0, 0, 0}, 1.2, {0.5, 0, 0}, 1.0, 0.0);
    const auto gauge = GaugeField::zero(g);
    EdParams p10 = params;
    p10.eta = 10.0 * params.eta;
    const auto v1 = current_velocity(psi, gauge, params);
    const auto v2 = current_velocity(psi, gauge, p10);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(v1[0].values[i] == v2[0].values[i]);  // bitwise: eta never enters
  }
}

TEST_CASE("sample_step statistics", "[sampler]") {
  const Grid g({64}, {6.4});
  EdParams params;
  params.eta = 1.0;
  params.dt = 0.2;
  const auto gauge = GaugeField::zero(g);

  SECTION("pure noise: empirical covariance (eta/m) dt within 3 SE") {
    const auto psi = SpinorField::uniform(g, 1.0, 0.0);  // b = 0 exactly
    const int n = 1000000;
    TrajectoryEnsemble ens(g, n, 20260810);
    seed_from_density(ens, spatial_density(psi));
    const StepMoments m = sample_step(ens, psi, gauge, params);
    const double var = params.eta / params.mass * params.dt;
    const double se_mean = std::sqrt(var / n);
    const double se_var = var * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(m.mean[0]) < 3.0 * se_mean);
    CHECK(std::abs(m.cov[0][0] - var) < 3.0 * se_var);
  }

  SECTION("uniform drift: empirical mean b dt within 3 SE") {
    const double p = 2.0 * pi / 6.4;  // exact mode
    const auto psi = plane_wave_plus(g, p);
    const double b = params.hbar * std::sin(p * g.spacing(0)) / (g.spacing(0) * params.mass);
    params.dt = 0.01;
    const int n = 400000;
    TrajectoryEnsemble ens(g, n, 7);
    seed_from_density(ens, spatial_density(psi));
    const StepMoments m = sample_step(ens, psi, gauge, params);
    const double sigma = std::sqrt(params.eta / params.mass * params.dt);
    CHECK(std::abs(m.mean[0] - b * params.dt) < 3.0 * sigma / std::sqrt(double(n)));
  }

  SECTION("halving dt halves mean displacement and variance") {
    const double p = 2.0 * pi / 6.4;
    const auto psi = plane_wave_plus(g, p);
    const int n = 2000000;
    EdParams half = params;
    half.dt = 0.5 * params.dt;
    TrajectoryEnsemble e1(g, n, 3), e2(g, n, 4);
    seed_from_density(e1, spatial_density(psi));
    seed_from_density(e2, spatial_density(psi));
    const StepMoments m1 = sample_step(e1, psi, gauge, params);
    const StepMoments m2 = sample_step(e2, psi, gauge, half);
    CHECK(m1.mean[0] / m2.mean[0] == Approx(2.0).epsilon(0.05));
    CHECK(m1.cov[0][0] / m2.cov[0][0] == Approx(2.0).epsilon(0.01));
  }

  SECTION("positions stay wrapped and runs are reproducible bitwise") {
    const auto psi = testutil::gaussian_packet(g, {0, 0, 0}, 0.8, {1, 0, 0}, 1.0, 0.0);
    params.dt = 0.05;
    TrajectoryEnsemble e1(g, 5000, 99), e2(g, 5000, 99);
    seed_from_density(e1, spatial_density(psi));
    seed_from_density(e2, spatial_density(psi));
    setenv("EDPAULI_THREADS", "1", 1);
    for (int k = 0; k < 10; ++k) sample_step(e1, psi, gauge, params);
    setenv("EDPAULI_THREADS", "4", 1);
    for (int k = 0; k < 10; ++k) sample_step(e2, psi, gauge, params);
    unsetenv("EDPAULI_THREADS");
    for (int w = 0; w < e1.n_walkers; ++w) {
      CHECK(e1.positions[w] == e2.positions[w]);
      CHECK(e1.positions[w] >= -3.2);
      CHECK(e1.positions[w] < 3.2);
    }
  }

  SECTION("2-D step produces a symmetric PSD covariance") {
    const Grid g2({32, 32}, {6.4, 6.4});
    const auto psi = testutil::gaussian_packet(g2, {0, 0, 0}, 0.9, {0.5, -0.3, 0}, 1.0, 0.0);
    params.dt = 0.02;
    TrajectoryEnsemble ens(g2, 200000, 5);
    seed_from_density(ens, spatial_density(psi));
    const StepMoments m = sample_step(ens, psi, GaugeField::zero(g2), params);
    CHECK(m.cov[0][1] == Approx(m.cov[1][0]));
    CHECK(m.cov[0][0] > 0.0);
    CHECK(m.cov[1][1] > 0.0);
    CHECK(m.cov[0][0] * m.cov[1][1] - m.cov[0][1] * m.cov[1][0] > 0.0);
    // diagonal close to (eta/m) dt, off-diagonal close to zero
    const double var = params.eta / params.mass * params.dt;
    CHECK(m.cov[0][0] == Approx(var).epsilon(0.02));
    CHECK(std::abs(m.cov[0][1]) < 3.0 * var / std::sqrt(200000.0));
  }
}

TEST_CASE("k resampling", "[sampler]") {
  const Grid g({64}, {6.4});

  SECTION("pure plus state pins every label") {
    const auto psi = SpinorField::uniform(g, 1.0, 0.0);
    TrajectoryEnsemble ens(g, 10000, 11, true);
    seed_from_density(ens, spatial_density(psi));
    resample_k(ens, psi);
    for (auto k : ens.k_labels) CHECK(k == +1);
  }

  SECTION("balanced state: frequency 1/2 within 3 sigma") {
    const auto psi = SpinorField::uniform(g, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    const int n = 100000;
    TrajectoryEnsemble ens(g, n, 12, true);
    seed_from_density(ens, spatial_density(psi));
    resample_k(ens, psi);
    int plus = 0;
    for (auto k : ens.k_labels)
      if (k == 1) ++plus;
    const double freq = static_cast<double>(plus) / n;
    CHECK(std::abs(freq - 0.5) < 3.0 * 0.5 / std::sqrt(double(n)));
  }

  SECTION("disjoint supports make k deterministic by region") {
    SpinorField psi(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.coordinate(0, static_cast<int>(i));
      if (x < 0)
        psi.values[i] = 1.0;  // plus only on the left
      else
        psi.values[g.size() + i] = 1.0;  // minus only on the right
    }
    const double nrm = std::sqrt(squared_norm(psi));
    for (auto& v : psi.values) v /= nrm;
    TrajectoryEnsemble ens(g, 20000, 13, true);
    seed_from_density(ens, spatial_density(psi));
    resample_k(ens, psi);
    // away from the support boundary and from the periodic seam the label is
    // deterministic; within one cell of either, interpolation mixes
    const double h = g.spacing(0);
    const double edge = 0.5 * g.extent(0);
    for (int w = 0; w < ens.n_walkers; ++w) {
      const double x = ens.positions[w];
      if (edge - std::abs(x) < 2.0 * h) continue;
      if (x < -h) CHECK(ens.k_labels[w] == +1);
      if (x > 0.0) CHECK(ens.k_labels[w] == -1);
    }
  }

  SECTION("labels disabled is a structural error") {
    TrajectoryEnsemble ens(g, 10, 1);
    CHECK_THROWS_AS(resample_k(ens, SpinorField::uniform(g, 1.0, 0.0)), structural_error);
  }
}

TEST_CASE("density estimate", "[sampler]") {
  const Grid g({128}, {12.8});

  SECTION("all walkers in one cell give the indicator over the cell volume") {
    TrajectoryEnsemble ens(g, 100, 1);
    for (int w = 0; w < ens.n_walkers; ++w) ens.positions[w] = g.coordinate(0, 40) + 0.01;
    const ScalarField rho = density_estimate(ens, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i == 40)
        CHECK(rho.values[i] == Approx(1.0 / g.cell_volume()));
      else
        CHECK(rho.values[i] == 0.0);
    }
    CHECK(integrate(rho) == Approx(1.0));
  }

  SECTION("sampling a known gaussian: L1 distance under 0.02 at 1e5 walkers") {
    // multinomial budget sqrt(2/(pi N)) sum_i sqrt(p_i) ~= 0.013 here
    const auto psi = testutil::gaussian_packet(g, {0, 0, 0}, 0.5, {0, 0, 0}, 1.0, 0.0);
    const ScalarField rho = spatial_density(psi);
    TrajectoryEnsemble ens(g, 100000, 20260810);
    seed_from_density(ens, rho);
    const ScalarField est = density_estimate(ens, g);
    ScalarField diff(g);
    for (std::size_t i = 0; i < g.size(); ++i) diff.values[i] = est.values[i] - rho.values[i];
    CHECK(l1_norm(diff) < 0.02);
    CHECK(integrate(est) == Approx(1.0).epsilon(1e-12));
  }

  SECTION("smoothing keeps normalization") {
    const auto psi = testutil::gaussian_packet(g, {0, 0, 0}, 1.0, {0, 0, 0}, 1.0, 0.0);
    TrajectoryEnsemble ens(g, 20000, 3);
    seed_from_density(ens, spatial_density(psi));
    const ScalarField est = density_estimate(ens, g, 2.0 * g.spacing(0));
    CHECK(integrate(est) == Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("fokker-planck residual", "[sampler]") {
  EdParams params;
  params.dt = 1e-3;

  SECTION("stationary state") {
    const Grid g({64}, {2.0 * pi});
    const auto spec = HamiltonianSpec::free_particle(g, params);
    const auto psi = plane_wave_plus(g, 3.0);
    const auto prev = step(spec, psi, -params.dt);
    const auto next = step(spec, psi, params.dt);
    const auto rep = fokker_planck_residual(prev, psi, next, spec.gauge, params);
    CHECK(rep.l1 < 1e-8);
  }

  SECTION("identity with the continuity form on shared snapshots") {
    const Grid g({128}, {12.8});
    params.eta = 1.7;  // any eta: the osmotic term must cancel identically
    const auto spec = HamiltonianSpec::free_particle(g, params);
    const auto psi = testutil::gaussian_packet(g, {-2, 0, 0}, 0.8, {2.0, 0, 0}, 0.8, 0.6);
    const auto prev = step(spec, psi, -params.dt);
    const auto next = step(spec, psi, params.dt);
    const auto fp = fokker_planck_residual(prev, psi, next, spec.gauge, params);
    const auto cont = continuity_residual_from_snapshots(spec, prev, psi, next);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(fp.field.values[i] - cont.field.values[i]));
    CHECK(worst < 1e-10);
    CHECK(std::abs(fp.l1 - cont.l1) < 1e-10);
  }

  SECTION("second order in h and dt") {
    auto res = [&](int npts, double dt) {
      const Grid g({npts}, {12.8});
      EdParams p;
      p.dt = dt;
      const auto spec = HamiltonianSpec::free_particle(g, p);
      const auto psi = testutil::gaussian_packet(g, {-2, 0, 0}, 0.8, {2.0, 0, 0}, 1.0, 0.0);
      const auto prev = step(spec, psi, -p.dt);
      const auto next = step(spec, psi, p.dt);
      return fokker_planck_residual(prev, psi, next, spec.gauge, p).l1;
    };
    const double coarse = res(128, 2e-3);
    const double fine = res(256, 1e-3);
    CHECK(coarse / fine > 3.0);
    CHECK(coarse / fine < 5.2);
  }
}
