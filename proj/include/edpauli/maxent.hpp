#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "edpauli/errors.hpp"
#include "edpauli/rng.hpp"

namespace edpauli {
namespace maxent {

using Vec3 = std::array<double, 3>;

/// Symmetric displacement lattice: points_per_axis nodes per axis (odd, so
/// zero displacement is a node) spanning [-half_width, half_width]^dim.
struct DisplacementLattice {
  int dim = 1;
  int points_per_axis = 41;
  double half_width = 1.0;

  DisplacementLattice(int d, int pts, double w) : dim(d), points_per_axis(pts), half_width(w) {
    if (d < 1 || d > 3) throw structural_error("DisplacementLattice: dim must be 1..3");
    if (pts < 3 || pts % 2 == 0)
      throw structural_error("DisplacementLattice: points_per_axis must be odd and >= 3");
    if (!(w > 0.0)) throw structural_error("DisplacementLattice: half_width must be > 0");
  }

  double spacing() const { return 2.0 * half_width / (points_per_axis - 1); }

  std::size_t size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(points_per_axis);
    return n;
  }

  Vec3 node(std::size_t flat) const {
    Vec3 x{0.0, 0.0, 0.0};
    const double h = spacing();
    std::size_t rem = flat;
    for (int a = dim - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % static_cast<std::size_t>(points_per_axis));
      rem /= static_cast<std::size_t>(points_per_axis);
      x[a] = -half_width + h * i;
    }
    return x;
  }
};

/// One transition-kernel instance: Gaussian prior width multiplier alpha,
/// drift covector dbar_a phi, the combined gauge covector beta A_a, and the
/// drift multiplier alpha' (= 1/eta in the entropic-time parameterization).
struct Setting {
  double alpha = 1.0;
  double alpha_prime = 1.0;
  Vec3 drift{0.0, 0.0, 0.0};    // dbar_a phi
  Vec3 beta_a{0.0, 0.0, 0.0};   // beta * A_a
};

/// Closed-form kernel exp(-alpha/2 |dx|^2 + alpha' (drift - beta A) . dx),
/// normalized on the lattice.
inline std::vector<double> closed_form_kernel(const Setting& s, const DisplacementLattice& lat) {
  std::vector<double> p(lat.size());
  Vec3 c{};
  for (int a = 0; a < 3; ++a) c[a] = s.alpha_prime * (s.drift[a] - s.beta_a[a]);
  double z = 0.0;
  // log weights shifted by the max for a stable exponentiation
  double wmax = -1e300;
  std::vector<double> logw(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const Vec3 dx = lat.node(i);
    double q = 0.0, lin = 0.0;
    for (int a = 0; a < lat.dim; ++a) {
      q += dx[a] * dx[a];
      lin += c[a] * dx[a];
    }
    logw[i] = -0.5 * s.alpha * q + lin;
    wmax = std::max(wmax, logw[i]);
  }
  for (std::size_t i = 0; i < lat.size(); ++i) {
    p[i] = std::exp(logw[i] - wmax);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

/// S[P, Q] = -sum P log(P/Q) on the lattice.
inline double relative_entropy(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s -= p[i] * std::log(p[i] / q[i]);
  return s;
}

struct Report {
  bool converged = false;
  int iterations = 0;
  double max_rel_error = 0.0;      // numeric vs closed form, pointwise
  double duality_gap = 0.0;        // lambda . grad of the dual at exit
  double constraint_gap = 0.0;     // max |E_lambda[f_j] - kappa_j|
  std::array<double, 2> multipliers{0.0, 0.0};
  std::array<double, 2> targets{0.0, 0.0};
  double mean_displacement_axis0 = 0.0;
  std::vector<double> numeric;
  std::vector<double> closed_form;

  std::string to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"converged\": " << (converged ? "true" : "false")
       << ", \"iterations\": " << iterations << ", \"max_rel_error\": " << max_rel_error
       << ", \"duality_gap\": " << duality_gap << ", \"constraint_gap\": " << constraint_gap
       << ", \"multipliers\": [" << multipliers[0] << ", " << multipliers[1] << "]}";
    return os.str();
  }
};

namespace detail {

/// Distribution proportional to q_i exp(lambda . f_i), plus the log-partition.
inline double gibbs(const std::vector<double>& q, const std::vector<std::array<double, 2>>& f,
                    const std::array<double, 2>& lambda, std::vector<double>& out) {
  double wmax = -1e300;
  std::vector<double> logw(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    logw[i] = std::log(q[i]) + lambda[0] * f[i][0] + lambda[1] * f[i][1];
    wmax = std::max(wmax, logw[i]);
  }
  double z = 0.0;
  out.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out[i] = std::exp(logw[i] - wmax);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return std::log(z) + wmax;
}

}  // namespace detail

/// Maximizes S[P, Q] with the Gaussian prior under normalization and the two
/// linear expectation constraints
///   <drift . dx> = kappa', <A . dx> = kappa''
/// by a damped Newton search on the convex dual (the multiplier search). The
/// targets are taken from the closed form, and the numerical optimum is
/// compared against it pointwise. The Newton step uses the pseudo-inverse of
/// the 2x2 constraint covariance: in 1-D the two covectors are collinear and
/// the multiplier pair is not unique, but the distribution is.
inline Report maxent_oracle(const Setting& s, const DisplacementLattice& lat,
                            int max_iter = 200, double grad_tol = 1e-13) {
  const std::size_t n = lat.size();

  // Prior: the alpha-Gaussian, normalized.
  std::vector<double> q(n);
  {
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 dx = lat.node(i);
      double r2 = 0.0;
      for (int a = 0; a < lat.dim; ++a) r2 += dx[a] * dx[a];
      q[i] = std::exp(-0.5 * s.alpha * r2);
      z += q[i];
    }
    for (double& v : q) v /= z;
  }

  // Constraint features f_i = (drift . dx_i, A . dx_i). The paper's gauge
  // constraint carries the covector A with multiplier -alpha' beta; here the
  // second feature absorbs beta, so the reference multipliers are
  // (alpha', -alpha').
  std::vector<std::array<double, 2>> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 dx = lat.node(i);
    double f0 = 0.0, f1 = 0.0;
    for (int a = 0; a < lat.dim; ++a) {
      f0 += s.drift[a] * dx[a];
      f1 += s.beta_a[a] * dx[a];
    }
    f[i] = {f0, f1};
  }

  Report rep;
  rep.closed_form = closed_form_kernel(s, lat);

  // Targets from the closed form.
  std::array<double, 2> kappa{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    kappa[0] += rep.closed_form[i] * f[i][0];
    kappa[1] += rep.closed_form[i] * f[i][1];
  }
  rep.targets = kappa;

  // Scale for the convergence test: feature magnitudes on the lattice.
  double fscale = 1e-30;
  for (std::size_t i = 0; i < n; ++i)
    fscale = std::max({fscale, std::abs(f[i][0]), std::abs(f[i][1])});

  std::array<double, 2> lambda{0.0, 0.0};
  std::vector<double> p;
  double dual = detail::gibbs(q, f, lambda, p) - lambda[0] * kappa[0] - lambda[1] * kappa[1];

  int it = 0;
  std::array<double, 2> grad{0.0, 0.0};
  for (; it < max_iter; ++it) {
    // grad = E_p[f] - kappa; hess = Cov_p(f)
    std::array<double, 2> ef{0.0, 0.0};
    std::array<std::array<double, 2>, 2> eff{{{0.0, 0.0}, {0.0, 0.0}}};
    for (std::size_t i = 0; i < n; ++i) {
      ef[0] += p[i] * f[i][0];
      ef[1] += p[i] * f[i][1];
      eff[0][0] += p[i] * f[i][0] * f[i][0];
      eff[0][1] += p[i] * f[i][0] * f[i][1];
      eff[1][1] += p[i] * f[i][1] * f[i][1];
    }
    eff[1][0] = eff[0][1];
    grad = {ef[0] - kappa[0], ef[1] - kappa[1]};
    const double gnorm = std::max(std::abs(grad[0]), std::abs(grad[1]));
    if (gnorm <= grad_tol * fscale) {
      rep.converged = true;
      break;
    }

    std::array<std::array<double, 2>, 2> hess{
        {{eff[0][0] - ef[0] * ef[0], eff[0][1] - ef[0] * ef[1]},
         {eff[1][0] - ef[1] * ef[0], eff[1][1] - ef[1] * ef[1]}}};

    // Pseudo-inverse Newton step via the eigen-decomposition of the 2x2
    // symmetric PSD Hessian.
    const double tr = hess[0][0] + hess[1][1];
    const double det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    const double e1 = 0.5 * tr + disc, e2 = 0.5 * tr - disc;
    const double cutoff = 1e-12 * std::max(e1, 1e-300);
    // eigenvectors
    std::array<double, 2> u1{}, u2{};
    if (std::abs(hess[0][1]) > 1e-300) {
      u1 = {hess[0][1], e1 - hess[0][0]};
      u2 = {hess[0][1], e2 - hess[0][0]};
    } else {
      u1 = {1.0, 0.0};
      u2 = {0.0, 1.0};
      if (hess[1][1] > hess[0][0]) std::swap(u1, u2);
    }
    auto normalize = [](std::array<double, 2>& u) {
      const double m = std::sqrt(u[0] * u[0] + u[1] * u[1]);
      if (m > 0.0) {
        u[0] /= m;
        u[1] /= m;
      }
    };
    normalize(u1);
    normalize(u2);
    std::array<double, 2> step{0.0, 0.0};
    for (const auto& [e, u] : {std::pair{e1, u1}, std::pair{e2, u2}}) {
      if (e > cutoff) {
        const double proj = (grad[0] * u[0] + grad[1] * u[1]) / e;
        step[0] -= proj * u[0];
        step[1] -= proj * u[1];
      }
    }

    // Damping: halve until the dual decreases (it is convex, full steps
    // almost always pass).
    double t = 1.0;
    for (int back = 0; back < 60; ++back) {
      const std::array<double, 2> trial{lambda[0] + t * step[0], lambda[1] + t * step[1]};
      std::vector<double> ptrial;
      const double dual_trial = detail::gibbs(q, f, trial, ptrial) - trial[0] * kappa[0] -
                                trial[1] * kappa[1];
      if (dual_trial <= dual + 1e-15 * std::abs(dual)) {
        lambda = trial;
        dual = dual_trial;
        p = std::move(ptrial);
        break;
      }
      t *= 0.5;
    }
  }

  rep.iterations = it;
  rep.multipliers = lambda;
  rep.numeric = p;
  rep.duality_gap = std::abs(lambda[0] * grad[0] + lambda[1] * grad[1]);
  rep.constraint_gap = std::max(std::abs(grad[0]), std::abs(grad[1]));

  double worst = 0.0, mean0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ref = rep.closed_form[i];
    if (ref > 0.0) worst = std::max(worst, std::abs(p[i] - ref) / ref);
    mean0 += p[i] * lat.node(i)[0];
  }
  rep.max_rel_error = worst;
  rep.mean_displacement_axis0 = mean0;
  return rep;
}

/// Deterministic randomized settings for the oracle suite: the constraint
/// shift stays inside half the lattice, the prior width stays resolved by
/// the lattice spacing, and the tails stay contained.
inline Setting random_setting(std::uint64_t seed, int index, int dim,
                              const DisplacementLattice& lat) {
  CounterRng rng(seed, static_cast<std::uint64_t>(index), 0, 77);
  Setting s;
  const double sigma_min = 2.5 * lat.spacing();
  const double sigma_max = lat.half_width / 8.0;
  const double sigma = sigma_min + (sigma_max - sigma_min) * rng.next_uniform();
  s.alpha = 1.0 / (sigma * sigma);
  s.alpha_prime = 0.2 + 2.0 * rng.next_uniform();
  // Mean displacement (alpha'/alpha)(drift - beta A) bounded by half_width/3.
  const double mean_cap = lat.half_width / 3.0;
  for (int a = 0; a < dim; ++a) {
    const double target_mean = mean_cap * (2.0 * rng.next_uniform() - 1.0);
    const double total = target_mean * s.alpha / s.alpha_prime;
    const double gauge_part = total * (rng.next_uniform() - 0.5);
    s.beta_a[a] = -gauge_part;
    s.drift[a] = total + s.beta_a[a];
  }
  return s;
}

}  // namespace maxent
}  // namespace edpauli
