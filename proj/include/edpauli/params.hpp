#pragma once

#include "edpauli/errors.hpp"
#include "edpauli/grid.hpp"

namespace edpauli {

/// Physical and sampling constants.
///
/// Natural units with configurable hbar and mass (defaults hbar = m = 1).
/// eta is the subquantum diffusion constant; the marginal dynamics is
/// eta-independent, so it defaults to hbar. beta = q/c is the only constant
/// allowed to be zero or negative.
struct EdParams {
  double mass = 1.0;
  double hbar = 1.0;
  double eta = 1.0;
  double beta = 1.0;
  double dt = 1e-3;

  void validate() const {
    if (!(mass > 0.0)) throw domain_error("EdParams: mass must be > 0");
    if (!(hbar > 0.0)) throw domain_error("EdParams: hbar must be > 0");
    if (!(eta > 0.0)) throw domain_error("EdParams: eta must be > 0");
    if (!(dt > 0.0)) throw domain_error("EdParams: dt must be > 0");
  }

  /// m h^2 / (hbar dt) on the coarsest axis. The implicit integrator is
  /// unconditionally stable; ratios <= 1 degrade accuracy and should warn.
  double stability_ratio(const Grid& g) const {
    const double h = g.max_spacing();
    return mass * h * h / (hbar * dt);
  }

  bool stability_ok(const Grid& g) const { return stability_ratio(g) > 1.0; }
};

}  // namespace edpauli
