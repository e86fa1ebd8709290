#pragma once

#include <stdexcept>
#include <string>

namespace edpauli {

/// Shape or axis inconsistencies between grids, fields and operators.
struct structural_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Values outside an operation's mathematical domain (negative densities,
/// non-unit rotation axes, nonpositive physical constants).
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// Iterative solver failure. Carries the last residual and iteration count.
struct numerical_error : std::runtime_error {
  double residual;
  int iterations;
  numerical_error(const std::string& what, double res, int iters)
      : std::runtime_error(what), residual(res), iterations(iters) {}
};

/// A caller-supplied operator violated a stated contract (e.g. a kernel
/// passed as "bilinear" failed the superposition probe).
struct contract_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace edpauli
