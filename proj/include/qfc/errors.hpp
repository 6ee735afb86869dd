#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

// Argument/state violations throw std::invalid_argument or std::domain_error
// so callers can distinguish usage bugs from runtime numerical failures.

/// Base class for runtime numerical aborts. The CLI maps these to their own
/// exit code, distinct from configuration errors.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Riccati integration left the physical half-plane (eta_re fell to the
/// degeneracy floor) or produced non-finite values.
class RiccatiBlowupError : public NumericalError {
 public:
  RiccatiBlowupError(const std::string& what, double t)
      : NumericalError(what), time(t) {}
  double time;  // integration time at which the blow-up was detected
};

/// Wavefunction norm collapsed below the recovery threshold during a
/// stochastic step (step size too large for the sampled increments).
class NormCollapseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Requested grid does not cover the state's support in position or
/// momentum space.
class GridCoverageError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Probability mass reached the grid boundary; periodic wrap-around would
/// silently corrupt moments, so the computation aborts instead.
class AliasingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Parameters for which the requested quantity is undefined (e.g. the
/// Riccati fixed point with kappa = mu = 0).
class DegenerateParamsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qfc
