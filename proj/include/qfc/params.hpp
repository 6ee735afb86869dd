#pragma once

namespace qfc {

/// Physical constants of the monitored particle. The Hamiltonian is
/// p^2/2m + (hbar mu / 2) q^2 - f q + v p, with simultaneous position and
/// momentum monitoring at strengths kappa and kappa_tilde.
struct PhysicalParams {
  double mass = 1.0;         // kg
  double hbar = 1.0;         // J s
  double mu = 0.0;           // 1/(m^2 s); quadratic potential coefficient
  double kappa = 0.0;        // 1/(m^2 s); position monitoring strength
  double kappa_tilde = 0.0;  // s/(kg^2 m^2); momentum monitoring strength

  /// Throws std::invalid_argument when mass or hbar is not positive, any
  /// monitoring strength is negative, or a field is non-finite.
  void validate() const;
};

/// Convenience constructor for the dimensionless regime mass = hbar = 1.
PhysicalParams natural_units(double mu, double kappa, double kappa_tilde);

/// Control inputs: linear force f (potential term -f q) and velocity drive v
/// (term +v p).
struct Controls {
  double f = 0.0;  // N
  double v = 0.0;  // m/s
};

}  // namespace qfc
