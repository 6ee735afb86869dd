#include "qfc/params.hpp"

#include <cmath>
#include <stdexcept>

namespace qfc {

void PhysicalParams::validate() const {
  const bool finite = std::isfinite(mass) && std::isfinite(hbar) && std::isfinite(mu) &&
                      std::isfinite(kappa) && std::isfinite(kappa_tilde);
  if (!finite) {
    throw std::invalid_argument("physical parameters must be finite");
  }
  if (!(mass > 0.0)) {
    throw std::invalid_argument("mass must be positive");
  }
  if (!(hbar > 0.0)) {
    throw std::invalid_argument("hbar must be positive");
  }
  if (kappa < 0.0 || kappa_tilde < 0.0) {
    throw std::invalid_argument("monitoring strengths kappa and kappa_tilde must be >= 0");
  }
}

PhysicalParams natural_units(double mu, double kappa, double kappa_tilde) {
  PhysicalParams p;
  p.mass = 1.0;
  p.hbar = 1.0;
  p.mu = mu;
  p.kappa = kappa;
  p.kappa_tilde = kappa_tilde;
  p.validate();
  return p;
}

}  // namespace qfc
