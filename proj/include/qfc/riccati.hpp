#pragma once

#include <complex>
#include <vector>

#include "qfc/params.hpp"
#include "qfc/time_grid.hpp"

namespace qfc {

/// Self-contained evolution of the inverse-variance parameter under
/// continuous monitoring:
///   d eta/dt = 2 kappa + 2 i mu - (kappa_tilde hbar^2 + i hbar / m) eta^2 / 2.
/// Controls do not enter; eta evolves deterministically regardless of the
/// measurement record.
std::complex<double> riccati_rhs(std::complex<double> eta, const PhysicalParams& params);

/// The unique fixed point in the half-plane eta_re > 0:
///   eta_inf = (2/hbar) sqrt+{ (kappa + i mu) / (kappa_tilde + i/(m hbar)) },
/// where sqrt+ picks the complex root with positive real part. Throws
/// DegenerateParamsError when kappa = mu = 0 (no interior fixed point).
std::complex<double> eta_fixed_point(const PhysicalParams& params);

/// Single classical RK4 step of d eta/dt = riccati_rhs.
std::complex<double> riccati_rk4_step(std::complex<double> eta, const PhysicalParams& params,
                                      double dt);

struct RiccatiTrajectory {
  TimeGrid grid;
  std::vector<std::complex<double>> eta;  // grid.n_steps + 1 nodes
};

/// RK4 integration on the given grid. Throws RiccatiBlowupError if eta_re
/// falls to the degeneracy floor or the iterate stops being finite.
RiccatiTrajectory integrate_riccati(std::complex<double> eta0, const PhysicalParams& params,
                                    const TimeGrid& grid);

/// Least-squares exponential relaxation rate fitted to ln|eta(t) - eta_inf|
/// over the window where the relative error lies in [1e-8, 1e-2]. Returns a
/// positive rate, or NaN when fewer than five nodes fall in the window.
double fit_relaxation_rate(const RiccatiTrajectory& traj, std::complex<double> eta_inf);

}  // namespace qfc
