#include "qfc/riccati.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qfc/ecs.hpp"
#include "qfc/errors.hpp"

namespace qfc {

std::complex<double> riccati_rhs(std::complex<double> eta, const PhysicalParams& params) {
  const std::complex<double> damping(params.kappa_tilde * params.hbar * params.hbar,
                                     params.hbar / params.mass);
  return std::complex<double>(2.0 * params.kappa, 2.0 * params.mu) - 0.5 * damping * eta * eta;
}

std::complex<double> eta_fixed_point(const PhysicalParams& params) {
  params.validate();
  if (params.kappa == 0.0 && params.mu == 0.0) {
    throw DegenerateParamsError(
        "eta fixed point undefined for kappa = mu = 0 (free unmonitored position spreads "
        "forever)");
  }
  const std::complex<double> num(params.kappa, params.mu);
  const std::complex<double> den(params.kappa_tilde, 1.0 / (params.mass * params.hbar));
  std::complex<double> root = std::sqrt(num / den);
  if (root.real() < 0.0) {
    root = -root;
  }
  const std::complex<double> eta_inf = 2.0 / params.hbar * root;
  if (!(eta_inf.real() > kEtaReFloor)) {
    throw DegenerateParamsError("eta fixed point degenerate: no interior root for these "
                                "parameters");
  }
  return eta_inf;
}

std::complex<double> riccati_rk4_step(std::complex<double> eta, const PhysicalParams& params,
                                      double dt) {
  const auto k1 = riccati_rhs(eta, params);
  const auto k2 = riccati_rhs(eta + 0.5 * dt * k1, params);
  const auto k3 = riccati_rhs(eta + 0.5 * dt * k2, params);
  const auto k4 = riccati_rhs(eta + dt * k3, params);
  return eta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

RiccatiTrajectory integrate_riccati(std::complex<double> eta0, const PhysicalParams& params,
                                    const TimeGrid& grid) {
  params.validate();
  if (!(eta0.real() > kEtaReFloor)) {
    throw std::domain_error("integrate_riccati requires eta0 with eta_re > 1e-12");
  }
  if (!(grid.dt > 0.0) || grid.n_steps < 1) {
    throw std::invalid_argument("integrate_riccati requires dt > 0 and n_steps >= 1");
  }

  RiccatiTrajectory traj;
  traj.grid = grid;
  traj.eta.reserve(grid.n_steps + 1);
  traj.eta.push_back(eta0);

  std::complex<double> eta = eta0;
  for (int k = 0; k < grid.n_steps; ++k) {
    eta = riccati_rk4_step(eta, params, grid.dt);
    const double t = grid.time(k + 1);
    if (!std::isfinite(eta.real()) || !std::isfinite(eta.imag()) || eta.real() <= kEtaReFloor) {
      throw RiccatiBlowupError("Riccati iterate left the physical half-plane at t = " +
                                   std::to_string(t) + "; reduce dt",
                               t);
    }
    traj.eta.push_back(eta);
  }
  return traj;
}

double fit_relaxation_rate(const RiccatiTrajectory& traj, std::complex<double> eta_inf) {
  // Slope of ln|eta - eta_inf| against t over the mid-decay window.
  const double scale = std::abs(eta_inf);
  double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
  int n = 0;
  for (int k = 0; k <= traj.grid.n_steps; ++k) {
    const double err = std::abs(traj.eta[k] - eta_inf);
    if (err < 1e-8 * scale || err > 1e-2 * scale) continue;
    const double t = traj.grid.time(k);
    const double y = std::log(err);
    sum_t += t;
    sum_y += y;
    sum_tt += t * t;
    sum_ty += t * y;
    ++n;
  }
  if (n < 5) return std::nan("");
  const double denom = n * sum_tt - sum_t * sum_t;
  if (denom == 0.0) return std::nan("");
  const double slope = (n * sum_ty - sum_t * sum_y) / denom;
  return -slope;
}

}  // namespace qfc
