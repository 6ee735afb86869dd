#include "qfc/filter.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "qfc/errors.hpp"
#include "qfc/riccati.hpp"

namespace qfc {

std::pair<Eigen::Vector2d, Eigen::Matrix2d> filter_drift_diffusion(
    const ExtendedCoherentState& state, const PhysicalParams& params, const Controls& u) {
  require_valid(state);
  params.validate();
  const auto c = covariances(state, params.hbar);
  Eigen::Vector2d drift(state.p_bar / params.mass + u.v,
                        -params.hbar * params.mu * state.q_bar + u.f);
  const double gq = std::sqrt(2.0 * params.kappa);
  const double gp = std::sqrt(2.0 * params.kappa_tilde);
  Eigen::Matrix2d diffusion;
  diffusion << gq * c.c_qq, gp * c.c_qp,
               gq * c.c_qp, gp * c.c_pp;
  return {drift, diffusion};
}

FilterTrajectory propagate_filter(const ExtendedCoherentState& state0,
                                  const PhysicalParams& params, const ControlPolicy& policy,
                                  const NoisePath& noise, double t0) {
  require_valid(state0);
  params.validate();
  if (!policy) {
    throw std::invalid_argument("propagate_filter requires a callable policy");
  }
  if (static_cast<int>(noise.dW.size()) != noise.n_steps ||
      static_cast<int>(noise.dW_tilde.size()) != noise.n_steps) {
    throw std::invalid_argument("noise path increment count does not match its n_steps");
  }
  if (!(noise.dt > 0.0)) {
    throw std::invalid_argument("propagate_filter requires noise.dt > 0");
  }

  FilterTrajectory traj;
  traj.noise = noise;
  traj.times.reserve(noise.n_steps + 1);
  traj.states.reserve(noise.n_steps + 1);
  traj.times.push_back(t0);
  traj.states.push_back(state0);

  ExtendedCoherentState state = state0;
  for (int k = 0; k < noise.n_steps; ++k) {
    const double t = t0 + k * noise.dt;
    const Controls u = policy(t, state);

    // Means: Euler-Maruyama with the diffusion frozen at the step start.
    const auto [drift, diffusion] = filter_drift_diffusion(state, params, u);
    const double dW = noise.dW[k];
    const double dWt = noise.dW_tilde[k];
    state.q_bar += drift(0) * noise.dt + diffusion(0, 0) * dW + diffusion(0, 1) * dWt;
    state.p_bar += drift(1) * noise.dt + diffusion(1, 0) * dW + diffusion(1, 1) * dWt;

    // eta is deterministic; integrate it with RK4 on the same grid.
    const auto eta = riccati_rk4_step(state.eta(), params, noise.dt);
    state.eta_re = eta.real();
    state.eta_im = eta.imag();
    if (!std::isfinite(state.eta_re) || state.eta_re <= kEtaReFloor) {
      throw RiccatiBlowupError(
          "filter covariance parameter left the physical half-plane at t = " +
              std::to_string(t + noise.dt) + "; reduce dt",
          t + noise.dt);
    }
    if (!std::isfinite(state.q_bar) || !std::isfinite(state.p_bar)) {
      throw NumericalError("filter means diverged at t = " + std::to_string(t + noise.dt));
    }

    traj.times.push_back(t0 + (k + 1) * noise.dt);
    traj.states.push_back(state);
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const FilterTrajectory& traj) {
  out << "t,q_bar,p_bar,eta_re,eta_im,dW,dW_tilde\n";
  char line[256];
  const int n = static_cast<int>(traj.states.size());
  for (int k = 0; k < n; ++k) {
    const auto& s = traj.states[k];
    const bool has_step = k < traj.noise.n_steps;
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  traj.times[k], s.q_bar, s.p_bar, s.eta_re, s.eta_im,
                  has_step ? traj.noise.dW[k] : 0.0, has_step ? traj.noise.dW_tilde[k] : 0.0);
    out << line;
  }
}

}  // namespace qfc
