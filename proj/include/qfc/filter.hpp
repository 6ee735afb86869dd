#pragma once

#include <Eigen/Dense>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "qfc/ecs.hpp"
#include "qfc/noise.hpp"
#include "qfc/params.hpp"

namespace qfc {

/// Feedback law: controls as a function of time and the current filtered
/// state.
using ControlPolicy = std::function<Controls(double, const ExtendedCoherentState&)>;

inline ControlPolicy zero_policy() {
  return [](double, const ExtendedCoherentState&) { return Controls{}; };
}

inline ControlPolicy constant_policy(Controls u) {
  return [u](double, const ExtendedCoherentState&) { return u; };
}

/// Drift vector and diffusion matrix of the filtered means (q_bar, p_bar):
///   drift = (p_bar/m + v, -hbar mu q_bar + f)
///   D     = [ sqrt(2 kappa) C_qq   sqrt(2 kappa_tilde) C_qp ]
///           [ sqrt(2 kappa) C_qp   sqrt(2 kappa_tilde) C_pp ]
/// multiplying the innovation increments (dW, dW_tilde).
std::pair<Eigen::Vector2d, Eigen::Matrix2d> filter_drift_diffusion(
    const ExtendedCoherentState& state, const PhysicalParams& params, const Controls& u);

struct FilterTrajectory {
  std::vector<double> times;                  // n_steps + 1 nodes
  std::vector<ExtendedCoherentState> states;  // one per node
  NoisePath noise;                            // the increments that drove the path
};

/// Euler-Maruyama for the means combined with RK4 for eta on the same grid;
/// the policy is evaluated at the left endpoint of each step. Times are
/// t0 + k * noise.dt.
FilterTrajectory propagate_filter(const ExtendedCoherentState& state0,
                                  const PhysicalParams& params, const ControlPolicy& policy,
                                  const NoisePath& noise, double t0 = 0.0);

/// Columns: t, q_bar, p_bar, eta_re, eta_im, dW, dW_tilde. The increment
/// columns hold the increment consumed on [t_k, t_{k+1}); the final row,
/// which has no following step, carries zeros there.
void write_trajectory_csv(std::ostream& out, const FilterTrajectory& traj);

}  // namespace qfc
