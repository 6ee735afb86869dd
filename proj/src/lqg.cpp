#include "qfc/lqg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qfc/accum.hpp"
#include "qfc/errors.hpp"
#include "qfc/riccati.hpp"

namespace qfc {

namespace {

constexpr double kSigmaBlowup = 1e10;  // matrix norm treated as an escape

Eigen::Matrix2d require_spd(const Eigen::Matrix2d& e, double t) {
  if (!(e(0, 0) > 0.0) || !(e.determinant() > 0.0) ||
      std::abs(e(0, 1) - e(1, 0)) > 1e-12 * (1.0 + e.norm())) {
    throw std::invalid_argument("control weight E(t) must be symmetric positive definite (t = " +
                                std::to_string(t) + ")");
  }
  return e;
}

// Shared by closed_loop_run and the Monte Carlo ensemble: one trajectory and
// its realized cost under an arbitrary policy.
ClosedLoopResult run_with_policy(const ExtendedCoherentState& state0,
                                 const PhysicalParams& params, const QuadraticCost& cost,
                                 const ControlPolicy& policy, const NoisePath& noise,
                                 double t0) {
  ClosedLoopResult result;
  result.trajectory = propagate_filter(state0, params, policy, noise, t0);

  NeumaierSum running;
  for (int k = 0; k < noise.n_steps; ++k) {
    const double t = result.trajectory.times[k];
    const auto& s = result.trajectory.states[k];
    const Eigen::Vector2d x(s.q_bar, s.p_bar);
    const Controls uc = policy(t, s);
    const Eigen::Vector2d u(uc.f, uc.v);
    const double rate =
        0.5 * (x.dot(cost.A(t) * x) + u.dot(cost.E(t) * u));
    running.add(rate * noise.dt);
  }
  const auto& sT = result.trajectory.states.back();
  const Eigen::Vector2d xT(sT.q_bar, sT.p_bar);
  running.add(0.5 * xT.dot(cost.R * xT));
  result.realized_cost = running.value();
  return result;
}

}  // namespace

QuadraticCost QuadraticCost::constant(const Eigen::Matrix2d& A, const Eigen::Matrix2d& E,
                                      const Eigen::Matrix2d& R, double horizon) {
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("cost horizon must be positive");
  }
  return {[A](double) { return A; }, [E](double) { return E; }, R, horizon};
}

LinearDynamics LinearDynamics::constant(const Eigen::Matrix2d& F, const Eigen::Matrix2d& M) {
  return {[F](double) { return F; }, [M](double) { return M; }};
}

LinearDynamics LinearDynamics::from_params(const PhysicalParams& params) {
  params.validate();
  Eigen::Matrix2d F;
  F << 0.0, 1.0 / params.mass, -params.hbar * params.mu, 0.0;
  Eigen::Matrix2d M;
  M << 0.0, 1.0, 1.0, 0.0;
  return constant(F, M);
}

DiffusionMatrixK diffusion_matrix_K(const PhysicalParams& params, std::complex<double> eta) {
  params.validate();
  ExtendedCoherentState state;
  state.eta_re = eta.real();
  state.eta_im = eta.imag();
  const auto c = covariances(state, params.hbar);
  const double two_k = 2.0 * params.kappa;
  const double two_kt = 2.0 * params.kappa_tilde;
  DiffusionMatrixK K;
  K.matrix << two_k * c.c_qq * c.c_qq + two_kt * c.c_qp * c.c_qp,
      two_k * c.c_qq * c.c_qp + two_kt * c.c_qp * c.c_pp,
      two_k * c.c_qq * c.c_qp + two_kt * c.c_qp * c.c_pp,
      two_k * c.c_qp * c.c_qp + two_kt * c.c_pp * c.c_pp;
  return K;
}

Controls optimal_u(double t, const Eigen::Vector2d& y, const QuadraticCost& cost,
                   const LinearDynamics& dyn) {
  const Eigen::Matrix2d E = require_spd(cost.E(t), t);
  const Eigen::Vector2d u = -E.inverse() * dyn.M(t).transpose() * y;
  return {u(0), u(1)};
}

double control_hamiltonian(double t, const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                           const QuadraticCost& cost, const LinearDynamics& dyn) {
  const Eigen::Matrix2d E = require_spd(cost.E(t), t);
  const Eigen::Vector2d my = dyn.M(t).transpose() * y;
  return 0.5 * x.dot(cost.A(t) * x) + y.dot(dyn.F(t) * x) - 0.5 * my.dot(E.inverse() * my);
}

void ValueFunction::require_in_range(double t) const {
  const double lo = grid.t0;
  const double hi = grid.horizon();
  const double tol = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (!(t >= lo - tol) || !(t <= hi + tol)) {
    throw std::invalid_argument("time " + std::to_string(t) +
                                " lies outside the value-function grid [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "]");
  }
}

int ValueFunction::nearest_node(double t) const {
  require_in_range(t);
  const auto i = static_cast<int>(std::llround((t - grid.t0) / grid.dt));
  return std::clamp(i, 0, grid.n_steps);
}

Eigen::Matrix2d ValueFunction::sigma_at(double t) const {
  require_in_range(t);
  const double s = (t - grid.t0) / grid.dt;
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, grid.n_steps - 1);
  const double w = std::clamp(s - i, 0.0, 1.0);
  return (1.0 - w) * sigma[i] + w * sigma[i + 1];
}

double ValueFunction::a_at(double t) const {
  require_in_range(t);
  const double s = (t - grid.t0) / grid.dt;
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, grid.n_steps - 1);
  const double w = std::clamp(s - i, 0.0, 1.0);
  return (1.0 - w) * a[i] + w * a[i + 1];
}

double ValueFunction::value(double t, const Eigen::Vector2d& x) const {
  return 0.5 * x.dot(sigma_at(t) * x) + a_at(t);
}

ValueFunction solve_sigma(const QuadraticCost& cost, const LinearDynamics& dyn,
                          const TimeGrid& grid) {
  if (!cost.A || !cost.E || !dyn.F || !dyn.M) {
    throw std::invalid_argument("cost and dynamics coefficients must be callable");
  }
  if (grid.n_steps < 1 || !(grid.dt > 0.0)) {
    throw std::invalid_argument("solve_sigma requires a forward time grid");
  }
  if (std::abs(grid.horizon() - cost.horizon) > 1e-9 * std::max(1.0, std::abs(cost.horizon))) {
    throw std::invalid_argument("time grid horizon does not match the cost horizon");
  }

  auto rhs = [&](double t, const Eigen::Matrix2d& s) -> Eigen::Matrix2d {
    const Eigen::Matrix2d F = dyn.F(t);
    const Eigen::Matrix2d M = dyn.M(t);
    const Eigen::Matrix2d E = require_spd(cost.E(t), t);
    return -s * F - F.transpose() * s + s * M * E.inverse() * M.transpose() * s - cost.A(t);
  };

  ValueFunction vf;
  vf.grid = grid;
  vf.sigma.assign(grid.n_steps + 1, Eigen::Matrix2d::Zero());
  vf.a.assign(grid.n_steps + 1, 0.0);
  vf.sigma[grid.n_steps] = 0.5 * (cost.R + cost.R.transpose());

  const double h = -grid.dt;  // backward from the terminal condition
  for (int k = grid.n_steps; k > 0; --k) {
    const double t = grid.time(k);
    const Eigen::Matrix2d s = vf.sigma[k];
    const Eigen::Matrix2d k1 = rhs(t, s);
    const Eigen::Matrix2d k2 = rhs(t + 0.5 * h, s + 0.5 * h * k1);
    const Eigen::Matrix2d k3 = rhs(t + 0.5 * h, s + 0.5 * h * k2);
    const Eigen::Matrix2d k4 = rhs(t + h, s + h * k3);
    Eigen::Matrix2d next = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    next = 0.5 * (next + next.transpose()).eval();  // keep the iterate symmetric
    if (!next.allFinite() || next.norm() > kSigmaBlowup) {
      throw RiccatiBlowupError("Riccati matrix escaped (norm > 1e10) while integrating "
                               "backward through t = " +
                                   std::to_string(t + h),
                               t + h);
    }
    vf.sigma[k - 1] = next;
  }
  return vf;
}

ValueFunction solve_a(const DiffusionMatrixK& K, const ValueFunction& vf, const TimeGrid& grid) {
  if (!(grid == vf.grid)) {
    throw std::invalid_argument("solve_a: time grid does not match the Sigma grid");
  }
  ValueFunction out = vf;
  const int n = grid.n_steps;
  out.a.assign(n + 1, 0.0);
  auto integrand = [&](int k) { return (K.matrix * vf.sigma[k]).trace(); };
  double prev = integrand(n);
  for (int k = n; k > 0; --k) {
    const double cur = integrand(k - 1);
    out.a[k - 1] = out.a[k] + 0.5 * grid.dt * (prev + cur);
    prev = cur;
  }
  return out;
}

ValueFunction build_value_function(const PhysicalParams& params, const QuadraticCost& cost,
                                   const LinearDynamics& dyn, const TimeGrid& grid) {
  const auto eta_inf = eta_fixed_point(params);
  const DiffusionMatrixK K = diffusion_matrix_K(params, eta_inf);
  ValueFunction vf = solve_sigma(cost, dyn, grid);
  // The generator contributes tr(K Hess S)/2 while solve_a integrates the
  // full trace, so the offset takes K/2.
  return solve_a(DiffusionMatrixK{0.5 * K.matrix}, vf, grid);
}

double hjb_residual(double t, const Eigen::Vector2d& x, const ValueFunction& vf,
                    const QuadraticCost& cost, const LinearDynamics& dyn,
                    const DiffusionMatrixK& K) {
  const int n = vf.grid.n_steps;
  if (n < 4) {
    throw std::invalid_argument("hjb_residual needs at least four time steps");
  }
  const int i = vf.nearest_node(t);
  const double h = vf.grid.dt;
  auto value_at = [&](int j) { return 0.5 * x.dot(vf.sigma[j] * x) + vf.a[j]; };

  // Time derivative at the node: fourth-order central where possible,
  // second-order one-sided stencils at the ends.
  double dSdt;
  if (i >= 2 && i <= n - 2) {
    dSdt = (-value_at(i + 2) + 8.0 * value_at(i + 1) - 8.0 * value_at(i - 1) + value_at(i - 2)) /
           (12.0 * h);
  } else if (i == 0) {
    dSdt = (-3.0 * value_at(0) + 4.0 * value_at(1) - value_at(2)) / (2.0 * h);
  } else if (i == n) {
    dSdt = (3.0 * value_at(n) - 4.0 * value_at(n - 1) + value_at(n - 2)) / (2.0 * h);
  } else {
    dSdt = (value_at(i + 1) - value_at(i - 1)) / (2.0 * h);
  }

  const double t_node = vf.grid.time(i);
  const Eigen::Vector2d grad = vf.sigma[i] * x;
  const double ham = control_hamiltonian(t_node, x, grad, cost, dyn);
  return dSdt + ham + 0.5 * (K.matrix * vf.sigma[i]).trace();
}

ControlPolicy lqg_policy(const ValueFunction& vf, const QuadraticCost& cost,
                         const LinearDynamics& dyn, double gain_scale) {
  return [vf, cost, dyn, gain_scale](double t, const ExtendedCoherentState& s) {
    const Eigen::Vector2d x(s.q_bar, s.p_bar);
    const Eigen::Vector2d y = gain_scale * (vf.sigma_at(t) * x);
    return optimal_u(t, y, cost, dyn);
  };
}

ClosedLoopResult closed_loop_run(const ExtendedCoherentState& state0,
                                 const PhysicalParams& params, const QuadraticCost& cost,
                                 const LinearDynamics& dyn, const ValueFunction& vf,
                                 const NoisePath& noise, bool allow_transient_eta) {
  const auto eta_inf = eta_fixed_point(params);
  if (!allow_transient_eta && std::abs(state0.eta() - eta_inf) > 1e-9) {
    throw std::invalid_argument(
        "closed_loop_run: state0 eta is not at the relaxed fixed point (pass "
        "allow_transient_eta to run through the covariance transient anyway)");
  }
  const double t0 = vf.grid.t0;
  const double span = t0 + noise.n_steps * noise.dt;
  if (std::abs(span - cost.horizon) > 1e-9 * std::max(1.0, std::abs(cost.horizon))) {
    throw std::invalid_argument("noise path does not span [t0, horizon] exactly");
  }
  return run_with_policy(state0, params, cost, lqg_policy(vf, cost, dyn), noise, t0);
}

MonteCarloResult monte_carlo_value(const ExtendedCoherentState& state0,
                                   const PhysicalParams& params, const QuadraticCost& cost,
                                   const LinearDynamics& dyn, const ValueFunction& vf,
                                   const MonteCarloOptions& opts) {
  if (opts.n_traj < 2) {
    throw std::invalid_argument("monte_carlo_value requires n_traj >= 2");
  }
  if (opts.workers < 1) {
    throw std::invalid_argument("monte_carlo_value requires workers >= 1");
  }
  if (!(opts.dt > 0.0)) {
    throw std::invalid_argument("monte_carlo_value requires dt > 0");
  }
  const auto eta_inf = eta_fixed_point(params);
  if (std::abs(state0.eta() - eta_inf) > 1e-9) {
    throw std::invalid_argument(
        "monte_carlo_value: state0 eta is not at the relaxed fixed point");
  }

  const double t0 = vf.grid.t0;
  const TimeGrid path_grid = TimeGrid::with_step(t0, cost.horizon, opts.dt);
  const ControlPolicy policy = lqg_policy(vf, cost, dyn, opts.gain_scale);

  MonteCarloResult result;
  result.cost.assign(opts.n_traj, 0.0);

  // Workers fill disjoint path slots; the reduction below runs sequentially
  // in path order, so the scalar outputs are identical for any worker count.
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run_block = [&](int begin, int end) {
    try {
      for (int i = begin; i < end; ++i) {
        const NoisePath noise =
            make_noise_path(path_seed(opts.master_seed, i), path_grid.dt, path_grid.n_steps);
        result.cost[i] =
            run_with_policy(state0, params, cost, policy, noise, t0).realized_cost;
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  const int workers = std::min(opts.workers, opts.n_traj);
  if (workers == 1) {
    run_block(0, opts.n_traj);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (opts.n_traj + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(opts.n_traj, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_block, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  NeumaierSum total;
  for (const double c : result.cost) total.add(c);
  result.mean_cost = total.value() / opts.n_traj;

  NeumaierSum squares;
  for (const double c : result.cost) {
    const double d = c - result.mean_cost;
    squares.add(d * d);
  }
  result.std_error = std::sqrt(squares.value() /
                               (static_cast<double>(opts.n_traj) * (opts.n_traj - 1)));
  return result;
}

}  // namespace qfc
