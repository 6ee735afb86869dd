#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "qfc/ecs.hpp"
#include "qfc/filter.hpp"
#include "qfc/noise.hpp"
#include "qfc/params.hpp"
#include "qfc/time_grid.hpp"

namespace qfc {

/// Time-dependent 2x2 coefficient.
using MatrixFn = std::function<Eigen::Matrix2d(double)>;

/// Quadratic cost J = int_t0^T (x'Ax + u'Eu)/2 dt + x(T)'R x(T)/2 on the
/// filtered means x = (q_bar, p_bar) and controls u = (f, v).
struct QuadraticCost {
  MatrixFn A;         // state weight, symmetric PSD
  MatrixFn E;         // control weight, symmetric positive definite
  Eigen::Matrix2d R;  // terminal weight, symmetric PSD
  double horizon;     // T

  static QuadraticCost constant(const Eigen::Matrix2d& A, const Eigen::Matrix2d& E,
                                const Eigen::Matrix2d& R, double horizon);
};

/// Controlled drift of the filtered means: dx = (F x + M u) dt + noise.
struct LinearDynamics {
  MatrixFn F;  // drift matrix
  MatrixFn M;  // control coupling

  static LinearDynamics constant(const Eigen::Matrix2d& F, const Eigen::Matrix2d& M);

  /// F = [[0, 1/m], [-hbar mu, 0]], M = [[0, 1], [1, 0]]: with u = (f, v)
  /// this reproduces the filter drift q_dot = p/m + v, p_dot = -hbar mu q + f.
  static LinearDynamics from_params(const PhysicalParams& params);
};

/// Ito quadratic variation of the filtered means: K = D D' with D the filter
/// diffusion matrix, i.e.
///   K_qq = 2 kappa C_qq^2        + 2 kappa_tilde C_qp^2
///   K_qp = 2 kappa C_qq C_qp     + 2 kappa_tilde C_qp C_pp
///   K_pp = 2 kappa C_qp^2        + 2 kappa_tilde C_pp^2.
struct DiffusionMatrixK {
  Eigen::Matrix2d matrix;
};

DiffusionMatrixK diffusion_matrix_K(const PhysicalParams& params, std::complex<double> eta);

/// Minimizing control u* = -E(t)^{-1} M(t)' y for costate / value gradient y.
Controls optimal_u(double t, const Eigen::Vector2d& y, const QuadraticCost& cost,
                   const LinearDynamics& dyn);

/// Minimized control Hamiltonian
///   H(t, x, y) = x'A x / 2 + y'F x - y'M E^{-1} M' y / 2.
double control_hamiltonian(double t, const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                           const QuadraticCost& cost, const LinearDynamics& dyn);

/// Quadratic value-function ansatz S(t, x) = x'Sigma(t) x / 2 + a(t) on a
/// uniform time grid ending at the cost horizon.
struct ValueFunction {
  TimeGrid grid;
  std::vector<Eigen::Matrix2d> sigma;  // grid.n_steps + 1 nodes
  std::vector<double> a;               // same nodes

  /// Throws std::invalid_argument when t lies outside [t0, horizon] beyond a
  /// small rounding slack. All evaluation helpers below call this first.
  void require_in_range(double t) const;

  /// Index of the grid node nearest to t.
  int nearest_node(double t) const;

  /// Linear interpolation between nodes.
  Eigen::Matrix2d sigma_at(double t) const;
  double a_at(double t) const;

  double value(double t, const Eigen::Vector2d& x) const;
};

/// Backward RK4 for the matrix Riccati equation
///   dSigma/dt = -Sigma F - F'Sigma + Sigma M E^{-1} M' Sigma - A,
/// from Sigma(T) = R down to grid.t0. Iterates are re-symmetrized every
/// step. Throws RiccatiBlowupError (with the escape time) when the iterate
/// exceeds norm 1e10 or stops being finite; the a-part of the result is
/// zero-filled. grid.horizon() must equal cost.horizon.
ValueFunction solve_sigma(const QuadraticCost& cost, const LinearDynamics& dyn,
                          const TimeGrid& grid);

/// Fills the offset a(t) = int_t^T tr(K.matrix * Sigma(s)) ds by composite
/// trapezoid on the Sigma nodes, a(T) = 0. The grid argument must equal
/// vf.grid (grid-mismatch throws std::invalid_argument).
ValueFunction solve_a(const DiffusionMatrixK& K, const ValueFunction& vf, const TimeGrid& grid);

/// Full pipeline at the relaxed filter covariance: Sigma from solve_sigma,
/// then the noise offset. The HJB generator term is tr(K Hess S)/2 with K
/// the Ito quadratic variation at eta_inf, and solve_a integrates the full
/// trace, so the offset is assembled with K/2.
ValueFunction build_value_function(const PhysicalParams& params, const QuadraticCost& cost,
                                   const LinearDynamics& dyn, const TimeGrid& grid);

/// Pointwise HJB defect  dS/dt + H(t, x, grad S) + tr(K Hess S)/2, evaluated
/// at the grid node nearest t with a fourth-order central time difference
/// (second-order one-sided fallback within two nodes of either end).
double hjb_residual(double t, const Eigen::Vector2d& x, const ValueFunction& vf,
                    const QuadraticCost& cost, const LinearDynamics& dyn,
                    const DiffusionMatrixK& K);

/// Feedback law u(t, state) = -E(t)^{-1} M(t)' * gain_scale * Sigma(t) x
/// with x the filtered means. gain_scale = 1 is the optimal policy.
ControlPolicy lqg_policy(const ValueFunction& vf, const QuadraticCost& cost,
                         const LinearDynamics& dyn, double gain_scale = 1.0);

struct ClosedLoopResult {
  FilterTrajectory trajectory;
  double realized_cost;  // running cost (left rectangle) plus terminal cost
};

/// One closed-loop trajectory from vf.grid.t0 driven by the given noise,
/// which must span exactly [t0, cost.horizon]. state0's eta must sit at the
/// relaxed fixed point within 1e-9 unless allow_transient_eta is set (the
/// value-function ansatz assumes stationary covariances).
ClosedLoopResult closed_loop_run(const ExtendedCoherentState& state0,
                                 const PhysicalParams& params, const QuadraticCost& cost,
                                 const LinearDynamics& dyn, const ValueFunction& vf,
                                 const NoisePath& noise, bool allow_transient_eta = false);

struct MonteCarloOptions {
  int n_traj;                     // >= 2
  double dt;                      // integration step for every path
  std::uint64_t master_seed = 0;  // path i uses path_seed(master_seed, i)
  int workers = 1;                // result is bit-identical for any value
  double gain_scale = 1.0;        // feedback gain multiplier (1 = optimal)
};

struct MonteCarloResult {
  double mean_cost;
  double std_error;          // sample standard error of the mean
  std::vector<double> cost;  // per-path realized costs, path order
};

/// Ensemble of closed-loop runs from state0, which must sit at the relaxed
/// eta exactly as in closed_loop_run. Path costs are reduced sequentially in
/// path order with compensated summation, so the scalar results do not
/// depend on the worker count.
MonteCarloResult monte_carlo_value(const ExtendedCoherentState& state0,
                                   const PhysicalParams& params, const QuadraticCost& cost,
                                   const LinearDynamics& dyn, const ValueFunction& vf,
                                   const MonteCarloOptions& opts);

}  // namespace qfc
