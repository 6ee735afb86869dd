// Quadratic optimal control on the filtered means. Oracles:
//   - hand-evaluated K, u*, and Hamiltonian values;
//   - the decoupled instance F = 0, M = [[0,1],[1,0]], A = E = I, R = 0 with
//     closed forms Sigma(t) = tanh(T - t) I and, for K = I,
//     a(t) = 2 ln cosh(T - t);
//   - the tuned-monitoring instance with A = E = R = I, where Sigma = I is a
//     stationary point of the matrix Riccati flow and values are exact;
//   - scalar Riccati tangent blow-up for a strongly indefinite state cost;
//   - Monte Carlo closed-loop means against the value function.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "qfc/errors.hpp"
#include "qfc/lqg.hpp"
#include "qfc/noise.hpp"
#include "qfc/params.hpp"
#include "qfc/riccati.hpp"
#include "qfc/time_grid.hpp"

using namespace qfc;

namespace {

const PhysicalParams kTuned = natural_units(1.0, 1.0, 1.0);
const Eigen::Matrix2d kI = Eigen::Matrix2d::Identity();
const Eigen::Matrix2d kZero = Eigen::Matrix2d::Zero();

Eigen::Matrix2d swap_matrix() {
  Eigen::Matrix2d m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

// F = 0, M = swap, A = E = I, R = 0: Sigma(t) = tanh(T - t) I.
struct TanhInstance {
  QuadraticCost cost = QuadraticCost::constant(kI, kI, kZero, 1.0);
  LinearDynamics dyn = LinearDynamics::constant(kZero, swap_matrix());
  TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-3);
};

NoisePath zero_noise(double dt, int n_steps) {
  NoisePath p;
  p.dt = dt;
  p.n_steps = n_steps;
  p.dW.assign(n_steps, 0.0);
  p.dW_tilde.assign(n_steps, 0.0);
  return p;
}

}  // namespace

TEST_CASE("diffusion matrix: no monitoring, diagonal, and tuned values") {
  CHECK(diffusion_matrix_K(natural_units(1.0, 0.0, 0.0), {2.0, 0.0}).matrix.norm() == 0.0);

  const Eigen::Matrix2d diag = diffusion_matrix_K(kTuned, {3.0, 0.0}).matrix;
  CHECK(diag(0, 1) == 0.0);
  CHECK(diag(1, 0) == 0.0);

  // eta = 2: C = (1/2, 0, 1/2), so K = 2 diag(1/4, 1/4) = I/2.
  const Eigen::Matrix2d k2 = diffusion_matrix_K(kTuned, {2.0, 0.0}).matrix;
  CHECK((k2 - 0.5 * kI).norm() < 1e-14);

  // Tilted eta = 1 + i: C = (1, -1/2, 1/2) gives every entry by hand.
  const Eigen::Matrix2d kt = diffusion_matrix_K(kTuned, {1.0, 1.0}).matrix;
  CHECK(kt(0, 0) == doctest::Approx(2.0 * 1.0 + 2.0 * 0.25).epsilon(1e-14));   // 2.5
  CHECK(kt(0, 1) == doctest::Approx(2.0 * -0.5 + 2.0 * -0.25).epsilon(1e-14)); // -1.5
  CHECK(kt(1, 0) == kt(0, 1));
  CHECK(kt(1, 1) == doctest::Approx(2.0 * 0.25 + 2.0 * 0.25).epsilon(1e-14));  // 1.0

  CHECK_THROWS_AS(diffusion_matrix_K(kTuned, {-1.0, 0.0}), std::domain_error);
}

TEST_CASE("dynamics from particle parameters") {
  PhysicalParams p;
  p.mass = 2.0;
  p.hbar = 0.5;
  p.mu = 3.0;
  const LinearDynamics dyn = LinearDynamics::from_params(p);
  const Eigen::Matrix2d F = dyn.F(0.0);
  CHECK(F(0, 0) == 0.0);
  CHECK(F(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(F(1, 0) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(F(1, 1) == 0.0);
  CHECK((dyn.M(0.0) - swap_matrix()).norm() == 0.0);
}

TEST_CASE("optimal control: zero costate, swap coupling, and E-homogeneity") {
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kZero, 1.0);
  const LinearDynamics dyn = LinearDynamics::constant(kZero, swap_matrix());

  const Controls zero = optimal_u(0.0, Eigen::Vector2d::Zero(), cost, dyn);
  CHECK(zero.f == 0.0);
  CHECK(zero.v == 0.0);

  const Controls u = optimal_u(0.0, Eigen::Vector2d(1.0, 2.0), cost, dyn);
  CHECK(u.f == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(u.v == doctest::Approx(-1.0).epsilon(1e-14));

  const double c = 4.0;
  const QuadraticCost scaled = QuadraticCost::constant(kI, c * kI, kZero, 1.0);
  const Controls us = optimal_u(0.0, Eigen::Vector2d(1.0, 2.0), scaled, dyn);
  CHECK(us.f == doctest::Approx(u.f / c).epsilon(1e-14));
  CHECK(us.v == doctest::Approx(u.v / c).epsilon(1e-14));

  const QuadraticCost singular = QuadraticCost::constant(kI, kZero, kZero, 1.0);
  CHECK_THROWS_AS(optimal_u(0.0, Eigen::Vector2d(1.0, 2.0), singular, dyn),
                  std::invalid_argument);
}

TEST_CASE("control hamiltonian values and its minimization property") {
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kZero, 1.0);
  const LinearDynamics dyn = LinearDynamics::constant(kZero, swap_matrix());

  // y = 0: only the state cost remains.
  const Eigen::Vector2d x(1.0, 2.0);
  CHECK(control_hamiltonian(0.0, x, Eigen::Vector2d::Zero(), cost, dyn) ==
        doctest::Approx(2.5).epsilon(1e-14));

  // x = 0, y = (1, 0): -(y' M M' y)/2 = -1/2.
  CHECK(control_hamiltonian(0.0, Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 0.0), cost, dyn) ==
        doctest::Approx(-0.5).epsilon(1e-14));

  // H(t, x, y) = min_u [ x'Ax/2 + u'Eu/2 + y'(Fx + Mu) ]: no sampled u does
  // better, and the analytic minimizer attains it.
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> box(-3.0, 3.0);
  const LinearDynamics harmonic = LinearDynamics::from_params(kTuned);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d xs(box(rng), box(rng));
    const Eigen::Vector2d ys(box(rng), box(rng));
    const double h = control_hamiltonian(0.0, xs, ys, cost, harmonic);
    auto bracket = [&](const Eigen::Vector2d& u) {
      return 0.5 * xs.dot(cost.A(0.0) * xs) + 0.5 * u.dot(cost.E(0.0) * u) +
             ys.dot(harmonic.F(0.0) * xs + harmonic.M(0.0) * u);
    };
    for (int j = 0; j < 100; ++j) {
      CHECK(h <= bracket(Eigen::Vector2d(box(rng), box(rng))) + 1e-12);
    }
    const Controls star = optimal_u(0.0, ys, cost, harmonic);
    CHECK(h == doctest::Approx(bracket(Eigen::Vector2d(star.f, star.v))).epsilon(1e-12));
  }
}

TEST_CASE("sigma solve: zero instance and the tanh closed form") {
  TanhInstance inst;
  const QuadraticCost trivial = QuadraticCost::constant(kZero, kI, kZero, 1.0);
  const ValueFunction zero_vf = solve_sigma(trivial, inst.dyn, inst.grid);
  for (const auto& s : zero_vf.sigma) CHECK(s.norm() == 0.0);

  const ValueFunction vf = solve_sigma(inst.cost, inst.dyn, inst.grid);
  REQUIRE(static_cast<int>(vf.sigma.size()) == inst.grid.n_steps + 1);
  for (int k = 0; k <= inst.grid.n_steps; k += 100) {
    const double expected = std::tanh(1.0 - inst.grid.time(k));
    CHECK((vf.sigma[k] - expected * kI).norm() < 1e-8);
  }
  CHECK((vf.sigma.back() - kZero).norm() == 0.0);  // terminal condition exact
}

TEST_CASE("sigma stays symmetric positive semidefinite on random instances") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Matrix2d G, H, F;
    G << box(rng), box(rng), box(rng), box(rng);
    H << box(rng), box(rng), box(rng), box(rng);
    F << box(rng), box(rng), box(rng), box(rng);
    const Eigen::Matrix2d A = G * G.transpose();  // PSD
    const Eigen::Matrix2d R = H * H.transpose();  // PSD
    const QuadraticCost cost = QuadraticCost::constant(A, kI, R, 1.0);
    const LinearDynamics dyn = LinearDynamics::constant(F, swap_matrix());
    const ValueFunction vf = solve_sigma(cost, dyn, TimeGrid::with_step(0.0, 1.0, 1e-3));
    for (int k = 0; k <= vf.grid.n_steps; k += 50) {
      const Eigen::Matrix2d& s = vf.sigma[k];
      CHECK(std::abs(s(0, 1) - s(1, 0)) < 1e-14);
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
  }
}

TEST_CASE("strongly indefinite state cost escapes in finite time") {
  // F = 0, M = E = I, A = -25 I, R = 0: backward flow sigma' = -(sigma^2+25)
  // has the scalar solution -5 tan(5 s), s = T - t, with a pole at
  // s = pi/10, i.e. t = 1 - pi/10 ~ 0.686.
  const QuadraticCost cost = QuadraticCost::constant(-25.0 * kI, kI, kZero, 1.0);
  const LinearDynamics dyn = LinearDynamics::constant(kZero, kI);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-4);
  CHECK_THROWS_AS(solve_sigma(cost, dyn, grid), RiccatiBlowupError);
  try {
    solve_sigma(cost, dyn, grid);
  } catch (const RiccatiBlowupError& e) {
    CHECK(e.time > 0.5);
    CHECK(e.time < 0.8);
  }
}

TEST_CASE("offset solve: zero kernels and the log-cosh closed form") {
  TanhInstance inst;
  const ValueFunction vf = solve_sigma(inst.cost, inst.dyn, inst.grid);

  const ValueFunction zero_k = solve_a(DiffusionMatrixK{kZero}, vf, inst.grid);
  for (double a : zero_k.a) CHECK(a == 0.0);

  const ValueFunction with_a = solve_a(DiffusionMatrixK{kI}, vf, inst.grid);
  for (int k = 0; k <= inst.grid.n_steps; k += 100) {
    const double expected = 2.0 * std::log(std::cosh(1.0 - inst.grid.time(k)));
    CHECK(std::abs(with_a.a[k] - expected) < 1e-6);
  }
  CHECK(with_a.a.back() == 0.0);

  // a is nonnegative and nonincreasing toward the horizon.
  for (int k = 0; k < inst.grid.n_steps; ++k) {
    CHECK(with_a.a[k] >= with_a.a[k + 1]);
  }
  CHECK(with_a.a.front() >= 0.0);

  const TimeGrid other = TimeGrid::with_step(0.0, 1.0, 2e-3);
  CHECK_THROWS_AS(solve_a(DiffusionMatrixK{kI}, vf, other), std::invalid_argument);
}

TEST_CASE("value evaluation: offsets, terminal condition, evenness, interpolation") {
  TanhInstance inst;
  ValueFunction vf = solve_sigma(inst.cost, inst.dyn, inst.grid);
  vf = solve_a(DiffusionMatrixK{kI}, vf, inst.grid);

  CHECK(vf.value(0.3, Eigen::Vector2d::Zero()) == doctest::Approx(vf.a_at(0.3)).epsilon(1e-14));

  // t = T reproduces the terminal cost g(x) = x'Rx/2 = 0 here.
  const Eigen::Vector2d x(1.0, -2.0);
  CHECK(vf.value(1.0, x) == 0.0);

  CHECK(vf.value(0.4, x) == doctest::Approx(vf.value(0.4, -x)).epsilon(1e-14));

  // Linear interpolation halfway between nodes.
  const double t_mid = inst.grid.time(500) + 0.5 * inst.grid.dt;
  const double left = vf.value(inst.grid.time(500), x);
  const double right = vf.value(inst.grid.time(501), x);
  CHECK(vf.value(t_mid, x) == doctest::Approx(0.5 * (left + right)).epsilon(1e-12));
}

TEST_CASE("value evaluation outside the grid range is an error") {
  TanhInstance inst;
  const ValueFunction vf = solve_sigma(inst.cost, inst.dyn, inst.grid);
  const Eigen::Vector2d x(1.0, 0.0);
  CHECK_THROWS_AS(vf.value(-0.1, x), std::invalid_argument);
  CHECK_THROWS_AS(vf.value(1.1, x), std::invalid_argument);
  CHECK_THROWS_AS(vf.sigma_at(2.0), std::invalid_argument);
  CHECK_THROWS_AS(vf.a_at(-1.0), std::invalid_argument);
  CHECK_NOTHROW(vf.value(0.0, x));
  CHECK_NOTHROW(vf.value(1.0, x));
}

TEST_CASE("tuned instance: identity sigma is stationary and values are exact") {
  // F + F' = 0 for the tuned oscillator, so with A = E = R = I the matrix
  // Riccati flow is stationary at Sigma = I; K = I/2 at eta_inf = 2 makes
  // a(t) = (T - t) tr(K I)/2 = (T - t)/2.
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-3);
  const ValueFunction vf = build_value_function(kTuned, cost, dyn, grid);
  for (int k = 0; k <= grid.n_steps; k += 100) {
    CHECK((vf.sigma[k] - kI).norm() < 1e-12);
  }
  CHECK(vf.a.front() == doctest::Approx(0.5).epsilon(1e-10));
  const Eigen::Vector2d x0(1.0, -0.5);
  CHECK(vf.value(0.0, x0) == doctest::Approx(1.125).epsilon(1e-10));
}

TEST_CASE("hjb residual vanishes on the exact solution") {
  TanhInstance inst;
  ValueFunction vf = solve_sigma(inst.cost, inst.dyn, inst.grid);
  const DiffusionMatrixK K{kI};
  vf = solve_a(DiffusionMatrixK{0.5 * K.matrix}, vf, inst.grid);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::uniform_real_distribution<double> tdraw(inst.grid.time(2), inst.grid.time(998));
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector2d x(box(rng), box(rng));
    const double t = tdraw(rng);
    const double s = vf.value(t, x);
    CHECK(std::abs(hjb_residual(t, x, vf, inst.cost, inst.dyn, K)) <=
          1e-6 * (1.0 + std::abs(s)));
  }

  // x = 0 restates the a-equation: da/dt + tr(K Sigma)/2 = 0. The a nodes
  // come from a composite trapezoid, so the differentiated error is O(h^2).
  CHECK(std::abs(hjb_residual(0.4, Eigen::Vector2d::Zero(), vf, inst.cost, inst.dyn, K)) < 1e-6);
}

TEST_CASE("hjb residual grows linearly in a sigma perturbation") {
  TanhInstance inst;
  const ValueFunction vf = solve_sigma(inst.cost, inst.dyn, inst.grid);
  const DiffusionMatrixK K{kZero};

  auto perturbed_residual = [&](double eps) {
    ValueFunction pert = vf;
    for (auto& s : pert.sigma) s *= (1.0 + eps);
    return hjb_residual(0.37, Eigen::Vector2d(1.0, 1.0), pert, inst.cost, inst.dyn, K);
  };
  const double base = std::abs(perturbed_residual(0.0));
  const double r1 = perturbed_residual(1e-3) - perturbed_residual(0.0);
  const double r2 = perturbed_residual(2e-3) - perturbed_residual(0.0);
  CHECK(base < 1e-9);
  CHECK(std::abs(r1) > 1e-6);  // the perturbation is visible
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("hjb residual rejects out-of-range times and short grids") {
  TanhInstance inst;
  const ValueFunction vf = solve_sigma(inst.cost, inst.dyn, inst.grid);
  const DiffusionMatrixK K{kI};
  CHECK_THROWS_AS(hjb_residual(1.5, Eigen::Vector2d(1.0, 0.0), vf, inst.cost, inst.dyn, K),
                  std::invalid_argument);
  ValueFunction tiny = vf;
  tiny.grid = TimeGrid::span(0.0, 1.0, 2);
  tiny.sigma.assign(3, kI);
  tiny.a.assign(3, 0.0);
  CHECK_THROWS_AS(hjb_residual(0.5, Eigen::Vector2d(1.0, 0.0), tiny, inst.cost, inst.dyn, K),
                  std::invalid_argument);
}

TEST_CASE("feedback policy applies -E^{-1} M' Sigma x with optional gain") {
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-3);
  const ValueFunction vf = build_value_function(kTuned, cost, dyn, grid);

  const ExtendedCoherentState state{1.0, -0.5, 2.0, 0.0};
  const Controls u = lqg_policy(vf, cost, dyn)(0.0, state);
  CHECK(u.f == doctest::Approx(0.5).epsilon(1e-10));   // -(M' I x)_1 = -p
  CHECK(u.v == doctest::Approx(-1.0).epsilon(1e-10));  // -q

  const Controls u2 = lqg_policy(vf, cost, dyn, 2.0)(0.0, state);
  CHECK(u2.f == doctest::Approx(2.0 * u.f).epsilon(1e-10));
  CHECK(u2.v == doctest::Approx(2.0 * u.v).epsilon(1e-10));
}

TEST_CASE("closed loop: free cost gives zero, deterministic run matches LQR") {
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-3);
  const ExtendedCoherentState state0{1.0, -0.5, 2.0, 0.0};

  const QuadraticCost free_cost = QuadraticCost::constant(kZero, kI, kZero, 1.0);
  const ValueFunction free_vf = build_value_function(kTuned, free_cost, dyn, grid);
  const NoisePath noise = make_noise_path(5, 1e-3, 1000);
  const ClosedLoopResult free_run =
      closed_loop_run(state0, kTuned, free_cost, dyn, free_vf, noise);
  CHECK(free_run.realized_cost == 0.0);

  // Zero increments: the realized cost is the deterministic LQR cost
  // x0' Sigma(0) x0 / 2 = 0.625 up to the O(dt) rectangle-rule error.
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const ValueFunction vf = build_value_function(kTuned, cost, dyn, grid);
  const ClosedLoopResult det =
      closed_loop_run(state0, kTuned, cost, dyn, vf, zero_noise(1e-3, 1000));
  CHECK(std::abs(det.realized_cost - 0.625) < 0.01);
  CHECK(det.realized_cost >= 0.0);
  REQUIRE(det.trajectory.states.size() == 1001);
}

TEST_CASE("closed loop enforces the relaxed covariance unless overridden") {
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-3);
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const ValueFunction vf = build_value_function(kTuned, cost, dyn, grid);
  const NoisePath noise = make_noise_path(5, 1e-3, 1000);

  const ExtendedCoherentState transient{1.0, -0.5, 1.0, 0.0};  // eta != 2
  CHECK_THROWS_AS(closed_loop_run(transient, kTuned, cost, dyn, vf, noise),
                  std::invalid_argument);
  CHECK_NOTHROW(closed_loop_run(transient, kTuned, cost, dyn, vf, noise, true));

  const ExtendedCoherentState relaxed{1.0, -0.5, 2.0, 0.0};
  const NoisePath short_noise = make_noise_path(5, 1e-3, 500);  // spans only half
  CHECK_THROWS_AS(closed_loop_run(relaxed, kTuned, cost, dyn, vf, short_noise),
                  std::invalid_argument);
}

TEST_CASE("monte carlo: free cost is exactly zero and workers do not matter") {
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-2);
  const ExtendedCoherentState state0{1.0, -0.5, 2.0, 0.0};

  const QuadraticCost free_cost = QuadraticCost::constant(kZero, kI, kZero, 1.0);
  const ValueFunction free_vf = build_value_function(kTuned, free_cost, dyn, grid);
  MonteCarloOptions opts;
  opts.n_traj = 16;
  opts.dt = 1e-2;
  opts.master_seed = 77;
  const MonteCarloResult zero = monte_carlo_value(state0, kTuned, free_cost, dyn, free_vf, opts);
  CHECK(zero.mean_cost == 0.0);
  CHECK(zero.std_error == 0.0);

  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const ValueFunction vf = build_value_function(kTuned, cost, dyn, grid);
  const MonteCarloResult serial = monte_carlo_value(state0, kTuned, cost, dyn, vf, opts);
  MonteCarloOptions par = opts;
  par.workers = 4;
  const MonteCarloResult parallel = monte_carlo_value(state0, kTuned, cost, dyn, vf, par);
  CHECK(serial.mean_cost == parallel.mean_cost);  // bit-identical reduction
  CHECK(serial.std_error == parallel.std_error);
  REQUIRE(serial.cost.size() == parallel.cost.size());
  for (std::size_t i = 0; i < serial.cost.size(); ++i) {
    CHECK(serial.cost[i] == parallel.cost[i]);
  }
}

TEST_CASE("monte carlo mean approaches the value function") {
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-3);
  const ValueFunction vf = build_value_function(kTuned, cost, dyn, grid);
  const ExtendedCoherentState state0{1.0, -0.5, 2.0, 0.0};

  MonteCarloOptions opts;
  opts.n_traj = 500;
  opts.dt = 2e-3;
  opts.master_seed = 7;
  opts.workers = 4;
  const MonteCarloResult mc = monte_carlo_value(state0, kTuned, cost, dyn, vf, opts);
  const double value = vf.value(0.0, Eigen::Vector2d(1.0, -0.5));
  CHECK(value == doctest::Approx(1.125).epsilon(1e-10));
  // 5-sigma statistical band plus a discretization-bias allowance.
  CHECK(std::abs(mc.mean_cost - value) < 5.0 * mc.std_error + 0.05);

  // A detuned gain must not beat the optimal policy beyond noise.
  MonteCarloOptions detuned = opts;
  detuned.gain_scale = 1.5;
  const MonteCarloResult worse = monte_carlo_value(state0, kTuned, cost, dyn, vf, detuned);
  const double band = 3.0 * std::sqrt(mc.std_error * mc.std_error +
                                      worse.std_error * worse.std_error);
  CHECK(worse.mean_cost >= mc.mean_cost - band);
}

TEST_CASE("monte carlo input validation") {
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  const TimeGrid grid = TimeGrid::with_step(0.0, 1.0, 1e-2);
  const ValueFunction vf = build_value_function(kTuned, cost, dyn, grid);
  const ExtendedCoherentState state0{1.0, -0.5, 2.0, 0.0};

  MonteCarloOptions opts;
  opts.dt = 1e-2;
  opts.n_traj = 1;
  CHECK_THROWS_AS(monte_carlo_value(state0, kTuned, cost, dyn, vf, opts), std::invalid_argument);
  opts.n_traj = 4;
  opts.workers = 0;
  CHECK_THROWS_AS(monte_carlo_value(state0, kTuned, cost, dyn, vf, opts), std::invalid_argument);
  opts.workers = 1;
  opts.dt = 0.0;
  CHECK_THROWS_AS(monte_carlo_value(state0, kTuned, cost, dyn, vf, opts), std::invalid_argument);
  opts.dt = 1e-2;
  const ExtendedCoherentState transient{1.0, -0.5, 1.0, 0.0};
  CHECK_THROWS_AS(monte_carlo_value(transient, kTuned, cost, dyn, vf, opts),
                  std::invalid_argument);
}

TEST_CASE("cost and grid preconditions") {
  CHECK_THROWS_AS(QuadraticCost::constant(kI, kI, kI, 0.0), std::invalid_argument);
  const QuadraticCost cost = QuadraticCost::constant(kI, kI, kI, 1.0);
  const LinearDynamics dyn = LinearDynamics::from_params(kTuned);
  // Horizon mismatch between the grid and the cost.
  CHECK_THROWS_AS(solve_sigma(cost, dyn, TimeGrid::with_step(0.0, 2.0, 1e-3)),
                  std::invalid_argument);
}
