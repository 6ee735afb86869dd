#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <ostream>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "qfc/filter.hpp"
#include "qfc/grid.hpp"
#include "qfc/noise.hpp"
#include "qfc/params.hpp"

namespace qfc {

/// Grid integrator for the stochastic Schroedinger equation
///   d psi = [ -(i/hbar) H - (kappa/4)(x - <q>)^2 - (kappa_tilde/4)(p - <p>)^2 ] psi dt
///           + sqrt(kappa/2)   (x - <q>) psi dW
///           + sqrt(kappa_tilde/2) (p - <p>) psi dW_tilde,
/// with H = p^2/2m + (hbar mu/2) x^2 - f x + v p, followed by
/// renormalization. The Hamiltonian factors are applied as exact split-step
/// phases (x-space then k-space); the measurement damping and the stochastic
/// terms are first-order Euler factors with operators frozen at the step
/// start.
class SseIntegrator {
 public:
  SseIntegrator(const GridSpec& grid, const PhysicalParams& params);

  /// Advances psi in place by one step. Throws NumericalError when the
  /// momentum damping factor is unstable at the grid edge (reduce dt or
  /// enlarge the grid), NormCollapseError when the pre-normalization norm
  /// falls below 0.5. dt = 0 with zero increments leaves psi unchanged (up
  /// to FFT round-off).
  void step(GridWavefunction& psi, const Controls& u, double dW, double dW_tilde, double dt);

  /// Expectations <q> and <p> of the current amplitudes, as used internally
  /// by step().
  std::pair<double, double> mean_position_momentum(const GridWavefunction& psi);

  const GridSpec& grid() const { return grid_; }

 private:
  void refresh_phase_cache(const Controls& u, double dt);

  GridSpec grid_;
  PhysicalParams params_;
  Eigen::VectorXd x_;
  Eigen::VectorXd k_;
  Eigen::FFT<double> fft_;

  // Unitary phase factors, rebuilt only when (dt, f, v) changes.
  double cached_dt_ = -1.0;
  Controls cached_u_{};
  bool cache_valid_ = false;
  Eigen::VectorXcd phase_x_;
  Eigen::VectorXcd phase_k_;

  // Scratch buffers to keep the hot loop allocation-free.
  Eigen::VectorXcd spectrum_;
  Eigen::VectorXcd deriv_;
  Eigen::VectorXcd stoch_q_;
  Eigen::VectorXcd stoch_p_;
};

/// Convenience wrapper: one step on a copy, with a freshly constructed
/// integrator.
GridWavefunction sse_step(const GridWavefunction& psi, const PhysicalParams& params,
                          const Controls& u, double dW, double dW_tilde, double dt);

/// Per-node moment series recorded during a comparison run.
struct MomentSeries {
  std::vector<double> t;
  std::vector<double> q_mean, p_mean, c_qq, c_qp, c_pp;
};

struct OracleOptions {
  int moment_stride = 1;    // record moments every this many steps
  int fidelity_stride = 1;  // evaluate the overlap every this many steps
  bool keep_series = true;  // retain the per-node series in the report
};

/// Side-by-side result of driving the grid integrator and the closed-form
/// filter with the same noise and the same control sequence.
struct ComparisonReport {
  PhysicalParams params;
  GridSpec grid;
  std::uint64_t seed = 0;
  double dt = 0.0;
  int n_steps = 0;

  double min_fidelity = 0.0;
  double final_fidelity = 0.0;

  // Per-moment sup-norm deviations between grid and filter series, and the
  // scale each one is normalized by (sup of the filter-side magnitude, with
  // variance-based floors for the mean and cross moments).
  GridMoments max_abs_deviation{};
  GridMoments deviation_scale{};
  GridMoments rel_deviation{};
  double max_rel_deviation = 0.0;

  MomentSeries grid_series;
  MomentSeries filter_series;
  std::vector<double> fidelity_t;
  std::vector<double> fidelity_series;
};

/// Runs the filter first (it is cheap), then replays the identical controls
/// u_k = policy(t_k, filter_state_k) into the grid integrator, so both
/// solvers see the same closed-loop control sequence. The wavefunction
/// must stay covered by the grid for the whole horizon; size the window for
/// the expected excursion (about 10 standard deviations plus drift) or the
/// aliasing guard aborts the run.
ComparisonReport run_oracle_comparison(const ExtendedCoherentState& state0,
                                       const PhysicalParams& params, const ControlPolicy& policy,
                                       const NoisePath& noise, const GridSpec& grid,
                                       const OracleOptions& opts = {});

/// Columns: t, then filter and grid moments side by side, then fidelity
/// (blank when not sampled at that node).
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace qfc
