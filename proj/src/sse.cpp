#include "qfc/sse.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "qfc/errors.hpp"

namespace qfc {

namespace {

// Stability bound for the Euler measurement factor M = (1 - z) + sqrt(2z) Z
// at the grid edges, z = c (op - mean)^2 dt. The pathwise Lyapunov drift
// E ln|M| is about -2z for small z but crosses zero near z = 1.2, beyond
// which spectral-edge round-off noise random-walks up into the physical
// range; z <= 1 keeps the decay strong enough that edge junk stays pinned
// at the round-off floor for any seed.
constexpr double kDampingGuard = 1.0;
constexpr double kNormFloor = 0.5;  // pre-normalization norm abort level

}  // namespace

SseIntegrator::SseIntegrator(const GridSpec& grid, const PhysicalParams& params)
    : grid_(grid), params_(params), x_(grid.points()), k_(grid.wavenumbers()) {
  params_.validate();
  const int n = grid_.n_points;
  phase_x_.resize(n);
  phase_k_.resize(n);
  spectrum_.resize(n);
  deriv_.resize(n);
  stoch_q_.resize(n);
  stoch_p_.resize(n);
}

void SseIntegrator::refresh_phase_cache(const Controls& u, double dt) {
  if (cache_valid_ && dt == cached_dt_ && u.f == cached_u_.f && u.v == cached_u_.v) {
    return;
  }
  const double hbar = params_.hbar;
  for (int j = 0; j < grid_.n_points; ++j) {
    const double x = x_(j);
    const double potential = 0.5 * hbar * params_.mu * x * x - u.f * x;
    phase_x_(j) = std::exp(std::complex<double>(0.0, -potential * dt / hbar));
  }
  for (int l = 0; l < grid_.n_points; ++l) {
    const double p = hbar * k_(l);
    const double kinetic = p * p / (2.0 * params_.mass) + u.v * p;
    phase_k_(l) = std::exp(std::complex<double>(0.0, -kinetic * dt / hbar));
  }
  cached_dt_ = dt;
  cached_u_ = u;
  cache_valid_ = true;
}

std::pair<double, double> SseIntegrator::mean_position_momentum(const GridWavefunction& psi) {
  const int n = grid_.n_points;
  const double hbar = params_.hbar;
  double mass = 0.0, q1 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = std::norm(psi.amplitudes(j));
    mass += w;
    q1 += w * x_(j);
  }
  fft_.fwd(spectrum_, psi.amplitudes);
  double smass = 0.0, p1 = 0.0;
  for (int l = 0; l < n; ++l) {
    const double w = std::norm(spectrum_(l));
    smass += w;
    p1 += w * hbar * k_(l);
  }
  return {q1 / mass, p1 / smass};
}

void SseIntegrator::step(GridWavefunction& psi, const Controls& u, double dW, double dW_tilde,
                         double dt) {
  const int n = grid_.n_points;
  if (!(psi.grid == grid_)) {
    throw std::invalid_argument("wavefunction grid does not match the integrator grid");
  }
  if (psi.amplitudes.size() != n) {
    throw std::invalid_argument("wavefunction sample count does not match its grid");
  }
  if (dt < 0.0 || !std::isfinite(dt)) {
    throw std::invalid_argument("sse step requires dt >= 0");
  }
  const double hbar = params_.hbar;

  // Means at the step start; they enter the damping and the Ito terms.
  double mass = 0.0, q1 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = std::norm(psi.amplitudes(j));
    mass += w;
    q1 += w * x_(j);
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw NormCollapseError("sse step on a zero or non-finite wavefunction");
  }
  fft_.fwd(spectrum_, psi.amplitudes);
  double smass = 0.0, p1 = 0.0;
  for (int l = 0; l < n; ++l) {
    const double w = std::norm(spectrum_(l));
    smass += w;
    p1 += w * hbar * k_(l);
  }
  const double q_mean = q1 / mass;
  const double p_mean = p1 / smass;

  // Edge stability: see kDampingGuard above.
  const double x_reach = std::max(std::abs(grid_.x_min - q_mean), std::abs(grid_.x_max - q_mean));
  const double zx = 0.25 * params_.kappa * x_reach * x_reach * dt;
  const double p_reach = hbar * grid_.k_max() + std::abs(p_mean);
  const double zp = 0.25 * params_.kappa_tilde * p_reach * p_reach * dt;
  if (zx > kDampingGuard || zp > kDampingGuard) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "sse step unstable: edge measurement strength z = %.3g (position) / %.3g "
                  "(momentum) exceeds %.2g; reduce dt, widen the window, or coarsen the grid",
                  zx, zp, kDampingGuard);
    throw NumericalError(msg);
  }

  // Ito increment vectors, frozen at the step start.
  for (int j = 0; j < n; ++j) {
    stoch_q_(j) = (x_(j) - q_mean) * psi.amplitudes(j);
  }
  for (int l = 0; l < n; ++l) {
    deriv_(l) = (hbar * k_(l) - p_mean) * spectrum_(l);
  }
  fft_.inv(stoch_p_, deriv_);

  // Deterministic factor: exact x-space phase with Euler position damping,
  // then exact k-space phase with Euler momentum damping.
  refresh_phase_cache(u, dt);
  const double cq = 0.25 * params_.kappa * dt;
  for (int j = 0; j < n; ++j) {
    const double dq = x_(j) - q_mean;
    psi.amplitudes(j) *= phase_x_(j) * (1.0 - cq * dq * dq);
  }
  fft_.fwd(spectrum_, psi.amplitudes);
  const double cp = 0.25 * params_.kappa_tilde * dt;
  for (int l = 0; l < n; ++l) {
    const double dp = hbar * k_(l) - p_mean;
    spectrum_(l) *= phase_k_(l) * (1.0 - cp * dp * dp);
  }
  fft_.inv(psi.amplitudes, spectrum_);

  // Stochastic kicks, then renormalize (the SSE preserves norm only in the
  // dt -> 0 limit).
  const double gq = std::sqrt(0.5 * params_.kappa) * dW;
  const double gp = std::sqrt(0.5 * params_.kappa_tilde) * dW_tilde;
  psi.amplitudes += gq * stoch_q_ + gp * stoch_p_;

  const double norm = psi.norm();
  if (!(norm > kNormFloor) || !std::isfinite(norm)) {
    throw NormCollapseError("wavefunction norm collapsed to " + std::to_string(norm) +
                            " within one step; reduce dt");
  }
  psi.amplitudes /= norm;
}

GridWavefunction sse_step(const GridWavefunction& psi, const PhysicalParams& params,
                          const Controls& u, double dW, double dW_tilde, double dt) {
  SseIntegrator integrator(psi.grid, params);
  GridWavefunction out = psi;
  integrator.step(out, u, dW, dW_tilde, dt);
  return out;
}

ComparisonReport run_oracle_comparison(const ExtendedCoherentState& state0,
                                       const PhysicalParams& params, const ControlPolicy& policy,
                                       const NoisePath& noise, const GridSpec& grid,
                                       const OracleOptions& opts) {
  if (opts.moment_stride < 1 || opts.fidelity_stride < 1) {
    throw std::invalid_argument("oracle strides must be >= 1");
  }

  const FilterTrajectory filter = propagate_filter(state0, params, policy, noise);
  GridWavefunction psi = sample_wavefunction(state0, params.hbar, grid);
  SseIntegrator integrator(grid, params);

  ComparisonReport report{.params = params, .grid = grid};
  report.seed = noise.seed;
  report.dt = noise.dt;
  report.n_steps = noise.n_steps;
  report.min_fidelity = 1.0;

  // Normalizer scales: sup over the filter series, with variance floors for
  // the means and the cross moment so near-zero trajectories do not explode
  // the relative deviation.
  double sup_q = 0.0, sup_p = 0.0, sup_cqq = 0.0, sup_cpp = 0.0, sup_cqp = 0.0;
  GridMoments max_dev{};

  for (int k = 0; k <= noise.n_steps; ++k) {
    const double t = filter.times[k];
    const auto& fstate = filter.states[k];

    if (k % opts.moment_stride == 0 || k == noise.n_steps) {
      const GridMoments gm = moments(psi, params.hbar);
      const auto fc = covariances(fstate, params.hbar);

      sup_q = std::max(sup_q, std::abs(fstate.q_bar));
      sup_p = std::max(sup_p, std::abs(fstate.p_bar));
      sup_cqq = std::max(sup_cqq, fc.c_qq);
      sup_cpp = std::max(sup_cpp, fc.c_pp);
      sup_cqp = std::max(sup_cqp, std::abs(fc.c_qp));

      max_dev.q_mean = std::max(max_dev.q_mean, std::abs(gm.q_mean - fstate.q_bar));
      max_dev.p_mean = std::max(max_dev.p_mean, std::abs(gm.p_mean - fstate.p_bar));
      max_dev.c_qq = std::max(max_dev.c_qq, std::abs(gm.c_qq - fc.c_qq));
      max_dev.c_qp = std::max(max_dev.c_qp, std::abs(gm.c_qp - fc.c_qp));
      max_dev.c_pp = std::max(max_dev.c_pp, std::abs(gm.c_pp - fc.c_pp));

      if (opts.keep_series) {
        report.grid_series.t.push_back(t);
        report.grid_series.q_mean.push_back(gm.q_mean);
        report.grid_series.p_mean.push_back(gm.p_mean);
        report.grid_series.c_qq.push_back(gm.c_qq);
        report.grid_series.c_qp.push_back(gm.c_qp);
        report.grid_series.c_pp.push_back(gm.c_pp);
        report.filter_series.t.push_back(t);
        report.filter_series.q_mean.push_back(fstate.q_bar);
        report.filter_series.p_mean.push_back(fstate.p_bar);
        report.filter_series.c_qq.push_back(fc.c_qq);
        report.filter_series.c_qp.push_back(fc.c_qp);
        report.filter_series.c_pp.push_back(fc.c_pp);
      }
    }

    if (k % opts.fidelity_stride == 0 || k == noise.n_steps) {
      const GridWavefunction reference = sample_wavefunction(fstate, params.hbar, grid);
      const double fid = fidelity(psi, reference);
      report.min_fidelity = std::min(report.min_fidelity, fid);
      if (k == noise.n_steps) report.final_fidelity = fid;
      if (opts.keep_series) {
        report.fidelity_t.push_back(t);
        report.fidelity_series.push_back(fid);
      }
    }

    if (k < noise.n_steps) {
      const Controls u = policy(t, fstate);  // identical controls on both solvers
      integrator.step(psi, u, noise.dW[k], noise.dW_tilde[k], noise.dt);
    }
  }

  report.max_abs_deviation = max_dev;
  report.deviation_scale.q_mean = std::max(sup_q, std::sqrt(sup_cqq));
  report.deviation_scale.p_mean = std::max(sup_p, std::sqrt(sup_cpp));
  report.deviation_scale.c_qq = sup_cqq;
  report.deviation_scale.c_pp = sup_cpp;
  report.deviation_scale.c_qp = std::max(sup_cqp, std::sqrt(sup_cqq * sup_cpp));

  auto rel = [](double dev, double scale) { return scale > 0.0 ? dev / scale : 0.0; };
  report.rel_deviation.q_mean = rel(max_dev.q_mean, report.deviation_scale.q_mean);
  report.rel_deviation.p_mean = rel(max_dev.p_mean, report.deviation_scale.p_mean);
  report.rel_deviation.c_qq = rel(max_dev.c_qq, report.deviation_scale.c_qq);
  report.rel_deviation.c_qp = rel(max_dev.c_qp, report.deviation_scale.c_qp);
  report.rel_deviation.c_pp = rel(max_dev.c_pp, report.deviation_scale.c_pp);
  report.max_rel_deviation =
      std::max({report.rel_deviation.q_mean, report.rel_deviation.p_mean,
                report.rel_deviation.c_qq, report.rel_deviation.c_qp,
                report.rel_deviation.c_pp});
  return report;
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  out << "t,q_bar_filter,p_bar_filter,c_qq_filter,c_qp_filter,c_pp_filter,"
         "q_mean_grid,p_mean_grid,c_qq_grid,c_qp_grid,c_pp_grid,fidelity\n";
  const auto& f = report.filter_series;
  const auto& g = report.grid_series;
  std::size_t fi = 0;
  char line[512];
  for (std::size_t i = 0; i < f.t.size(); ++i) {
    std::snprintf(line, sizeof line,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  f.t[i], f.q_mean[i], f.p_mean[i], f.c_qq[i], f.c_qp[i], f.c_pp[i],
                  g.q_mean[i], g.p_mean[i], g.c_qq[i], g.c_qp[i], g.c_pp[i]);
    out << line;
    while (fi < report.fidelity_t.size() && report.fidelity_t[fi] < f.t[i] - 1e-12) ++fi;
    if (fi < report.fidelity_t.size() && std::abs(report.fidelity_t[fi] - f.t[i]) <= 1e-12) {
      std::snprintf(line, sizeof line, ",%.17g", report.fidelity_series[fi]);
      out << line;
    } else {
      out << ",";
    }
    out << "\n";
  }
}

}  // namespace qfc
