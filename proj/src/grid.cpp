#include "qfc/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unsupported/Eigen/FFT>

#include "qfc/errors.hpp"

namespace qfc {

namespace {

constexpr double kBoundaryGuard = 1e-6;  // relative amplitude allowed at the edges
constexpr double kCoverageSigmas = 8.0;  // half-width required around the state

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Eigen::FFT<double>& fft() {
  // One plan cache per thread; Eigen's FFT object is not thread-safe.
  thread_local Eigen::FFT<double> f;
  return f;
}

}  // namespace

GridSpec::GridSpec(double x_min_, double x_max_, int n_points_)
    : x_min(x_min_), x_max(x_max_), n_points(n_points_) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw std::invalid_argument("grid requires finite x_min < x_max");
  }
  if (n_points < 256 || !is_power_of_two(n_points)) {
    throw std::invalid_argument("grid size must be a power of two, at least 256");
  }
}

double GridSpec::wavenumber(int l) const {
  const double base = 2.0 * std::numbers::pi / length();
  return (l < n_points / 2) ? base * l : base * (l - n_points);
}

double GridSpec::k_max() const { return std::numbers::pi / dx(); }

Eigen::VectorXd GridSpec::points() const {
  Eigen::VectorXd x(n_points);
  for (int j = 0; j < n_points; ++j) x(j) = point(j);
  return x;
}

Eigen::VectorXd GridSpec::wavenumbers() const {
  Eigen::VectorXd k(n_points);
  for (int l = 0; l < n_points; ++l) k(l) = wavenumber(l);
  return k;
}

double GridWavefunction::norm() const {
  return std::sqrt(amplitudes.squaredNorm() * grid.dx());
}

void GridWavefunction::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw NormCollapseError("cannot normalize a zero or non-finite wavefunction");
  }
  amplitudes /= n;
}

double GridWavefunction::boundary_amplitude() const {
  return std::max(std::abs(amplitudes(0)), std::abs(amplitudes(amplitudes.size() - 1)));
}

GridWavefunction sample_wavefunction(const ExtendedCoherentState& state, double hbar,
                                     const GridSpec& grid) {
  require_valid(state);
  if (!(hbar > 0.0)) {
    throw std::invalid_argument("sample_wavefunction requires hbar > 0");
  }

  const auto cov = covariances(state, hbar);
  const double sigma_q = std::sqrt(cov.c_qq);
  if (state.q_bar - kCoverageSigmas * sigma_q < grid.x_min ||
      state.q_bar + kCoverageSigmas * sigma_q > grid.x_max) {
    throw GridCoverageError("grid [" + std::to_string(grid.x_min) + ", " +
                            std::to_string(grid.x_max) + "] does not cover q_bar = " +
                            std::to_string(state.q_bar) + " to 8 standard deviations");
  }
  const double sigma_k = std::sqrt(cov.c_pp) / hbar;
  if (std::abs(state.p_bar) / hbar + kCoverageSigmas * sigma_k > grid.k_max()) {
    throw GridCoverageError(
        "grid resolution too coarse: momentum support of the state exceeds the Nyquist "
        "frequency " +
        std::to_string(grid.k_max()));
  }

  GridWavefunction psi{grid, Eigen::VectorXcd(grid.n_points)};
  const double amp = std::pow(state.eta_re / (2.0 * std::numbers::pi), 0.25);
  const std::complex<double> quarter_eta = 0.25 * state.eta();
  for (int j = 0; j < grid.n_points; ++j) {
    const double x = grid.point(j);
    const double dq = x - state.q_bar;
    const std::complex<double> exponent =
        -quarter_eta * dq * dq + std::complex<double>(0.0, state.p_bar * x / hbar);
    psi.amplitudes(j) = amp * std::exp(exponent);
  }
  return psi;
}

GridMoments moments(const GridWavefunction& psi, double hbar) {
  const auto& g = psi.grid;
  const int n = g.n_points;
  if (psi.amplitudes.size() != n) {
    throw std::invalid_argument("wavefunction sample count does not match its grid");
  }
  const double dx = g.dx();

  const Eigen::VectorXd prob = psi.amplitudes.cwiseAbs2();
  const double mass = prob.sum() * dx;
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw NormCollapseError("moments of a zero or non-finite wavefunction");
  }
  if (psi.boundary_amplitude() / std::sqrt(mass) > kBoundaryGuard) {
    throw AliasingError("probability mass reached the position-grid boundary; enlarge the "
                        "window or shorten the horizon");
  }

  GridMoments m{};
  double q1 = 0.0, q2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = g.point(j);
    q1 += prob(j) * x;
    q2 += prob(j) * x * x;
  }
  q1 *= dx / mass;
  q2 *= dx / mass;
  m.q_mean = q1;
  m.c_qq = q2 - q1 * q1;

  Eigen::VectorXcd spectrum;
  fft().fwd(spectrum, psi.amplitudes);
  const Eigen::VectorXd spec_prob = spectrum.cwiseAbs2();
  const double spec_mass = spec_prob.sum();
  const double nyquist_amp = std::sqrt(spec_prob(n / 2) / spec_mass);
  if (nyquist_amp > kBoundaryGuard) {
    throw AliasingError("momentum density reached the Nyquist frequency; refine the grid");
  }
  double p1 = 0.0, p2 = 0.0;
  for (int l = 0; l < n; ++l) {
    const double p = hbar * g.wavenumber(l);
    p1 += spec_prob(l) * p;
    p2 += spec_prob(l) * p * p;
  }
  p1 /= spec_mass;
  p2 /= spec_mass;
  m.p_mean = p1;
  m.c_pp = p2 - p1 * p1;

  // Cross moment from one spectral derivative: C_qp = Re<x p> - <x><p>.
  Eigen::VectorXcd dspec = spectrum;
  for (int l = 0; l < n; ++l) dspec(l) *= hbar * g.wavenumber(l);
  Eigen::VectorXcd p_psi;
  fft().inv(p_psi, dspec);
  std::complex<double> xp(0.0, 0.0);
  for (int j = 0; j < n; ++j) {
    xp += std::conj(psi.amplitudes(j)) * g.point(j) * p_psi(j);
  }
  xp *= dx / mass;
  m.c_qp = xp.real() - m.q_mean * m.p_mean;
  return m;
}

std::complex<double> weyl_expectation(const GridWavefunction& psi, double hbar, double r,
                                      double s) {
  const auto& g = psi.grid;
  const int n = g.n_points;
  if (psi.amplitudes.size() != n) {
    throw std::invalid_argument("wavefunction sample count does not match its grid");
  }
  const double shift = s * hbar;
  if (std::abs(shift) > 0.25 * g.length()) {
    throw GridCoverageError("Weyl displacement s hbar exceeds a quarter of the grid length; "
                            "the periodic translation would wrap");
  }

  // exp(i r x + i s p) = e^{i r s hbar/2} e^{i r x} e^{i s p}, and e^{i s p}
  // translates the wavefunction: psi(x) -> psi(x + s hbar).
  Eigen::VectorXcd spectrum;
  fft().fwd(spectrum, psi.amplitudes);
  for (int l = 0; l < n; ++l) {
    spectrum(l) *= std::exp(std::complex<double>(0.0, g.wavenumber(l) * shift));
  }
  Eigen::VectorXcd translated;
  fft().inv(translated, spectrum);

  std::complex<double> acc(0.0, 0.0);
  double mass = 0.0;
  for (int j = 0; j < n; ++j) {
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, r * g.point(j)));
    acc += std::conj(psi.amplitudes(j)) * phase * translated(j);
    mass += std::norm(psi.amplitudes(j));
  }
  acc /= mass;
  return std::exp(std::complex<double>(0.0, 0.5 * r * s * hbar)) * acc;
}

double fidelity(const GridWavefunction& a, const GridWavefunction& b) {
  if (!(a.grid == b.grid)) {
    throw std::invalid_argument("fidelity requires both wavefunctions on the same grid");
  }
  const std::complex<double> overlap = a.amplitudes.dot(b.amplitudes);  // conjugates a
  const double na = a.amplitudes.norm();
  const double nb = b.amplitudes.norm();
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw NormCollapseError("fidelity of a zero wavefunction");
  }
  return std::abs(overlap) / (na * nb);
}

}  // namespace qfc
