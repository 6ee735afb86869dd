#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qfc/ecs.hpp"

namespace qfc {

/// Uniform periodic position grid x_j = x_min + j dx, j = 0..n_points-1,
/// dx = (x_max - x_min) / n_points. n_points must be a power of two, at
/// least 256.
struct GridSpec {
  GridSpec(double x_min, double x_max, int n_points);

  double x_min;
  double x_max;
  int n_points;

  double length() const { return x_max - x_min; }
  double dx() const { return length() / n_points; }
  double point(int j) const { return x_min + j * dx(); }

  /// Spatial frequency of DFT bin l, with negative frequencies in the upper
  /// half: k_l = 2 pi l / (n dx) for l < n/2, else 2 pi (l - n) / (n dx).
  double wavenumber(int l) const;

  /// Largest representable |k| (the Nyquist frequency pi / dx).
  double k_max() const;

  Eigen::VectorXd points() const;
  Eigen::VectorXd wavenumbers() const;

  bool operator==(const GridSpec&) const = default;
};

/// Wavefunction samples psi(x_j) on a grid; inner products use the
/// rectangle rule with weight dx.
struct GridWavefunction {
  GridSpec grid;
  Eigen::VectorXcd amplitudes;

  double norm() const;
  void normalize();

  /// max(|psi[0]|, |psi[n-1]|); the anti-aliasing guard watches this.
  double boundary_amplitude() const;
};

/// Samples the extended-coherent-state wavefunction on the grid. Throws
/// GridCoverageError unless the grid covers q_bar +- 8 position standard
/// deviations and the Nyquist range covers p_bar/hbar +- 8 momentum standard
/// deviations (in wavenumber units).
GridWavefunction sample_wavefunction(const ExtendedCoherentState& state, double hbar,
                                     const GridSpec& grid);

struct GridMoments {
  double q_mean;
  double p_mean;
  double c_qq;
  double c_qp;
  double c_pp;
};

/// First and second moments of position and momentum. Position moments use
/// real-space quadrature; momentum moments use the |FFT|^2 distribution over
/// wavenumbers, and the cross term Re<psi| x p |psi> - q_mean p_mean comes
/// from one spectral derivative. Throws AliasingError when the boundary
/// amplitude exceeds 1e-6 (relative to unit norm).
GridMoments moments(const GridWavefunction& psi, double hbar);

/// <exp(i r x + i s p)> by quadrature, using the factorization
/// exp(i r x + i s p) = exp(i r s hbar / 2) exp(i r x) exp(i s p) and a
/// spectral translation for the momentum factor. Throws GridCoverageError
/// when the shift |s| hbar exceeds a quarter of the grid length (periodic
/// wrap-around would alias the result).
std::complex<double> weyl_expectation(const GridWavefunction& psi, double hbar, double r,
                                      double s);

/// |<a|b>| dx-weighted, normalized by both norms; grids must match.
double fidelity(const GridWavefunction& a, const GridWavefunction& b);

}  // namespace qfc
