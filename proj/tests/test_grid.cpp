// Position-grid wavefunction machinery: sampling a Gaussian state, moment
// quadrature against the closed-form covariances, the Weyl expectation
// against the analytic characteristic function, fidelity, and the coverage
// and aliasing guards.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qfc/ecs.hpp"
#include "qfc/errors.hpp"
#include "qfc/grid.hpp"

using namespace qfc;

namespace {

const GridSpec kWide(-20.0, 20.0, 1024);

ExtendedCoherentState tilted_state() {
  return {0.7, -0.4, 1.2, 0.8};
}

}  // namespace

TEST_CASE("grid spec geometry and validation") {
  const GridSpec g(-8.0, 8.0, 512);
  CHECK(g.dx() == doctest::Approx(16.0 / 512).epsilon(1e-15));
  CHECK(g.point(0) == -8.0);
  CHECK(g.point(256) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.k_max() == doctest::Approx(std::numbers::pi / g.dx()).epsilon(1e-15));

  CHECK_THROWS_AS(GridSpec(-1.0, 1.0, 300), std::invalid_argument);   // not a power of two
  CHECK_THROWS_AS(GridSpec(-1.0, 1.0, 128), std::invalid_argument);   // too small
  CHECK_THROWS_AS(GridSpec(1.0, -1.0, 512), std::invalid_argument);   // inverted
  CHECK_THROWS_AS(GridSpec(-1.0, -1.0, 512), std::invalid_argument);  // empty
}

TEST_CASE("wavenumbers follow the DFT layout with negative upper half") {
  const GridSpec g(-10.0, 10.0, 256);
  CHECK(g.wavenumber(0) == 0.0);
  const double base = 2.0 * std::numbers::pi / g.length();
  CHECK(g.wavenumber(1) == doctest::Approx(base).epsilon(1e-14));
  CHECK(g.wavenumber(128) == doctest::Approx(-g.k_max()).epsilon(1e-14));
  CHECK(g.wavenumber(255) == doctest::Approx(-base).epsilon(1e-14));
  const Eigen::VectorXd ks = g.wavenumbers();
  REQUIRE(ks.size() == 256);
  CHECK(ks(3) == g.wavenumber(3));
}

TEST_CASE("sampled state is normalized to rectangle-rule unit norm") {
  const GridWavefunction psi = sample_wavefunction(tilted_state(), 1.0, kWide);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(psi.boundary_amplitude() < 1e-12);
}

TEST_CASE("grid moments reproduce the analytic covariances") {
  const ExtendedCoherentState s = tilted_state();
  for (double hbar : {1.0, 0.5}) {
    const GridWavefunction psi = sample_wavefunction(s, hbar, kWide);
    const GridMoments m = moments(psi, hbar);
    const auto c = covariances(s, hbar);
    CHECK(m.q_mean == doctest::Approx(s.q_bar).epsilon(1e-8));
    CHECK(m.p_mean == doctest::Approx(s.p_bar).epsilon(1e-8));
    CHECK(m.c_qq == doctest::Approx(c.c_qq).epsilon(1e-8));
    CHECK(m.c_qp == doctest::Approx(c.c_qp).epsilon(1e-8));
    CHECK(m.c_pp == doctest::Approx(c.c_pp).epsilon(1e-8));
  }
}

TEST_CASE("quadrature moments satisfy the minimum-uncertainty identity") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> re(0.4, 4.0);
  std::uniform_real_distribution<double> im(-2.0, 2.0);
  std::uniform_real_distribution<double> mean(-2.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    const ExtendedCoherentState s{mean(rng), mean(rng), re(rng), im(rng)};
    const GridWavefunction psi = sample_wavefunction(s, 1.0, kWide);
    const GridMoments m = moments(psi, 1.0);
    CHECK(m.c_qq * m.c_pp - m.c_qp * m.c_qp == doctest::Approx(0.25).epsilon(1e-8));
  }
}

TEST_CASE("weyl expectation matches the analytic characteristic function") {
  const ExtendedCoherentState s = tilted_state();
  const GridWavefunction psi = sample_wavefunction(s, 1.0, kWide);
  for (double r : {0.0, 0.8, -1.5}) {
    for (double v : {0.0, 0.6, -1.1}) {
      const auto grid_val = weyl_expectation(psi, 1.0, r, v);
      const auto exact = characteristic_fn(s, 1.0, r, v);
      CHECK(std::abs(grid_val - exact) < 1e-8);
    }
  }
}

TEST_CASE("weyl expectation at the origin is exactly the norm") {
  const GridWavefunction psi = sample_wavefunction(tilted_state(), 1.0, kWide);
  const auto one = weyl_expectation(psi, 1.0, 0.0, 0.0);
  CHECK(std::abs(one - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("oversized momentum shifts are refused instead of wrapping") {
  const GridWavefunction psi = sample_wavefunction(tilted_state(), 1.0, kWide);
  // |s| hbar beyond a quarter of the 40-unit window.
  CHECK_THROWS_AS(weyl_expectation(psi, 1.0, 0.0, 11.0), GridCoverageError);
}

TEST_CASE("coverage guard rejects states too wide, too sharp, or off-window") {
  const GridSpec narrow(-4.0, 4.0, 256);
  ExtendedCoherentState wide;  // sigma_q = sqrt(1/0.01) = 10 >> window/8
  wide.eta_re = 0.01;
  CHECK_THROWS_AS(sample_wavefunction(wide, 1.0, narrow), GridCoverageError);

  ExtendedCoherentState shifted;
  shifted.q_bar = 3.9;  // right tail leaves the window
  CHECK_THROWS_AS(sample_wavefunction(shifted, 1.0, narrow), GridCoverageError);

  ExtendedCoherentState fast;  // momentum mean beyond the Nyquist band
  fast.p_bar = 150.0;
  CHECK_THROWS_AS(sample_wavefunction(fast, 1.0, narrow), GridCoverageError);

  ExtendedCoherentState sharp;  // momentum spread beyond the Nyquist band
  sharp.eta_re = 4e4;
  CHECK_THROWS_AS(sample_wavefunction(sharp, 1.0, narrow), GridCoverageError);

  ExtendedCoherentState snug{0.0, 0.0, 16.0, 0.0};  // 8 sigma_q = 2 fits in 4
  CHECK_NOTHROW(sample_wavefunction(snug, 1.0, narrow));
}

TEST_CASE("fidelity is one for identical states and decays with separation") {
  const GridWavefunction a = sample_wavefunction(tilted_state(), 1.0, kWide);
  CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  ExtendedCoherentState other = tilted_state();
  other.q_bar += 0.5;
  const GridWavefunction b = sample_wavefunction(other, 1.0, kWide);
  const double f = fidelity(a, b);
  CHECK(f < 1.0);
  CHECK(f > 0.5);

  // Displaced Gaussian overlap: |<a|b>| = exp(-eta' dq^2 / 8) for a pure
  // position shift dq at equal eta.
  ExtendedCoherentState plain{0.0, 0.0, 1.2, 0.0};
  ExtendedCoherentState moved{1.0, 0.0, 1.2, 0.0};
  const double overlap = fidelity(sample_wavefunction(plain, 1.0, kWide),
                                  sample_wavefunction(moved, 1.0, kWide));
  CHECK(overlap == doctest::Approx(std::exp(-1.2 / 8.0)).epsilon(1e-8));
}

TEST_CASE("fidelity requires matching grids") {
  const GridWavefunction a = sample_wavefunction(ExtendedCoherentState{}, 1.0, kWide);
  const GridSpec other(-20.0, 20.0, 512);
  const GridWavefunction b = sample_wavefunction(ExtendedCoherentState{}, 1.0, other);
  CHECK_THROWS_AS(fidelity(a, b), std::invalid_argument);
}

TEST_CASE("aliasing guard fires when mass reaches the boundary") {
  GridWavefunction flat{kWide, Eigen::VectorXcd::Constant(kWide.n_points, 1.0)};
  flat.normalize();
  CHECK_THROWS_AS(moments(flat, 1.0), AliasingError);
}

TEST_CASE("normalize rejects an all-zero vector") {
  GridWavefunction zero{kWide, Eigen::VectorXcd::Zero(kWide.n_points)};
  CHECK_THROWS_AS(zero.normalize(), NormCollapseError);
}
