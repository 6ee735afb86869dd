// Wiener-increment generation: bit-reproducibility, the documented
// Box-Muller mapping, Gaussian moments, coarse-graining, and per-path
// seeding. The generator contract is re-derived independently here: raw
// mt19937_64 draws map to u = ((x >> 11) + 1) * 2^-53 in (0, 1], and each
// step consumes one Box-Muller pair (cosine branch -> dW, sine -> dW_tilde),
// scaled by sqrt(dt).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "qfc/accum.hpp"
#include "qfc/noise.hpp"

using namespace qfc;

namespace {

// Reference implementation of the documented draw order, written without
// looking at the library internals.
std::pair<std::vector<double>, std::vector<double>> reference_path(std::uint64_t seed, double dt,
                                                                   int n_steps) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  std::vector<double> dw(n_steps), dwt(n_steps);
  const double root_dt = std::sqrt(dt);
  for (int k = 0; k < n_steps; ++k) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    dw[k] = root_dt * radius * std::cos(2.0 * std::numbers::pi * u2);
    dwt[k] = root_dt * radius * std::sin(2.0 * std::numbers::pi * u2);
  }
  return {dw, dwt};
}

}  // namespace

TEST_CASE("same (seed, dt, n_steps) regenerates bit-identical increments") {
  const NoisePath a = make_noise_path(42, 1e-3, 500);
  const NoisePath b = make_noise_path(42, 1e-3, 500);
  REQUIRE(a.n_steps == 500);
  CHECK(a.dt == 1e-3);
  CHECK(a.seed == 42);
  for (int k = 0; k < a.n_steps; ++k) {
    CHECK(a.dW[k] == b.dW[k]);
    CHECK(a.dW_tilde[k] == b.dW_tilde[k]);
  }
}

TEST_CASE("increments match the documented Box-Muller mapping exactly") {
  const NoisePath p = make_noise_path(7, 0.25, 64);
  const auto [dw, dwt] = reference_path(7, 0.25, 64);
  for (int k = 0; k < 64; ++k) {
    CHECK(p.dW[k] == dw[k]);
    CHECK(p.dW_tilde[k] == dwt[k]);
  }
}

TEST_CASE("different seeds give different paths") {
  const NoisePath a = make_noise_path(1, 1e-2, 32);
  const NoisePath b = make_noise_path(2, 1e-2, 32);
  int same = 0;
  for (int k = 0; k < 32; ++k) {
    if (a.dW[k] == b.dW[k]) ++same;
  }
  CHECK(same == 0);
}

TEST_CASE("sample moments: mean 0, variance dt, independent channels") {
  const int n = 200000;
  const double dt = 0.25;
  const NoisePath p = make_noise_path(2024, dt, n);

  NeumaierSum sum_w, sum_wt, sum_ww, sum_wtwt, sum_cross;
  for (int k = 0; k < n; ++k) {
    sum_w.add(p.dW[k]);
    sum_wt.add(p.dW_tilde[k]);
    sum_ww.add(p.dW[k] * p.dW[k]);
    sum_wtwt.add(p.dW_tilde[k] * p.dW_tilde[k]);
    sum_cross.add(p.dW[k] * p.dW_tilde[k]);
  }
  // 5-sigma bands: sd(mean) = sqrt(dt/n), sd(sample second moment) is
  // sqrt(2) dt / sqrt(n), sd(cross moment) = dt / sqrt(n).
  const double mean_band = 5.0 * std::sqrt(dt / n);
  const double var_band = 5.0 * std::sqrt(2.0) * dt / std::sqrt(double(n));
  const double cross_band = 5.0 * dt / std::sqrt(double(n));
  CHECK(std::abs(sum_w.value() / n) < mean_band);
  CHECK(std::abs(sum_wt.value() / n) < mean_band);
  CHECK(std::abs(sum_ww.value() / n - dt) < var_band);
  CHECK(std::abs(sum_wtwt.value() / n - dt) < var_band);
  CHECK(std::abs(sum_cross.value() / n) < cross_band);
}

TEST_CASE("coarsen sums adjacent increments exactly and doubles the step") {
  const NoisePath fine = make_noise_path(11, 5e-4, 1000);
  const NoisePath coarse = coarsen(fine);
  REQUIRE(coarse.n_steps == 500);
  CHECK(coarse.dt == 1e-3);
  CHECK(coarse.seed == fine.seed);
  for (int k = 0; k < coarse.n_steps; ++k) {
    CHECK(coarse.dW[k] == fine.dW[2 * k] + fine.dW[2 * k + 1]);
    CHECK(coarse.dW_tilde[k] == fine.dW_tilde[2 * k] + fine.dW_tilde[2 * k + 1]);
  }
}

TEST_CASE("coarsen rejects an odd step count") {
  const NoisePath odd = make_noise_path(3, 1e-3, 7);
  CHECK_THROWS_AS(coarsen(odd), std::invalid_argument);
}

TEST_CASE("path seeds are deterministic and distinct across indices") {
  CHECK(path_seed(99, 0) == path_seed(99, 0));
  const int n = 1000;
  std::vector<std::uint64_t> seeds(n);
  for (int i = 0; i < n; ++i) seeds[i] = path_seed(123456789, i);
  for (int i = 1; i < n; ++i) {
    CHECK(seeds[i] != seeds[0]);
  }
  CHECK(path_seed(1, 5) != path_seed(2, 5));
}

TEST_CASE("generation rejects non-positive dt and negative step counts") {
  CHECK_THROWS_AS(make_noise_path(0, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_noise_path(0, -1e-3, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_noise_path(0, 1e-3, -1), std::invalid_argument);
  const NoisePath empty = make_noise_path(0, 1e-3, 0);  // empty path is fine
  CHECK(empty.dW.empty());
}

TEST_CASE("gaussian pair stream is deterministic and finite") {
  detail::GaussianPairStream a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const auto pa = a.next_pair();
    const auto pb = b.next_pair();
    CHECK(pa.first == pb.first);
    CHECK(pa.second == pb.second);
    CHECK(std::isfinite(pa.first));
    CHECK(std::isfinite(pa.second));
  }
}
