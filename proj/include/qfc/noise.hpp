#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qfc {

/// Pre-drawn Wiener increments for the two measurement channels. A path is
/// a pure function of (seed, dt, n_steps): regenerating with the same triple
/// is bit-identical, on any platform, regardless of consumption order.
struct NoisePath {
  std::uint64_t seed = 0;
  double dt = 0.0;
  int n_steps = 0;
  std::vector<double> dW;        // position channel, N(0, dt) each
  std::vector<double> dW_tilde;  // momentum channel, N(0, dt) each
};

/// Draws the increments with a fixed in-house Box-Muller transform over
/// std::mt19937_64 (std::normal_distribution is not bit-stable across
/// standard libraries). Step k consumes one Box-Muller pair: dW[k] gets the
/// cosine branch, dW_tilde[k] the sine branch.
NoisePath make_noise_path(std::uint64_t seed, double dt, int n_steps);

/// Seed for Monte Carlo path i under a master seed.
std::uint64_t path_seed(std::uint64_t master_seed, int path_index);

/// Pairwise-sums increments into a path with step 2*dt, representing the
/// same Brownian sample paths on the coarser grid. n_steps must be even.
NoisePath coarsen(const NoisePath& fine);

namespace detail {

/// Standard-normal pairs: Box-Muller over mt19937_64, mapping each raw draw
/// x to ((x >> 11) + 1) * 2^-53 in (0, 1] so the logarithm is always finite.
class GaussianPairStream {
 public:
  explicit GaussianPairStream(std::uint64_t seed) : rng_(seed) {}

  /// One independent N(0,1) pair (cosine branch, sine branch).
  std::pair<double, double> next_pair();

 private:
  double uniform();  // in (0, 1]

  std::mt19937_64 rng_;
};

}  // namespace detail

}  // namespace qfc
