#include "qfc/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qfc {

namespace detail {

double GaussianPairStream::uniform() {
  // Top 53 bits, shifted into (0, 1]: the +1 keeps log() finite.
  return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
}

std::pair<double, double> GaussianPairStream::next_pair() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace detail

NoisePath make_noise_path(std::uint64_t seed, double dt, int n_steps) {
  if (!(dt > 0.0) || n_steps < 0) {
    throw std::invalid_argument("make_noise_path requires dt > 0 and n_steps >= 0");
  }
  NoisePath path;
  path.seed = seed;
  path.dt = dt;
  path.n_steps = n_steps;
  path.dW.resize(n_steps);
  path.dW_tilde.resize(n_steps);

  detail::GaussianPairStream stream(seed);
  const double scale = std::sqrt(dt);
  for (int k = 0; k < n_steps; ++k) {
    const auto [z0, z1] = stream.next_pair();
    path.dW[k] = scale * z0;
    path.dW_tilde[k] = scale * z1;
  }
  return path;
}

std::uint64_t path_seed(std::uint64_t master_seed, int path_index) {
  return master_seed + static_cast<std::uint64_t>(path_index);
}

NoisePath coarsen(const NoisePath& fine) {
  if (fine.n_steps % 2 != 0) {
    throw std::invalid_argument("coarsen requires an even number of steps");
  }
  NoisePath coarse;
  coarse.seed = fine.seed;
  coarse.dt = 2.0 * fine.dt;
  coarse.n_steps = fine.n_steps / 2;
  coarse.dW.resize(coarse.n_steps);
  coarse.dW_tilde.resize(coarse.n_steps);
  for (int k = 0; k < coarse.n_steps; ++k) {
    coarse.dW[k] = fine.dW[2 * k] + fine.dW[2 * k + 1];
    coarse.dW_tilde[k] = fine.dW_tilde[2 * k] + fine.dW_tilde[2 * k + 1];
  }
  return coarse;
}

}  // namespace qfc
