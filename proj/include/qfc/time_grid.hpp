#pragma once

#include <cmath>
#include <stdexcept>

namespace qfc {

/// Uniform time grid with n_steps intervals, i.e. n_steps + 1 nodes from t0
/// to horizon().
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  int n_steps = 0;

  double time(int k) const { return t0 + k * dt; }
  double horizon() const { return t0 + n_steps * dt; }

  bool operator==(const TimeGrid&) const = default;

  /// Grid with exactly n_steps intervals spanning [t0, t1].
  static TimeGrid span(double t0, double t1, int n_steps) {
    if (!(t1 > t0) || n_steps < 1) {
      throw std::invalid_argument("TimeGrid::span requires t1 > t0 and n_steps >= 1");
    }
    return {t0, (t1 - t0) / n_steps, n_steps};
  }

  /// Grid covering [t0, t1] with the step count nearest to (t1 - t0) / dt.
  /// The step is adjusted (by at most half a step) so the horizon lands on a
  /// node exactly.
  static TimeGrid with_step(double t0, double t1, double dt) {
    if (!(dt > 0.0)) {
      throw std::invalid_argument("TimeGrid::with_step requires dt > 0");
    }
    const auto n = static_cast<int>(std::llround((t1 - t0) / dt));
    return span(t0, t1, n < 1 ? 1 : n);
  }
};

}  // namespace qfc
