#pragma once

#include <cmath>

namespace qfc {

/// Neumaier compensated accumulator. Summation order still matters for bit
/// reproducibility; reductions over Monte Carlo paths must add in path order.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace qfc
