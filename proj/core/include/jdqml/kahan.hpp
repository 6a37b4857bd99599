#pragma once

#include <cmath>

namespace jdqml {

/// Neumaier-compensated accumulator. Likelihood sums run over up to 1e6
/// terms of mixed magnitude; plain summation loses the digits the
/// first-order-condition checks need.
class KahanSum {
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

  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace jdqml
