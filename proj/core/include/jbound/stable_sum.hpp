#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace jbound {

// Neumaier-compensated accumulator. Chains in this library are evaluated
// with it so that slack measurements stay meaningful near equality cases.
class StableSum {
public:
  StableSum() = default;
  explicit StableSum(double init) : sum_(init) {}

  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }

  double get() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double stable_total(std::span<const double> values) {
  StableSum s;
  for (double v : values) s.add(v);
  return s.get();
}

} // namespace jbound
