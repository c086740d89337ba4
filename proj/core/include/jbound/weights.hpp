#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "jbound/errors.hpp"

namespace jbound {

// Validation modes for a weight tuple.
//
//   Simplex               every value >= 0 and the total is 1
//   Steffensen            0 <= prefix_j <= total for all j, total > 0
//                         (individual values may be negative)
//   SteffensenNormalized  prefix sums in [0,1] and total 1; the shape the
//                         refined functional bounds need on p
enum class WeightMode { Simplex, Steffensen, SteffensenNormalized };

std::string_view to_string(WeightMode mode);
WeightMode weight_mode_from_string(std::string_view name);

// Prefix-sum boundary conditions admit this much round-off.
inline constexpr double kWeightSlack = 1e-12;
// Relative tolerance on "sums to one" checks.
inline constexpr double kSumRelTol = 1e-9;

// A validated weight tuple with cached prefix sums.
class WeightTuple {
public:
  // Throws InvalidWeightsError naming the first offending index.
  static WeightTuple validate(std::vector<double> values, WeightMode mode);

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  WeightMode mode() const { return mode_; }

  // prefix(i) = sum of the first i values, i in [0, n]; prefix(n) = total.
  double prefix(std::size_t i) const { return prefix_[i]; }
  // suffix(i) = total - prefix(i) = sum of values i..n-1.
  double suffix(std::size_t i) const { return prefix_.back() - prefix_[i]; }
  double total() const { return prefix_.back(); }

private:
  WeightTuple() = default;
  std::vector<double> values_;
  std::vector<double> prefix_; // n+1 entries, prefix_[0] = 0
  WeightMode mode_ = WeightMode::Simplex;
};

// x sorted nondecreasingly together with the weight tuples permuted the
// same way. Stable: ties keep their original order.
struct RearrangedPair {
  std::vector<double> sorted_x;
  std::vector<std::size_t> permutation; // sorted_x[i] = x[permutation[i]]
  std::vector<double> p_bar;
  std::vector<double> q_bar;
};

RearrangedPair rearrange(std::span<const double> x, std::span<const double> p,
                         std::span<const double> q);

struct Factors {
  double lo = 1.0;
  double hi = 1.0;
};

// Pointwise ratio factors m = min p_i/q_i, M = max p_i/q_i. Requires
// every q_i > 0 (ZeroDenominatorError otherwise).
Factors dragomir_factors(std::span<const double> p, std::span<const double> q);

// Prefix/suffix ratio factors of the rearranged tuples:
//   m_i  = prefix(p_bar, i) / prefix(q_bar, i)
//   mb_i = suffix(p_bar, i) / suffix(q_bar, i)
// m* = min over both families, M* = max. Throws DegenerateQError when an
// interior prefix of q_bar is 0 or 1, and InvalidWeightsError when the
// tuples fail their validation shapes.
Factors star_factors(const RearrangedPair& pair);

// Weighted mean sum(a_i x_i) / A_n.
double weighted_mean(std::span<const double> x, const WeightTuple& a);

// Convenience bundle of both factor pairs for the same (p, q).
struct BoundFactors {
  double m = 1.0;
  double M = 1.0;
  double m_star = 1.0;
  double M_star = 1.0;
};

BoundFactors compute_factors(std::span<const double> x, std::span<const double> p,
                             std::span<const double> q);

} // namespace jbound
