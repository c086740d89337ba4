#include "jbound/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "jbound/stable_sum.hpp"

namespace jbound {

std::string_view to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::Simplex: return "simplex";
    case WeightMode::Steffensen: return "steffensen";
    case WeightMode::SteffensenNormalized: return "steffensen_normalized";
  }
  return "?";
}

WeightMode weight_mode_from_string(std::string_view name) {
  if (name == "simplex") return WeightMode::Simplex;
  if (name == "steffensen") return WeightMode::Steffensen;
  if (name == "steffensen_normalized") return WeightMode::SteffensenNormalized;
  throw ParseError("unknown weight mode '" + std::string(name) + "'");
}

namespace {

[[noreturn]] void fail(std::size_t index, const std::string& what) {
  std::ostringstream os;
  os << "invalid weights at index " << index << ": " << what;
  throw InvalidWeightsError(os.str(), index);
}

} // namespace

WeightTuple WeightTuple::validate(std::vector<double> values, WeightMode mode) {
  if (values.empty())
    throw InvalidWeightsError("invalid weights: tuple must have n >= 1", 0);

  const std::size_t n = values.size();
  std::vector<double> prefix(n + 1, 0.0);
  StableSum run;
  for (std::size_t i = 0; i < n; ++i) {
    run.add(values[i]);
    prefix[i + 1] = run.get();
  }
  const double total = prefix[n];

  switch (mode) {
    case WeightMode::Simplex: {
      for (std::size_t i = 0; i < n; ++i)
        if (values[i] < 0.0) fail(i, "simplex weights must be nonnegative");
      if (std::abs(total - 1.0) > kSumRelTol * std::max(1.0, std::abs(total)))
        fail(n - 1, "simplex weights must sum to 1");
      break;
    }
    case WeightMode::Steffensen: {
      if (!(total > 0.0))
        fail(n - 1, "jensen-steffensen condition needs total > 0");
      const double slack = kWeightSlack * std::max(1.0, std::abs(total));
      for (std::size_t i = 0; i < n; ++i) {
        if (prefix[i + 1] < -slack)
          fail(i, "jensen-steffensen condition: prefix sum below 0");
        if (prefix[i + 1] > total + slack)
          fail(i, "jensen-steffensen condition: prefix sum above the total");
      }
      break;
    }
    case WeightMode::SteffensenNormalized: {
      if (std::abs(total - 1.0) > kWeightSlack)
        fail(n - 1, "normalized prefix weights must total exactly 1");
      for (std::size_t i = 0; i < n; ++i) {
        if (prefix[i + 1] < -kWeightSlack)
          fail(i, "prefix sum below 0");
        if (prefix[i + 1] > 1.0 + kWeightSlack)
          fail(i, "prefix sum above 1");
      }
      break;
    }
  }

  WeightTuple t;
  t.values_ = std::move(values);
  t.prefix_ = std::move(prefix);
  t.mode_ = mode;
  return t;
}

RearrangedPair rearrange(std::span<const double> x, std::span<const double> p,
                         std::span<const double> q) {
  if (x.size() != p.size() || x.size() != q.size())
    throw LengthMismatchError("rearrange requires equal-length tuples");

  const std::size_t n = x.size();
  RearrangedPair out;
  out.permutation.resize(n);
  std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  out.sorted_x.resize(n);
  out.p_bar.resize(n);
  out.q_bar.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.sorted_x[i] = x[out.permutation[i]];
    out.p_bar[i] = p[out.permutation[i]];
    out.q_bar[i] = q[out.permutation[i]];
  }
  return out;
}

Factors dragomir_factors(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw LengthMismatchError("factor computation requires equal-length tuples");
  Factors f;
  bool first = true;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) {
      std::ostringstream os;
      os << "q[" << i << "] = 0";
      throw ZeroDenominatorError(os.str());
    }
    const double r = p[i] / q[i];
    if (first) {
      f.lo = f.hi = r;
      first = false;
    } else {
      f.lo = std::min(f.lo, r);
      f.hi = std::max(f.hi, r);
    }
  }
  return f;
}

Factors star_factors(const RearrangedPair& pair) {
  const std::size_t n = pair.p_bar.size();
  if (pair.q_bar.size() != n || n == 0)
    throw LengthMismatchError("star_factors requires equal nonempty tuples");

  // Validation happens on the rearranged tuples: that is where the
  // prefix conditions live.
  const WeightTuple p =
      WeightTuple::validate(pair.p_bar, WeightMode::SteffensenNormalized);
  const WeightTuple q =
      WeightTuple::validate(pair.q_bar, WeightMode::SteffensenNormalized);
  for (std::size_t i = 1; i <= n - 1; ++i) {
    const double qi = q.prefix(i);
    if (qi <= 0.0 || qi >= 1.0) {
      std::ostringstream os;
      os << "interior prefix sum of q is " << qi << " at index " << i - 1
         << "; the prefix-ratio factors need it strictly inside (0, 1)";
      throw DegenerateQError(os.str());
    }
  }

  Factors f;
  bool first = true;
  auto consider = [&](double r) {
    if (first) {
      f.lo = f.hi = r;
      first = false;
    } else {
      f.lo = std::min(f.lo, r);
      f.hi = std::max(f.hi, r);
    }
  };
  for (std::size_t i = 1; i <= n; ++i) {
    consider(p.prefix(i) / q.prefix(i));       // m_i
    consider(p.suffix(i - 1) / q.suffix(i - 1)); // m-bar_i
  }
  return f;
}

double weighted_mean(std::span<const double> x, const WeightTuple& a) {
  if (x.size() != a.size())
    throw LengthMismatchError("weighted_mean requires equal-length tuples");
  StableSum s;
  for (std::size_t i = 0; i < x.size(); ++i) s.add(a[i] * x[i]);
  return s.get() / a.total();
}

BoundFactors compute_factors(std::span<const double> x, std::span<const double> p,
                             std::span<const double> q) {
  BoundFactors out;
  const Factors d = dragomir_factors(p, q);
  const Factors s = star_factors(rearrange(x, p, q));
  out.m = d.lo;
  out.M = d.hi;
  out.m_star = s.lo;
  out.M_star = s.hi;
  return out;
}

} // namespace jbound
