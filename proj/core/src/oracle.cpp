#include "jbound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "jbound/stable_sum.hpp"

namespace jbound::oracle {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic per-(seed, theorem, trial) stream; draws are portable
// (raw 64-bit words mapped to doubles, no std::distribution involved).
class Rng {
public:
  Rng(std::uint64_t seed, TheoremId id, std::uint64_t trial) {
    std::uint64_t s = seed;
    std::uint64_t mix = splitmix64(s);
    s ^= (static_cast<std::uint64_t>(id) + 1) * 0x9e3779b97f4a7c15ULL;
    mix ^= splitmix64(s);
    s ^= (trial + 1) * 0xd1342543de82ef95ULL;
    mix ^= splitmix64(s);
    eng_.seed(mix);
  }

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(eng_() %
                                 static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(double prob) { return uniform01() < prob; }

private:
  std::mt19937_64 eng_;
};

FunctionSpec draw_atom(Rng& rng, FunctionClass cls, bool need_nonneg,
                       const Interval& dom) {
  const bool quad_only = cls == FunctionClass::StronglyConvex;
  if (!quad_only && rng.chance(0.5) && dom.lo >= 0.0)
    return FunctionSpec::power(rng.uniform_int(2, 5), dom);
  return FunctionSpec::strong_quadratic(rng.uniform(0.1, 2.0), dom);
}

FunctionSpec draw_spec(Rng& rng, FunctionClass cls) {
  const bool need_nonneg = cls == FunctionClass::Superquadratic;
  Interval dom;
  if (need_nonneg || rng.chance(0.6)) {
    dom = {0.0, rng.uniform(1.0, 4.0)};
  } else {
    dom = {rng.uniform(-2.0, -0.25), rng.uniform(0.5, 2.5)};
  }
  if (rng.chance(0.15)) {
    std::vector<std::pair<double, FunctionSpec>> terms;
    terms.emplace_back(rng.uniform(0.25, 1.5), draw_atom(rng, cls, need_nonneg, dom));
    terms.emplace_back(rng.uniform(0.25, 1.5), draw_atom(rng, cls, need_nonneg, dom));
    FunctionSpec combo = FunctionSpec::combination(std::move(terms));
    if (combo.has_tag(cls)) return combo;
  }
  return draw_atom(rng, cls, need_nonneg, dom);
}

std::vector<double> draw_points(Rng& rng, const Interval& dom, int n,
                                bool sorted) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.uniform(dom.lo, dom.hi);
  if (sorted) std::sort(x.begin(), x.end());
  return x;
}

std::vector<double> draw_simplex(Rng& rng, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& v : w) {
    v = rng.uniform(0.1, 1.0);
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

// Jensen-Steffensen tuples come from valid prefix paths rather than
// rejection sampling.
std::vector<double> draw_steffensen(Rng& rng, int n) {
  const double total = rng.uniform(0.5, 2.0);
  std::vector<double> path(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i)
    path[static_cast<std::size_t>(i)] = rng.uniform(0.0, total);
  path.back() = total;
  std::vector<double> a(path.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    a[i] = path[i] - prev;
    prev = path[i];
  }
  return a;
}

std::vector<double> draw_prefix_path_weights(Rng& rng, int n, bool interior) {
  std::vector<double> path(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i)
    path[static_cast<std::size_t>(i)] =
        interior ? rng.uniform(0.02, 0.98) : rng.uniform(0.0, 1.0);
  path.back() = 1.0;
  std::vector<double> w(path.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    w[i] = path[i] - prev;
    prev = path[i];
  }
  return w;
}

std::vector<double> sorted_distinct_points(Rng& rng, const Interval& dom,
                                           int n) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<double> x = draw_points(rng, dom, n, true);
    if (std::adjacent_find(x.begin(), x.end()) == x.end()) return x;
  }
  // Nudge duplicates apart as a last resort.
  std::vector<double> x = draw_points(rng, dom, n, true);
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] <= x[i - 1]) x[i] = std::nextafter(x[i - 1], dom.hi + 1.0);
  return x;
}

} // namespace

Instance generate(const FuzzConfig& config, TheoremId id,
                  std::uint64_t trial_index) {
  Rng rng(config.seed, id, trial_index);
  const TheoremInfo& info = theorem_info(id);

  Instance inst;
  inst.cls = info.required_class.value_or(FunctionClass::UniformlyConvex);
  inst.spec = draw_spec(rng, inst.cls);
  const int n = rng.uniform_int(config.n_min, config.n_max);

  switch (info.weights) {
    case WeightsShape::SimplexA: {
      inst.x = draw_points(rng, inst.spec.domain(), n, false);
      inst.a = draw_simplex(rng, n);
      inst.a_mode = WeightMode::Simplex;
      break;
    }
    case WeightsShape::SteffensenA: {
      inst.x = draw_points(rng, inst.spec.domain(), n, true);
      inst.a = draw_steffensen(rng, n);
      inst.a_mode = WeightMode::Steffensen;
      break;
    }
    case WeightsShape::PQPositive: {
      inst.x = draw_points(rng, inst.spec.domain(), n, false);
      inst.p = draw_simplex(rng, n);
      inst.q = draw_simplex(rng, n);
      break;
    }
    case WeightsShape::PQStar: {
      // Conditions live in the sorted frame; draw there, then scatter by a
      // random permutation when the theorem allows unsorted input.
      std::vector<double> xs = sorted_distinct_points(rng, inst.spec.domain(), n);
      std::vector<double> pbar = draw_prefix_path_weights(rng, n, false);
      std::vector<double> qbar = draw_prefix_path_weights(rng, n, true);
      if (info.needs_sorted_x) {
        inst.x = std::move(xs);
        inst.p = std::move(pbar);
        inst.q = std::move(qbar);
      } else {
        std::vector<std::size_t> perm(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::size_t i = perm.size(); i > 1; --i)
          std::swap(perm[i - 1],
                    perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
        inst.x.resize(perm.size());
        inst.p.resize(perm.size());
        inst.q.resize(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
          inst.x[perm[i]] = xs[i];
          inst.p[perm[i]] = pbar[i];
          inst.q[perm[i]] = qbar[i];
        }
      }
      break;
    }
  }

  if (info.has_lambda) {
    inst.lambda.resize(static_cast<std::size_t>(n));
    for (auto& l : inst.lambda) l = rng.uniform01();
  }
  if (info.uses_c)
    inst.c = rng.uniform(inst.spec.domain().lo, inst.spec.domain().hi);
  return inst;
}

namespace {

// ---- plain-summation recomputation (the independent path) ----
//
// Same chain formulas as the bounds module, but every sum is a plain
// double accumulated in reverse index order.

template <typename F>
double plain_sum_rev(std::size_t n, F&& term) {
  double s = 0.0;
  for (std::size_t i = n; i-- > 0;) s += term(i);
  return s;
}

double plain_jensen(const FunctionSpec& spec, std::span<const double> x,
                    std::span<const double> w) {
  const std::size_t n = x.size();
  double mean = plain_sum_rev(n, [&](std::size_t i) { return w[i] * x[i]; });
  double fsum =
      plain_sum_rev(n, [&](std::size_t i) { return w[i] * spec.value(x[i]); });
  return fsum - spec.value(mean);
}

BoundReport plain_chain(const Instance& inst, std::span<const double> lambda,
                        TheoremId id, const Tolerances& tol) {
  const FunctionSpec& f = inst.spec;
  const std::size_t n = inst.x.size();
  const double sigma = class_sigma(inst.cls);
  const double den =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i]; });
  const double xbar =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * inst.x[i]; }) /
      den;
  auto xhat = [&](std::size_t i) {
    return (1.0 - lambda[i]) * xbar + lambda[i] * inst.x[i];
  };
  auto dev = [&](std::size_t i) {
    return (1.0 - lambda[i]) * std::abs(xbar - inst.x[i]);
  };

  const double sum_f =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * f.value(inst.x[i]); }) / den;
  const double sum_fh =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * f.value(xhat(i)); }) / den;
  const double sum_tan =
      plain_sum_rev(n, [&](std::size_t i) {
        return inst.a[i] * (1.0 - lambda[i]) * inst.phi(f, xhat(i)) *
               (inst.x[i] - xbar);
      }) /
      den;
  const double sum_gap =
      plain_sum_rev(n, [&](std::size_t i) {
        return inst.a[i] * class_gap(f, inst.cls, dev(i));
      }) /
      den;
  const double upper = sum_f - sum_fh - sum_tan - sigma * sum_gap;

  const double abs_direct =
      plain_sum_rev(n, [&](std::size_t i) {
        return inst.a[i] * std::abs(f.value(inst.x[i]) - f.value(xhat(i)) -
                                    sigma * class_gap(f, inst.cls, dev(i)));
      }) /
      den;
  const double abs_tangent =
      plain_sum_rev(n, [&](std::size_t i) {
        return inst.a[i] * (1.0 - lambda[i]) * std::abs(inst.phi(f, xhat(i))) *
               std::abs(xbar - inst.x[i]);
      }) /
      den;
  const double middle = std::abs(abs_direct - abs_tangent);

  BoundReport rep;
  rep.theorem = id;
  rep.lhs = 0.0;
  rep.mid = middle;
  rep.rhs = upper;
  rep.slack = std::min(middle, upper - middle);
  const double scale =
      std::max({std::abs(sum_f), std::abs(sum_fh), std::abs(sum_gap),
                std::abs(sum_tan), abs_direct, abs_tangent});
  rep.pass = rep.slack >= tol.floor(scale);
  return rep;
}

BoundReport plain_tangent(const Instance& inst, std::span<const double> lambda,
                          bool force_minus_gap, TheoremId id,
                          const Tolerances& tol) {
  const FunctionSpec& f = inst.spec;
  const std::size_t n = inst.x.size();
  const double sigma = force_minus_gap ? 1.0 : class_sigma(inst.cls);
  const double den =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i]; });
  const double xbar =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * inst.x[i]; }) /
      den;
  auto xhat = [&](std::size_t i) {
    return (1.0 - lambda[i]) * xbar + lambda[i] * inst.x[i];
  };

  const double sum_f =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * f.value(inst.x[i]); }) / den;
  const double sum_fh =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * f.value(xhat(i)); }) / den;
  const double sum_tan =
      plain_sum_rev(n, [&](std::size_t i) {
        return inst.a[i] * (1.0 - lambda[i]) * inst.phi(f, inst.x[i]) *
               (inst.x[i] - xbar);
      }) /
      den;
  const double sum_gap =
      plain_sum_rev(n, [&](std::size_t i) {
        return inst.a[i] *
               class_gap(f, inst.cls,
                         (1.0 - lambda[i]) * std::abs(xbar - inst.x[i]));
      }) /
      den;

  BoundReport rep;
  rep.theorem = id;
  rep.lhs = sum_f - sum_fh;
  rep.rhs = sum_tan - sigma * sum_gap;
  rep.slack = rep.rhs - rep.lhs;
  const double scale = std::max({std::abs(sum_f), std::abs(sum_fh),
                                 std::abs(sum_tan), std::abs(sum_gap)});
  rep.pass = rep.slack >= tol.floor(scale);
  return rep;
}

BoundReport plain_steffensen(const Instance& inst, TheoremId id,
                             const Tolerances& tol) {
  const FunctionSpec& f = inst.spec;
  const std::size_t n = inst.x.size();
  const double den = plain_sum_rev(n, [&](std::size_t i) { return inst.a[i]; });
  const double xbar =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * inst.x[i]; }) / den;
  const double c = id == TheoremId::Thm6Mean ? xbar : inst.c.value_or(xbar);

  const double f_mean =
      plain_sum_rev(n, [&](std::size_t i) { return inst.a[i] * f.value(inst.x[i]); }) / den;
  const double phi_mean =
      plain_sum_rev(n, [&](std::size_t i) {
        return inst.a[i] * f.modulus(std::abs(inst.x[i] - c));
      }) /
      den;
  const double f_c = f.value(c);
  const double tangent = f.derivative(c) * (xbar - c);

  BoundReport rep;
  rep.theorem = id;
  const double scale =
      std::max({std::abs(f_c), std::abs(tangent), std::abs(phi_mean),
                std::abs(f_mean)});
  if (id == TheoremId::Thm6Phi) {
    const double gap = f_mean - f_c - tangent;
    rep.lhs = 0.0;
    rep.mid = phi_mean;
    rep.rhs = gap;
    rep.slack = std::min(phi_mean, gap - phi_mean);
  } else {
    rep.lhs = f_c + tangent + phi_mean;
    rep.rhs = f_mean;
    rep.slack = rep.rhs - rep.lhs;
  }
  rep.pass = rep.slack >= tol.floor(scale);
  return rep;
}

Factors plain_star_factors(std::span<const double> x, std::span<const double> p,
                           std::span<const double> q) {
  const RearrangedPair pair = rearrange(x, p, q);
  const std::size_t n = pair.p_bar.size();
  std::vector<double> pp(n + 1, 0.0);
  std::vector<double> qq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    pp[i + 1] = pp[i] + pair.p_bar[i];
    qq[i + 1] = qq[i] + pair.q_bar[i];
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
    consider(pp[i] / qq[i]);
    consider((pp[n] - pp[i - 1]) / (qq[n] - qq[i - 1]));
  }
  return f;
}

BoundReport plain_functional(const Instance& inst, TheoremId id,
                             const Tolerances& tol) {
  const FunctionSpec& f = inst.spec;
  const std::size_t n = inst.x.size();
  const bool phi_route =
      id == TheoremId::Thm20Lower || id == TheoremId::Thm20Upper;
  auto G = [&](double d) { return phi_route ? f.modulus(d) : f.value(d); };

  Factors factors;
  if (id == TheoremId::Thm4Lower || id == TheoremId::Thm4Upper)
    factors = dragomir_factors(inst.p, inst.q);
  else
    factors = plain_star_factors(inst.x, inst.p, inst.q);

  const double jp = plain_jensen(f, inst.x, inst.p);
  const double jq = plain_jensen(f, inst.x, inst.q);
  const double mean_p =
      plain_sum_rev(n, [&](std::size_t i) { return inst.p[i] * inst.x[i]; });
  const double mean_q =
      plain_sum_rev(n, [&](std::size_t i) { return inst.q[i] * inst.x[i]; });
  const double cross = G(std::abs(plain_sum_rev(
      n, [&](std::size_t i) { return (inst.q[i] - inst.p[i]) * inst.x[i]; })));

  const bool lower = id == TheoremId::Thm4Lower ||
                     id == TheoremId::Thm19Lower ||
                     id == TheoremId::Thm20Lower;
  BoundReport rep;
  rep.theorem = id;
  if (lower) {
    const double m = factors.lo;
    const double refine = plain_sum_rev(n, [&](std::size_t i) {
      return (inst.p[i] - m * inst.q[i]) * G(std::abs(inst.x[i] - mean_p));
    });
    rep.lhs = jp - m * jq;
    rep.rhs = m * cross + refine;
    rep.slack = rep.lhs - rep.rhs;
    rep.pass = rep.slack >=
               tol.floor(std::max({std::abs(jp), std::abs(m * jq), std::abs(rep.rhs)}));
  } else {
    const double M = factors.hi;
    const double refine = plain_sum_rev(n, [&](std::size_t i) {
      return (M * inst.q[i] - inst.p[i]) * G(std::abs(inst.x[i] - mean_q));
    });
    rep.lhs = jp - M * jq;
    rep.rhs = -refine - cross;
    rep.slack = rep.rhs - rep.lhs;
    rep.pass = rep.slack >=
               tol.floor(std::max({std::abs(jp), std::abs(M * jq), std::abs(rep.rhs)}));
  }
  return rep;
}

BoundReport plain_ratio_sandwich(const Instance& inst, TheoremId id,
                                 const Tolerances& tol) {
  const double jp = plain_jensen(inst.spec, inst.x, inst.p);
  const double jq = plain_jensen(inst.spec, inst.x, inst.q);
  const Factors f = id == TheoremId::Thm3
                        ? dragomir_factors(inst.p, inst.q)
                        : plain_star_factors(inst.x, inst.p, inst.q);
  BoundReport rep;
  rep.theorem = id;
  rep.lhs = f.lo * jq;
  rep.mid = jp;
  rep.rhs = f.hi * jq;
  rep.slack = std::min(jp - f.lo * jq, f.hi * jq - jp);
  rep.pass = rep.slack >= tol.floor(std::max(
                              {std::abs(jp), std::abs(rep.lhs), std::abs(rep.rhs)}));
  return rep;
}

std::vector<double> lambda_or_zeros(const Instance& inst, bool has_lambda) {
  if (has_lambda) return inst.lambda;
  return std::vector<double>(inst.x.size(), 0.0);
}

} // namespace

BoundReport plain_evaluate(const Instance& inst, TheoremId id,
                           const Tolerances& tol) {
  const TheoremInfo& info = theorem_info(id);
  switch (id) {
    case TheoremId::Thm1Chain:
    case TheoremId::Thm7:
    case TheoremId::Thm8:
    case TheoremId::Thm11:
    case TheoremId::Thm12:
    case TheoremId::Thm15:
    case TheoremId::Thm16:
      return plain_chain(inst, lambda_or_zeros(inst, info.has_lambda), id, tol);
    case TheoremId::Thm1Tangent:
    case TheoremId::Thm9:
    case TheoremId::Thm10:
    case TheoremId::Thm13:
    case TheoremId::Thm14:
    case TheoremId::Thm17:
    case TheoremId::Thm18:
      return plain_tangent(inst, lambda_or_zeros(inst, info.has_lambda), false,
                           id, tol);
    case TheoremId::Thm13Minus:
      return plain_tangent(inst, lambda_or_zeros(inst, false), true, id, tol);
    case TheoremId::Thm3:
    case TheoremId::Thm5:
      return plain_ratio_sandwich(inst, id, tol);
    case TheoremId::Thm4Lower:
    case TheoremId::Thm4Upper:
    case TheoremId::Thm19Lower:
    case TheoremId::Thm19Upper:
    case TheoremId::Thm20Lower:
    case TheoremId::Thm20Upper:
      return plain_functional(inst, id, tol);
    case TheoremId::Thm6Tangent:
    case TheoremId::Thm6Mean:
    case TheoremId::Thm6Phi:
      return plain_steffensen(inst, id, tol);
  }
  throw Error("plain_evaluate: unhandled theorem id");
}

CheckOutcome check(const Instance& inst, TheoremId id, const Tolerances& tol) {
  CheckOutcome out;
  out.report = evaluate_theorem(inst, id, tol);
  out.plain = plain_evaluate(inst, id, tol);

  const double scale =
      std::max({std::abs(out.report.lhs), std::abs(out.report.rhs),
                out.report.mid ? std::abs(*out.report.mid) : 0.0});
  out.path_delta = std::abs(out.report.slack - out.plain.slack);
  out.paths_agree = out.path_delta <= tol.abs + tol.rel * scale;

  if (!out.report.pass && !out.plain.pass) {
    Counterexample cex;
    cex.instance = inst;
    cex.theorem = id;
    cex.violation = -out.report.slack;
    out.counterexample = std::move(cex);
  }
  return out;
}

namespace {

double round_to(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

void renormalize(std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
}

bool weights_repairable(const std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  return total > 1e-9;
}

// Drop point i, repairing the weight tuples per their mode. Returns
// nullopt when the reduced tuple cannot stay valid by construction
// (deeper validity is re-checked by check()).
std::optional<Instance> drop_point(const Instance& inst, TheoremId id,
                                   std::size_t i) {
  const TheoremInfo& info = theorem_info(id);
  if (inst.x.size() <= 2) return std::nullopt;
  Instance out = inst;
  out.x.erase(out.x.begin() + static_cast<std::ptrdiff_t>(i));
  if (!out.lambda.empty())
    out.lambda.erase(out.lambda.begin() + static_cast<std::ptrdiff_t>(i));

  auto drop_merge = [&](std::vector<double>& w) {
    // Removing a prefix-path entry: the dropped weight flows into the
    // next point, which keeps every remaining prefix sum unchanged.
    if (i + 1 < w.size()) w[i + 1] += w[i];
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(i));
  };

  switch (info.weights) {
    case WeightsShape::SimplexA:
      out.a.erase(out.a.begin() + static_cast<std::ptrdiff_t>(i));
      if (!weights_repairable(out.a)) return std::nullopt;
      renormalize(out.a);
      break;
    case WeightsShape::SteffensenA:
      drop_merge(out.a);
      break;
    case WeightsShape::PQPositive:
      out.p.erase(out.p.begin() + static_cast<std::ptrdiff_t>(i));
      out.q.erase(out.q.begin() + static_cast<std::ptrdiff_t>(i));
      if (!weights_repairable(out.p) || !weights_repairable(out.q))
        return std::nullopt;
      renormalize(out.p);
      renormalize(out.q);
      break;
    case WeightsShape::PQStar:
      drop_merge(out.p);
      drop_merge(out.q);
      if (i == inst.x.size() - 1) {
        // Dropped the last point: totals changed; rescale back to 1.
        if (!weights_repairable(out.p) || !weights_repairable(out.q))
          return std::nullopt;
        renormalize(out.p);
        renormalize(out.q);
      }
      break;
  }
  return out;
}

std::optional<Instance> round_instance(const Instance& inst, TheoremId id,
                                       int digits) {
  const TheoremInfo& info = theorem_info(id);
  Instance out = inst;
  for (double& v : out.x) v = round_to(v, digits);
  for (double& v : out.lambda)
    v = std::clamp(round_to(v, digits), 0.0, 1.0);
  if (out.c) out.c = round_to(*out.c, digits);

  auto round_all = [&](std::vector<double>& w) {
    for (double& v : w) v = round_to(v, digits);
  };
  switch (info.weights) {
    case WeightsShape::SimplexA:
      round_all(out.a);
      if (!weights_repairable(out.a)) return std::nullopt;
      renormalize(out.a);
      break;
    case WeightsShape::SteffensenA:
      round_all(out.a);
      break;
    case WeightsShape::PQPositive:
    case WeightsShape::PQStar:
      round_all(out.p);
      round_all(out.q);
      if (!weights_repairable(out.p) || !weights_repairable(out.q))
        return std::nullopt;
      renormalize(out.p);
      renormalize(out.q);
      break;
  }
  // Points must stay inside the domain and keep their ordering contract.
  for (double v : out.x)
    if (!out.spec.domain().contains(v)) return std::nullopt;
  return out;
}

bool same_instance(const Instance& a, const Instance& b) {
  return a.x == b.x && a.a == b.a && a.p == b.p && a.q == b.q &&
         a.lambda == b.lambda && a.c == b.c;
}

} // namespace

Counterexample shrink(const Counterexample& cex, const Tolerances& tol) {
  Counterexample current = cex;
  for (int iter = 0; iter < 400; ++iter) {
    bool progressed = false;

    for (std::size_t i = 0; i < current.instance.x.size(); ++i) {
      auto cand = drop_point(current.instance, current.theorem, i);
      if (!cand) continue;
      try {
        CheckOutcome out = check(*cand, current.theorem, tol);
        if (out.counterexample &&
            out.counterexample->violation >= current.violation) {
          current.instance = std::move(*cand);
          current.violation = out.counterexample->violation;
          ++current.shrink_steps;
          progressed = true;
          break;
        }
      } catch (const Error&) {
        // candidate broke a hypothesis: rejected
      }
    }
    if (progressed) continue;

    for (int digits = 0; digits <= 6 && !progressed; ++digits) {
      auto cand = round_instance(current.instance, current.theorem, digits);
      if (!cand || same_instance(*cand, current.instance)) continue;
      try {
        CheckOutcome out = check(*cand, current.theorem, tol);
        if (out.counterexample) {
          current.instance = std::move(*cand);
          current.violation = out.counterexample->violation;
          ++current.shrink_steps;
          progressed = true;
        }
      } catch (const Error&) {
      }
    }
    if (!progressed) break;
  }
  return current;
}

std::vector<std::pair<double, BoundReport>> sweep_lambda(
    const Instance& inst, TheoremId id, int grid_density,
    const Tolerances& tol) {
  if (!theorem_info(id).has_lambda) {
    std::ostringstream os;
    os << to_string(id) << " takes no lambda tuple";
    throw Error(os.str());
  }
  if (grid_density < 2) throw Error("sweep density must be >= 2");

  std::vector<std::pair<double, BoundReport>> rows;
  rows.reserve(static_cast<std::size_t>(grid_density));
  for (int j = 0; j < grid_density; ++j) {
    const double t =
        static_cast<double>(j) / static_cast<double>(grid_density - 1);
    Instance probe = inst;
    probe.lambda.assign(inst.x.size(), t);
    rows.emplace_back(t, evaluate_theorem(probe, id, tol));
  }
  return rows;
}

ProbeReport monotonicity_probe(const DModel& model, double z, int grid_density,
                               double tol) {
  if (grid_density < 2) throw Error("grid_density must be >= 2");
  if (!(z >= model.domain.lo && z < model.domain.hi))
    throw DomainError("probe point z must lie in [lo, hi)");

  const CertReport cert = certify_h_superadditive(
      model.fprime, model.phiprime, model.domain,
      std::min(grid_density, 64), 1e-9);
  if (!cert.passed) {
    std::ostringstream os;
    os << "hypothesis failed: f' is not Phi'-superadditive (min slack "
       << cert.min_slack << " at x=" << cert.worst_x << ", y=" << cert.worst_y
       << ")";
    throw HypothesisViolatedError(os.str());
  }

  auto D = [&](double y) {
    return model.f(y) - model.f(z) - model.fprime(z) * (y - z) -
           model.phi(std::abs(y - z));
  };
  auto grid = [&](double lo, double hi) {
    std::vector<double> g(static_cast<std::size_t>(grid_density));
    for (int i = 0; i < grid_density; ++i)
      g[static_cast<std::size_t>(i)] =
          lo + (hi - lo) * static_cast<double>(i) /
                   static_cast<double>(grid_density - 1);
    return g;
  };

  ProbeReport rep;
  rep.min_d = std::numeric_limits<double>::infinity();

  const auto left = grid(model.domain.lo, z);
  const auto right = grid(z, model.domain.hi);
  double prev = D(left.front());
  rep.min_d = std::min(rep.min_d, prev);
  ++rep.samples;
  for (std::size_t i = 1; i < left.size(); ++i) {
    const double cur = D(left[i]);
    rep.worst_left_rise = std::max(rep.worst_left_rise, cur - prev);
    rep.min_d = std::min(rep.min_d, cur);
    prev = cur;
    ++rep.samples;
  }
  prev = D(right.front());
  rep.min_d = std::min(rep.min_d, prev);
  ++rep.samples;
  for (std::size_t i = 1; i < right.size(); ++i) {
    const double cur = D(right[i]);
    rep.worst_right_drop = std::max(rep.worst_right_drop, prev - cur);
    rep.min_d = std::min(rep.min_d, cur);
    prev = cur;
    ++rep.samples;
  }

  rep.pass = rep.min_d >= -tol && rep.worst_left_rise <= tol &&
             rep.worst_right_drop <= tol;
  return rep;
}

ProbeReport monotonicity_probe(const FunctionSpec& spec, double z,
                               int grid_density, double tol) {
  DModel model{[&spec](double v) { return spec.value(v); },
               [&spec](double v) { return spec.derivative(v); },
               [&spec](double v) { return spec.modulus(v); },
               [&spec](double v) { return spec.modulus_derivative(v); },
               spec.domain()};
  return monotonicity_probe(model, z, grid_density, tol);
}

FuzzSummary run_campaign(const FuzzConfig& config) {
  if (config.trials < 1) throw Error("fuzz config needs trials >= 1");
  if (config.n_min < 2 || config.n_max < config.n_min)
    throw Error("fuzz config needs 2 <= n_min <= n_max");

  FuzzSummary summary;
  summary.config = config;

  const std::vector<TheoremId>& ids =
      config.theorems.empty() ? all_theorems() : config.theorems;
  for (TheoremId id : ids) {
    const TheoremInfo& info = theorem_info(id);
    if (!config.classes.empty() && info.required_class &&
        std::find(config.classes.begin(), config.classes.end(),
                  *info.required_class) == config.classes.end())
      continue;

    TheoremCampaign camp;
    camp.theorem = id;
    camp.min_slack = std::numeric_limits<double>::infinity();
    if (id == TheoremId::Thm13Minus)
      camp.note =
          "sign variant printed in the source statement; thm13 carries the "
          "substitution-rule sign, this id probes the printed one";

    for (int trial = 0; trial < config.trials; ++trial) {
      const Instance inst =
          generate(config, id, static_cast<std::uint64_t>(trial));
      CheckOutcome out = check(inst, id, config.tol);
      ++camp.trials;
      camp.min_slack = std::min(camp.min_slack, out.report.slack);
      camp.max_path_delta = std::max(camp.max_path_delta, out.path_delta);
      if (out.counterexample) {
        ++camp.confirmed;
        ++summary.total_confirmed;
        if (camp.counterexamples.size() < 10)
          camp.counterexamples.push_back(
              shrink(*out.counterexample, config.tol));
      }
    }
    summary.campaigns.push_back(std::move(camp));
  }
  return summary;
}

} // namespace jbound::oracle
