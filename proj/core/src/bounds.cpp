#include "jbound/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "jbound/stable_sum.hpp"

namespace jbound {

namespace {

constexpr std::array<TheoremInfo, 26> kTheorems{{
    {TheoremId::Thm1Chain, "thm1_chain", WeightsShape::SimplexA, false, true,
     false, FunctionClass::StronglyConvex},
    {TheoremId::Thm1Tangent, "thm1_tangent", WeightsShape::SimplexA, false,
     true, false, FunctionClass::StronglyConvex},
    {TheoremId::Thm3, "thm3", WeightsShape::PQPositive, false, false, false,
     std::nullopt},
    {TheoremId::Thm4Lower, "thm4_lower", WeightsShape::PQPositive, false,
     false, false, FunctionClass::Superquadratic},
    {TheoremId::Thm4Upper, "thm4_upper", WeightsShape::PQPositive, false,
     false, false, FunctionClass::Superquadratic},
    {TheoremId::Thm5, "thm5", WeightsShape::PQStar, false, false, false,
     std::nullopt},
    {TheoremId::Thm6Tangent, "thm6_tangent", WeightsShape::SteffensenA, true,
     false, true, std::nullopt},
    {TheoremId::Thm6Mean, "thm6_mean", WeightsShape::SteffensenA, true, false,
     false, std::nullopt},
    {TheoremId::Thm6Phi, "thm6_phi", WeightsShape::SteffensenA, true, false,
     true, std::nullopt},
    {TheoremId::Thm7, "thm7", WeightsShape::SimplexA, false, false, false,
     FunctionClass::UniformlyConvex},
    {TheoremId::Thm8, "thm8", WeightsShape::SimplexA, false, true, false,
     FunctionClass::UniformlyConvex},
    {TheoremId::Thm9, "thm9", WeightsShape::SimplexA, false, false, false,
     FunctionClass::UniformlyConvex},
    {TheoremId::Thm10, "thm10", WeightsShape::SimplexA, false, true, false,
     FunctionClass::UniformlyConvex},
    {TheoremId::Thm11, "thm11", WeightsShape::SimplexA, false, false, false,
     FunctionClass::PhiConvex},
    {TheoremId::Thm12, "thm12", WeightsShape::SimplexA, false, true, false,
     FunctionClass::PhiConvex},
    {TheoremId::Thm13, "thm13", WeightsShape::SimplexA, false, false, false,
     FunctionClass::PhiConvex},
    {TheoremId::Thm13Minus, "thm13_minus", WeightsShape::SimplexA, false,
     false, false, FunctionClass::PhiConvex},
    {TheoremId::Thm14, "thm14", WeightsShape::SimplexA, false, true, false,
     FunctionClass::PhiConvex},
    {TheoremId::Thm15, "thm15", WeightsShape::SimplexA, false, false, false,
     FunctionClass::Superquadratic},
    {TheoremId::Thm16, "thm16", WeightsShape::SimplexA, false, true, false,
     FunctionClass::Superquadratic},
    {TheoremId::Thm17, "thm17", WeightsShape::SimplexA, false, false, false,
     FunctionClass::Superquadratic},
    {TheoremId::Thm18, "thm18", WeightsShape::SimplexA, false, true, false,
     FunctionClass::Superquadratic},
    {TheoremId::Thm19Lower, "thm19_lower", WeightsShape::PQStar, true, false,
     false, FunctionClass::Superquadratic},
    {TheoremId::Thm19Upper, "thm19_upper", WeightsShape::PQStar, true, false,
     false, FunctionClass::Superquadratic},
    {TheoremId::Thm20Lower, "thm20_lower", WeightsShape::PQStar, true, false,
     false, FunctionClass::UniformlyConvex},
    {TheoremId::Thm20Upper, "thm20_upper", WeightsShape::PQStar, true, false,
     false, FunctionClass::UniformlyConvex},
}};

void check_domain(const FunctionSpec& spec, std::span<const double> x) {
  for (double v : x)
    if (!spec.domain().contains(v)) {
      std::ostringstream os;
      os << "sample point " << v << " outside domain [" << spec.domain().lo
         << ", " << spec.domain().hi << "]";
      throw DomainError(os.str());
    }
}

bool is_sorted_nondecreasing(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] < x[i - 1]) return false;
  return true;
}

WeightTuple hypothesis_weights(const std::vector<double>& values,
                               WeightMode mode, const char* which) {
  try {
    return WeightTuple::validate(values, mode);
  } catch (const InvalidWeightsError& e) {
    std::ostringstream os;
    os << "hypothesis failed on " << which << " (" << to_string(mode)
       << "): " << e.what();
    throw HypothesisViolatedError(os.str());
  }
}

std::span<const double> lambda_or_throw(const Instance& inst) {
  if (inst.lambda.empty())
    throw BadLambdaError("lambda tuple required but missing");
  if (inst.lambda.size() != inst.x.size())
    throw BadLambdaError("lambda tuple length differs from x");
  for (double l : inst.lambda)
    if (!(l >= 0.0 && l <= 1.0))
      throw BadLambdaError("lambda entries must lie in [0, 1]");
  return inst.lambda;
}

void require_class_tag(const Instance& inst) {
  if (!inst.spec.has_tag(inst.cls)) {
    std::ostringstream os;
    os << inst.spec.describe() << " does not carry class "
       << to_string(inst.cls);
    throw UnsupportedClassError(os.str());
  }
  if (inst.cls == FunctionClass::Superquadratic && inst.spec.domain().lo < 0.0)
    throw UnsupportedClassError(
        "superquadratic instances need a nonnegative domain");
}

// mean over a of term(i), compensated, divided by the total weight.
template <typename F>
double mean_sum(const WeightTuple& a, F&& term) {
  StableSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * term(i));
  return s.get() / a.total();
}

double finish(BoundReport& rep, double slack, double scale,
              const Tolerances& tol) {
  rep.slack = slack;
  rep.pass = slack >= tol.floor(scale);
  return slack;
}

TheoremId chain_id_for(FunctionClass cls, bool lambda) {
  switch (cls) {
    case FunctionClass::StronglyConvex: return TheoremId::Thm1Chain;
    case FunctionClass::UniformlyConvex:
      return lambda ? TheoremId::Thm8 : TheoremId::Thm7;
    case FunctionClass::PhiConvex:
      return lambda ? TheoremId::Thm12 : TheoremId::Thm11;
    case FunctionClass::Superquadratic:
      return lambda ? TheoremId::Thm16 : TheoremId::Thm15;
  }
  return TheoremId::Thm7;
}

TheoremId tangent_id_for(FunctionClass cls, bool lambda) {
  switch (cls) {
    case FunctionClass::StronglyConvex: return TheoremId::Thm1Tangent;
    case FunctionClass::UniformlyConvex:
      return lambda ? TheoremId::Thm10 : TheoremId::Thm9;
    case FunctionClass::PhiConvex:
      return lambda ? TheoremId::Thm14 : TheoremId::Thm13;
    case FunctionClass::Superquadratic:
      return lambda ? TheoremId::Thm18 : TheoremId::Thm17;
  }
  return TheoremId::Thm9;
}

// Shared evaluation of the three-level sandwich. The unscaled theorems run
// this with lambda = 0, which keeps the lambda->0 reduction bitwise exact.
BoundReport chain_eval(const Instance& inst, std::span<const double> lambda,
                       TheoremId stamp, const Tolerances& tol) {
  require_class_tag(inst);
  check_domain(inst.spec, inst.x);
  const WeightTuple a = hypothesis_weights(inst.a, WeightMode::Simplex, "a");
  if (a.size() != inst.x.size())
    throw LengthMismatchError("x and a must have equal length");

  const FunctionSpec& f = inst.spec;
  const double sigma = class_sigma(inst.cls);
  const double xbar = weighted_mean(inst.x, a);

  auto xhat = [&](std::size_t i) {
    return (1.0 - lambda[i]) * xbar + lambda[i] * inst.x[i];
  };
  auto scaled_dev = [&](std::size_t i) {
    return (1.0 - lambda[i]) * std::abs(xbar - inst.x[i]);
  };

  // Tangent term in (x_i - xbar) orientation: x_i - xhat_i =
  // (1 - lambda_i)(x_i - xbar), which is what the pointwise tangent
  // inequality at xhat_i produces and what closes the x^2 equality case.
  const double sum_f = mean_sum(a, [&](std::size_t i) { return f.value(inst.x[i]); });
  const double sum_fh = mean_sum(a, [&](std::size_t i) { return f.value(xhat(i)); });
  const double sum_tan = mean_sum(a, [&](std::size_t i) {
    return (1.0 - lambda[i]) * inst.phi(f, xhat(i)) * (inst.x[i] - xbar);
  });
  const double sum_gap = mean_sum(a, [&](std::size_t i) {
    return class_gap(f, inst.cls, scaled_dev(i));
  });
  const double upper = sum_f - sum_fh - sum_tan - sigma * sum_gap;

  const double abs_direct = mean_sum(a, [&](std::size_t i) {
    return std::abs(f.value(inst.x[i]) - f.value(xhat(i)) -
                    sigma * class_gap(f, inst.cls, scaled_dev(i)));
  });
  const double abs_tangent = mean_sum(a, [&](std::size_t i) {
    return (1.0 - lambda[i]) * std::abs(inst.phi(f, xhat(i))) *
           std::abs(xbar - inst.x[i]);
  });
  const double middle = std::abs(abs_direct - abs_tangent);

  BoundReport rep;
  rep.theorem = stamp;
  rep.lhs = 0.0;
  rep.mid = middle;
  rep.rhs = upper;
  rep.terms = {{"x_bar", xbar},
               {"mean_f", sum_f},
               {"mean_f_hat", sum_fh},
               {"tangent_sum", sum_tan},
               {"gap_sum", sum_gap},
               {"abs_level_direct", abs_direct},
               {"abs_level_tangent", abs_tangent}};
  const double scale =
      std::max({std::abs(sum_f), std::abs(sum_fh), std::abs(sum_gap),
                std::abs(sum_tan), abs_direct, abs_tangent});
  finish(rep, std::min(middle, upper - middle), scale, tol);
  return rep;
}

BoundReport tangent_eval(const Instance& inst, std::span<const double> lambda,
                         bool force_minus_gap, TheoremId stamp,
                         const Tolerances& tol) {
  require_class_tag(inst);
  check_domain(inst.spec, inst.x);
  const WeightTuple a = hypothesis_weights(inst.a, WeightMode::Simplex, "a");
  if (a.size() != inst.x.size())
    throw LengthMismatchError("x and a must have equal length");

  const FunctionSpec& f = inst.spec;
  const double sigma = force_minus_gap ? 1.0 : class_sigma(inst.cls);
  const double xbar = weighted_mean(inst.x, a);

  auto xhat = [&](std::size_t i) {
    return (1.0 - lambda[i]) * xbar + lambda[i] * inst.x[i];
  };

  const double sum_f = mean_sum(a, [&](std::size_t i) { return f.value(inst.x[i]); });
  const double sum_fh = mean_sum(a, [&](std::size_t i) { return f.value(xhat(i)); });
  const double sum_tan = mean_sum(a, [&](std::size_t i) {
    return (1.0 - lambda[i]) * inst.phi(f, inst.x[i]) * (inst.x[i] - xbar);
  });
  const double sum_gap = mean_sum(a, [&](std::size_t i) {
    return class_gap(f, inst.cls, (1.0 - lambda[i]) * std::abs(xbar - inst.x[i]));
  });

  BoundReport rep;
  rep.theorem = stamp;
  rep.lhs = sum_f - sum_fh;
  rep.rhs = sum_tan - sigma * sum_gap;
  rep.terms = {{"x_bar", xbar},
               {"mean_f", sum_f},
               {"mean_f_hat", sum_fh},
               {"tangent_sum", sum_tan},
               {"gap_sum", sum_gap}};
  if (force_minus_gap)
    rep.note = "paper-printed sign variant; thm13 carries the substitution-rule sign";
  const double scale = std::max({std::abs(sum_f), std::abs(sum_fh),
                                 std::abs(sum_tan), std::abs(sum_gap)});
  finish(rep, rep.rhs - rep.lhs, scale, tol);
  return rep;
}

std::vector<double> zeros_like(const std::vector<double>& x) {
  return std::vector<double>(x.size(), 0.0);
}

} // namespace

std::string_view to_string(TheoremId id) {
  for (const auto& info : kTheorems)
    if (info.id == id) return info.name;
  return "?";
}

TheoremId theorem_from_string(std::string_view name) {
  if (name == "thm6") return TheoremId::Thm6Tangent;
  for (const auto& info : kTheorems)
    if (info.name == name) return info.id;
  throw ParseError("unknown theorem id '" + std::string(name) + "'");
}

const std::vector<TheoremId>& all_theorems() {
  static const std::vector<TheoremId> ids = [] {
    std::vector<TheoremId> v;
    for (const auto& info : kTheorems) v.push_back(info.id);
    return v;
  }();
  return ids;
}

const TheoremInfo& theorem_info(TheoremId id) {
  for (const auto& info : kTheorems)
    if (info.id == id) return info;
  throw Error("unknown theorem id");
}

double BoundReport::term(std::string_view name) const {
  for (const auto& [k, v] : terms)
    if (k == name) return v;
  throw Error("report has no term named '" + std::string(name) + "'");
}

double jensen_functional(const FunctionSpec& spec, std::span<const double> x,
                         std::span<const double> w) {
  if (x.size() != w.size())
    throw LengthMismatchError("jensen_functional requires equal-length tuples");
  check_domain(spec, x);
  StableSum mean;
  StableSum fsum;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean.add(w[i] * x[i]);
    fsum.add(w[i] * spec.value(x[i]));
  }
  return fsum.get() - spec.value(mean.get());
}

double d_function(const FunctionSpec& spec, double z, double y) {
  if (!spec.domain().contains(z) || !spec.domain().contains(y))
    throw DomainError("d_function arguments outside domain");
  return spec.value(y) - spec.value(z) - spec.derivative(z) * (y - z) -
         spec.modulus(std::abs(y - z));
}

namespace {

struct SteffensenParts {
  WeightTuple a;
  double xbar;
  double c;
  double f_mean;
  double phi_mean;
  double f_c;
  double tangent;
};

SteffensenParts steffensen_parts(const Instance& inst, bool force_mean_c) {
  check_domain(inst.spec, inst.x);
  if (!is_sorted_nondecreasing(inst.x))
    throw HypothesisViolatedError("hypothesis failed: x must be nondecreasing");
  WeightTuple a = hypothesis_weights(inst.a, WeightMode::Steffensen, "a");
  if (a.size() != inst.x.size())
    throw LengthMismatchError("x and a must have equal length");

  SteffensenParts parts{std::move(a), 0, 0, 0, 0, 0, 0};
  parts.xbar = weighted_mean(inst.x, parts.a);
  parts.c = force_mean_c ? parts.xbar : inst.c.value_or(parts.xbar);
  if (!inst.spec.domain().contains(parts.c))
    throw HypothesisViolatedError("hypothesis failed: c outside domain");

  const FunctionSpec& f = inst.spec;
  parts.f_mean =
      mean_sum(parts.a, [&](std::size_t i) { return f.value(inst.x[i]); });
  parts.phi_mean = mean_sum(parts.a, [&](std::size_t i) {
    return f.modulus(std::abs(inst.x[i] - parts.c));
  });
  parts.f_c = f.value(parts.c);
  parts.tangent = f.derivative(parts.c) * (parts.xbar - parts.c);
  return parts;
}

} // namespace

BoundReport steffensen_refined_bound(const Instance& inst,
                                     const Tolerances& tol) {
  const bool mean_c = !inst.c.has_value();
  SteffensenParts parts = steffensen_parts(inst, mean_c);

  BoundReport rep;
  rep.theorem = mean_c ? TheoremId::Thm6Mean : TheoremId::Thm6Tangent;
  rep.lhs = parts.f_c + parts.tangent + parts.phi_mean;
  rep.rhs = parts.f_mean;
  rep.terms = {{"x_bar", parts.xbar},   {"c", parts.c},
               {"f_c", parts.f_c},      {"tangent_term", parts.tangent},
               {"phi_mean", parts.phi_mean}, {"f_mean", parts.f_mean}};
  const double scale =
      std::max({std::abs(parts.f_c), std::abs(parts.tangent),
                std::abs(parts.phi_mean), std::abs(parts.f_mean)});
  finish(rep, rep.rhs - rep.lhs, scale, tol);
  return rep;
}

std::vector<std::pair<std::string, double>> abel_phi_terms(
    const FunctionSpec& spec, std::span<const double> x, const WeightTuple& a,
    double c) {
  const std::size_t n = x.size();
  // k = number of points <= c; k == 0 and k == n are the one-sided cases.
  std::size_t k = 0;
  while (k < n && x[k] <= c) ++k;

  auto phi = [&](double d) { return spec.modulus(d); };
  std::vector<std::pair<std::string, double>> terms;
  auto emit = [&](double v) {
    terms.emplace_back("abel_" + std::to_string(terms.size()), v);
  };

  // Prefix block: i = 1..k-1 uses A_i, plus the anchor A_k Phi(c - x_k).
  for (std::size_t i = 1; i + 1 <= k; ++i)
    emit(a.prefix(i) * (phi(c - x[i - 1]) - phi(c - x[i])));
  if (k >= 1) emit(a.prefix(k) * phi(c - x[k - 1]));
  // Suffix block: anchor Abar_{k+1} Phi(x_{k+1} - c), then i = k+2..n.
  if (k < n) emit(a.suffix(k) * phi(x[k] - c));
  for (std::size_t i = k + 2; i <= n; ++i)
    emit(a.suffix(i - 1) * (phi(x[i - 1] - c) - phi(x[i - 2] - c)));
  return terms;
}

BoundReport steffensen_convex_phi_bound(const Instance& inst,
                                        const Tolerances& tol) {
  SteffensenParts parts = steffensen_parts(inst, false);

  const double gap = parts.f_mean - parts.f_c - parts.tangent;

  BoundReport rep;
  rep.theorem = TheoremId::Thm6Phi;
  rep.lhs = 0.0;
  rep.mid = parts.phi_mean;
  rep.rhs = gap;
  rep.terms = {{"x_bar", parts.xbar},   {"c", parts.c},
               {"f_c", parts.f_c},      {"tangent_term", parts.tangent},
               {"phi_mean", parts.phi_mean}, {"f_mean", parts.f_mean},
               {"gap", gap}};

  auto abel = abel_phi_terms(inst.spec, inst.x, parts.a, parts.c);
  StableSum abel_sum;
  for (const auto& [name, v] : abel) abel_sum.add(v);
  rep.terms.emplace_back("abel_total", abel_sum.get());
  rep.terms.insert(rep.terms.end(), abel.begin(), abel.end());

  if (parts.c < inst.x.front())
    rep.note = "c_case=left";
  else if (parts.c > inst.x.back())
    rep.note = "c_case=right";
  else
    rep.note = "c_case=interior";

  const double scale =
      std::max({std::abs(parts.f_c), std::abs(parts.tangent),
                std::abs(parts.phi_mean), std::abs(parts.f_mean)});
  finish(rep, std::min(parts.phi_mean, gap - parts.phi_mean), scale, tol);
  return rep;
}

BoundReport sandwich_chain(const Instance& inst, const Tolerances& tol) {
  return chain_eval(inst, zeros_like(inst.x), chain_id_for(inst.cls, false),
                    tol);
}

BoundReport lambda_sandwich(const Instance& inst, const Tolerances& tol) {
  return chain_eval(inst, lambda_or_throw(inst), chain_id_for(inst.cls, true),
                    tol);
}

BoundReport tangent_upper_bound(const Instance& inst, const Tolerances& tol) {
  return tangent_eval(inst, zeros_like(inst.x), false,
                      tangent_id_for(inst.cls, false), tol);
}

BoundReport lambda_tangent_upper(const Instance& inst, const Tolerances& tol) {
  return tangent_eval(inst, lambda_or_throw(inst), false,
                      tangent_id_for(inst.cls, true), tol);
}

BoundReport dragomir_sandwich(const Instance& inst, const Tolerances& tol) {
  check_domain(inst.spec, inst.x);
  const WeightTuple p = hypothesis_weights(inst.p, WeightMode::Simplex, "p");
  const WeightTuple q = hypothesis_weights(inst.q, WeightMode::Simplex, "q");
  if (p.size() != inst.x.size() || q.size() != inst.x.size())
    throw LengthMismatchError("x, p, q must have equal length");
  const Factors f = dragomir_factors(p.values(), q.values());

  const double jp = jensen_functional(inst.spec, inst.x, p.values());
  const double jq = jensen_functional(inst.spec, inst.x, q.values());

  BoundReport rep;
  rep.theorem = TheoremId::Thm3;
  rep.lhs = f.lo * jq;
  rep.mid = jp;
  rep.rhs = f.hi * jq;
  rep.terms = {{"m", f.lo}, {"M", f.hi}, {"jensen_p", jp}, {"jensen_q", jq}};
  const double scale = std::max({std::abs(jp), std::abs(f.lo * jq),
                                 std::abs(f.hi * jq)});
  finish(rep, std::min(jp - f.lo * jq, f.hi * jq - jp), scale, tol);
  return rep;
}

BoundReport star_sandwich(const Instance& inst, const Tolerances& tol) {
  check_domain(inst.spec, inst.x);
  if (inst.p.size() != inst.x.size() || inst.q.size() != inst.x.size())
    throw LengthMismatchError("x, p, q must have equal length");
  const RearrangedPair pair = rearrange(inst.x, inst.p, inst.q);
  const Factors f = star_factors(pair);

  const double jp = jensen_functional(inst.spec, inst.x, inst.p);
  const double jq = jensen_functional(inst.spec, inst.x, inst.q);

  BoundReport rep;
  rep.theorem = TheoremId::Thm5;
  rep.lhs = f.lo * jq;
  rep.mid = jp;
  rep.rhs = f.hi * jq;
  rep.terms = {{"m_star", f.lo},
               {"M_star", f.hi},
               {"jensen_p", jp},
               {"jensen_q", jq}};
  const double scale = std::max({std::abs(jp), std::abs(f.lo * jq),
                                 std::abs(f.hi * jq)});
  finish(rep, std::min(jp - f.lo * jq, f.hi * jq - jp), scale, tol);
  return rep;
}

ExtendedTuple extend_tuple(std::span<const double> x_sorted,
                           std::span<const double> p,
                           std::span<const double> q, double factor,
                           Side side) {
  const std::size_t n = x_sorted.size();
  if (p.size() != n || q.size() != n)
    throw LengthMismatchError("x, p, q must have equal length");
  if (!is_sorted_nondecreasing(x_sorted))
    throw UnsortedInputError("extend_tuple needs nondecreasing x");
  if (n < 2) throw Error("extend_tuple needs n >= 2");

  std::span<const double> anchor_w = side == Side::Lower ? q : p;
  StableSum anchor_sum;
  for (std::size_t i = 0; i < n; ++i) anchor_sum.add(anchor_w[i] * x_sorted[i]);
  const double anchor = anchor_sum.get();

  // Smallest admissible insertion point: x[k-1] <= anchor <= x[k].
  std::size_t k = 1;
  while (k < n && x_sorted[k] < anchor) ++k;
  if (k >= n && x_sorted[n - 1] < anchor)
    throw NoInsertionPointError("weighted mean above the largest sample point");
  if (anchor < x_sorted[k - 1])
    throw NoInsertionPointError("weighted mean below the smallest interior point");

  ExtendedTuple out;
  out.insert_index = k;
  out.points.reserve(n + 1);
  out.weights.reserve(n + 1);
  for (std::size_t i = 0; i < k; ++i) out.points.push_back(x_sorted[i]);
  out.points.push_back(anchor);
  for (std::size_t i = k; i < n; ++i) out.points.push_back(x_sorted[i]);

  auto side_weight = [&](std::size_t i) {
    return side == Side::Lower ? p[i] - factor * q[i]
                               : q[i] - p[i] / factor;
  };
  const double inserted = side == Side::Lower ? factor : 1.0 / factor;
  for (std::size_t i = 0; i < k; ++i) out.weights.push_back(side_weight(i));
  out.weights.push_back(inserted);
  for (std::size_t i = k; i < n; ++i) out.weights.push_back(side_weight(i));
  return out;
}

namespace {

BoundReport refinement_eval(const Instance& inst, Side side, double factor_lo,
                            double factor_hi, TheoremId stamp,
                            const Tolerances& tol) {
  const FunctionSpec& f = inst.spec;
  const bool phi_route = stamp == TheoremId::Thm20Lower ||
                         stamp == TheoremId::Thm20Upper;
  auto G = [&](double d) {
    return phi_route ? f.modulus(d) : f.value(d);
  };

  const std::size_t n = inst.x.size();
  const double jp = jensen_functional(f, inst.x, inst.p);
  const double jq = jensen_functional(f, inst.x, inst.q);

  StableSum mean_p_sum;
  StableSum mean_q_sum;
  StableSum cross_sum;
  for (std::size_t i = 0; i < n; ++i) {
    mean_p_sum.add(inst.p[i] * inst.x[i]);
    mean_q_sum.add(inst.q[i] * inst.x[i]);
    cross_sum.add((inst.q[i] - inst.p[i]) * inst.x[i]);
  }
  const double mean_p = mean_p_sum.get();
  const double mean_q = mean_q_sum.get();
  const double cross = G(std::abs(cross_sum.get()));

  BoundReport rep;
  rep.theorem = stamp;
  double scale;
  if (side == Side::Lower) {
    const double m = factor_lo;
    StableSum refine;
    for (std::size_t i = 0; i < n; ++i)
      refine.add((inst.p[i] - m * inst.q[i]) * G(std::abs(inst.x[i] - mean_p)));
    rep.lhs = jp - m * jq;
    rep.rhs = m * cross + refine.get();
    rep.terms = {{"factor", m},
                 {"jensen_p", jp},
                 {"jensen_q", jq},
                 {"cross_term", cross},
                 {"refinement_sum", refine.get()},
                 {"mean_p", mean_p},
                 {"mean_q", mean_q}};
    scale = std::max({std::abs(jp), std::abs(m * jq), std::abs(rep.rhs)});
    finish(rep, rep.lhs - rep.rhs, scale, tol);
  } else {
    const double M = factor_hi;
    StableSum refine;
    for (std::size_t i = 0; i < n; ++i)
      refine.add((M * inst.q[i] - inst.p[i]) * G(std::abs(inst.x[i] - mean_q)));
    rep.lhs = jp - M * jq;
    rep.rhs = -refine.get() - cross;
    rep.terms = {{"factor", M},
                 {"jensen_p", jp},
                 {"jensen_q", jq},
                 {"cross_term", cross},
                 {"refinement_sum", refine.get()},
                 {"mean_p", mean_p},
                 {"mean_q", mean_q}};
    scale = std::max({std::abs(jp), std::abs(M * jq), std::abs(rep.rhs)});
    finish(rep, rep.rhs - rep.lhs, scale, tol);
  }
  return rep;
}

} // namespace

BoundReport functional_refinement(const Instance& inst, Side side,
                                  const Tolerances& tol) {
  if (inst.cls != FunctionClass::Superquadratic &&
      inst.cls != FunctionClass::UniformlyConvex &&
      inst.cls != FunctionClass::StronglyConvex)
    throw UnsupportedClassError(
        "functional_refinement needs a superquadratic or uniformly convex "
        "instance");
  require_class_tag(inst);
  check_domain(inst.spec, inst.x);
  if (!is_sorted_nondecreasing(inst.x))
    throw HypothesisViolatedError("hypothesis failed: x must be nondecreasing");
  if (inst.p.size() != inst.x.size() || inst.q.size() != inst.x.size())
    throw LengthMismatchError("x, p, q must have equal length");

  RearrangedPair pair{std::vector<double>(inst.x.begin(), inst.x.end()),
                      {},
                      std::vector<double>(inst.p.begin(), inst.p.end()),
                      std::vector<double>(inst.q.begin(), inst.q.end())};
  const Factors f = star_factors(pair);

  const bool phi_route = inst.cls != FunctionClass::Superquadratic;
  const TheoremId stamp =
      phi_route ? (side == Side::Lower ? TheoremId::Thm20Lower
                                       : TheoremId::Thm20Upper)
                : (side == Side::Lower ? TheoremId::Thm19Lower
                                       : TheoremId::Thm19Upper);
  return refinement_eval(inst, side, f.lo, f.hi, stamp, tol);
}

BoundReport dragomir_refinement(const Instance& inst, Side side,
                                const Tolerances& tol) {
  if (inst.cls != FunctionClass::Superquadratic)
    throw UnsupportedClassError(
        "dragomir_refinement is the superquadratic route");
  require_class_tag(inst);
  check_domain(inst.spec, inst.x);
  hypothesis_weights(inst.p, WeightMode::Simplex, "p");
  hypothesis_weights(inst.q, WeightMode::Simplex, "q");
  if (inst.p.size() != inst.x.size() || inst.q.size() != inst.x.size())
    throw LengthMismatchError("x, p, q must have equal length");
  const Factors f = dragomir_factors(inst.p, inst.q);
  const TheoremId stamp =
      side == Side::Lower ? TheoremId::Thm4Lower : TheoremId::Thm4Upper;
  return refinement_eval(inst, side, f.lo, f.hi, stamp, tol);
}

BoundReport evaluate_theorem(const Instance& inst, TheoremId id,
                             const Tolerances& tol) {
  const TheoremInfo& info = theorem_info(id);
  if (info.required_class && inst.cls != *info.required_class) {
    std::ostringstream os;
    os << info.name << " requires class " << to_string(*info.required_class)
       << ", instance declares " << to_string(inst.cls);
    throw UnsupportedClassError(os.str());
  }

  BoundReport rep;
  switch (id) {
    case TheoremId::Thm1Chain:
      rep = lambda_sandwich(inst, tol);
      break;
    case TheoremId::Thm1Tangent:
      rep = lambda_tangent_upper(inst, tol);
      break;
    case TheoremId::Thm3:
      rep = dragomir_sandwich(inst, tol);
      break;
    case TheoremId::Thm4Lower:
      rep = dragomir_refinement(inst, Side::Lower, tol);
      break;
    case TheoremId::Thm4Upper:
      rep = dragomir_refinement(inst, Side::Upper, tol);
      break;
    case TheoremId::Thm5:
      rep = star_sandwich(inst, tol);
      break;
    case TheoremId::Thm6Tangent:
      rep = steffensen_refined_bound(inst, tol);
      break;
    case TheoremId::Thm6Mean: {
      Instance at_mean = inst;
      at_mean.c.reset();
      rep = steffensen_refined_bound(at_mean, tol);
      break;
    }
    case TheoremId::Thm6Phi:
      rep = steffensen_convex_phi_bound(inst, tol);
      break;
    case TheoremId::Thm7:
    case TheoremId::Thm11:
    case TheoremId::Thm15:
      rep = sandwich_chain(inst, tol);
      break;
    case TheoremId::Thm8:
    case TheoremId::Thm12:
    case TheoremId::Thm16:
      rep = lambda_sandwich(inst, tol);
      break;
    case TheoremId::Thm9:
    case TheoremId::Thm13:
    case TheoremId::Thm17:
      rep = tangent_upper_bound(inst, tol);
      break;
    case TheoremId::Thm13Minus:
      rep = tangent_eval(inst, std::vector<double>(inst.x.size(), 0.0), true,
                         TheoremId::Thm13Minus, tol);
      break;
    case TheoremId::Thm10:
    case TheoremId::Thm14:
    case TheoremId::Thm18:
      rep = lambda_tangent_upper(inst, tol);
      break;
    case TheoremId::Thm19Lower:
    case TheoremId::Thm20Lower:
      rep = functional_refinement(inst, Side::Lower, tol);
      break;
    case TheoremId::Thm19Upper:
    case TheoremId::Thm20Upper:
      rep = functional_refinement(inst, Side::Upper, tol);
      break;
  }
  rep.theorem = id;
  return rep;
}

} // namespace jbound
