#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jbound/convexity.hpp"
#include "jbound/weights.hpp"

namespace jbound {

// Every inequality chain the library evaluates, one id per checkable
// statement. The *_lower / *_upper pairs are the two sides of the
// two-sided functional refinements; thm13_minus is the sign variant of
// thm13 with the gap term subtracted instead of added (implemented so the
// fuzzer can probe which sign holds empirically; thm13 itself uses the
// substitution-rule sign).
enum class TheoremId {
  Thm1Chain,
  Thm1Tangent,
  Thm3,
  Thm4Lower,
  Thm4Upper,
  Thm5,
  Thm6Tangent,
  Thm6Mean,
  Thm6Phi,
  Thm7,
  Thm8,
  Thm9,
  Thm10,
  Thm11,
  Thm12,
  Thm13,
  Thm13Minus,
  Thm14,
  Thm15,
  Thm16,
  Thm17,
  Thm18,
  Thm19Lower,
  Thm19Upper,
  Thm20Lower,
  Thm20Upper,
};

std::string_view to_string(TheoremId id);
TheoremId theorem_from_string(std::string_view name);
const std::vector<TheoremId>& all_theorems();

// How a theorem consumes its weight input.
enum class WeightsShape {
  SimplexA,    // one simplex tuple a
  SteffensenA, // one Jensen-Steffensen tuple a
  PQPositive,  // simplex p and q, q strictly positive
  PQStar,      // p with prefix sums in [0,1], q with strictly interior prefixes
};

struct TheoremInfo {
  TheoremId id;
  std::string_view name;
  WeightsShape weights;
  bool needs_sorted_x;
  bool has_lambda;
  bool uses_c;
  // Class the instance must declare; nullopt means any catalog spec.
  std::optional<FunctionClass> required_class;
};

const TheoremInfo& theorem_info(TheoremId id);

struct Tolerances {
  double abs = 1e-9;
  double rel = 1e-9;

  // Minimum admissible slack for a chain whose terms have this magnitude.
  double floor(double scale) const { return -(abs + rel * scale); }
};

// A complete problem: function, sample points, weights (single tuple or a
// (p, q) pair), optional lambda tuple, optional tangent point c, and the
// subgradient rule. Weight vectors are raw; the bound operations validate
// them against the mode a theorem needs.
struct Instance {
  FunctionSpec spec = FunctionSpec::power(2, {0.0, 1.0});
  FunctionClass cls = FunctionClass::UniformlyConvex;
  std::vector<double> x;
  std::vector<double> a;
  WeightMode a_mode = WeightMode::Simplex;
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> lambda;
  std::optional<double> c;
  Subgradient phi;
};

// Computed left/middle/right values of one theorem's inequality chain.
// slack is the amount by which the claimed chain holds (minimum over its
// links); pass == (slack >= -tol at the chain's scale). terms carries
// every named summand so a violation can be localized.
struct BoundReport {
  TheoremId theorem = TheoremId::Thm3;
  double lhs = 0.0;
  std::optional<double> mid;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
  std::vector<std::pair<std::string, double>> terms;
  std::string note;

  double term(std::string_view name) const;
};

enum class Side { Lower, Upper };

// J_n(f, x, w) = sum w_i f(x_i) - f(sum w_i x_i), compensated.
double jensen_functional(const FunctionSpec& spec, std::span<const double> x,
                         std::span<const double> w);

// D(y) = f(y) - f(z) - f'(z)(y - z) - Phi(|y - z|). Nonnegative and
// V-shaped around z when f' is Phi'-superadditive.
double d_function(const FunctionSpec& spec, double z, double y);

// Steffensen-weighted tangent bound at c (defaults to the weighted mean):
//   f(c) + f'(c)(xbar - c) + mean_a Phi(|x_i - c|)  <=  mean_a f(x_i)
BoundReport steffensen_refined_bound(const Instance& inst,
                                     const Tolerances& tol = {});

// Convex-Phi two-sided chain:
//   mean_a f(x_i) - f(c) - f'(c)(xbar - c) >= mean_a Phi(|x_i - c|) >= 0,
// with the Abel decomposition of the Phi sum exposed term by term.
BoundReport steffensen_convex_phi_bound(const Instance& inst,
                                        const Tolerances& tol = {});

// Abel-summation decomposition of sum a_i Phi(|x_i - c|) around c.
std::vector<std::pair<std::string, double>> abel_phi_terms(
    const FunctionSpec& spec, std::span<const double> x, const WeightTuple& a,
    double c);

// Three-level absolute-value chain (the sandwich) and its lambda-scaled
// variant. The unscaled form evaluates the scaled template at lambda = 0,
// so the reduction is exact by construction.
BoundReport sandwich_chain(const Instance& inst, const Tolerances& tol = {});
BoundReport lambda_sandwich(const Instance& inst, const Tolerances& tol = {});

// Tangent counterpart of the Jensen inequality and its lambda variant.
BoundReport tangent_upper_bound(const Instance& inst,
                                const Tolerances& tol = {});
BoundReport lambda_tangent_upper(const Instance& inst,
                                 const Tolerances& tol = {});

// M J(q) >= J(p) >= m J(q) with pointwise ratio factors.
BoundReport dragomir_sandwich(const Instance& inst, const Tolerances& tol = {});

// M* J(q) >= J(p) >= m* J(q) with prefix/suffix ratio factors after
// increasing rearrangement.
BoundReport star_sandwich(const Instance& inst, const Tolerances& tol = {});

// The (n+1)-tuple constructions behind the refined functional bounds:
// inserts the q-mean (Lower, factor = m*) or the p-mean (Upper,
// factor = M*) into sorted x and builds the matching weight tuple.
struct ExtendedTuple {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t insert_index = 0; // 0-based position of the inserted point
};

ExtendedTuple extend_tuple(std::span<const double> x_sorted,
                           std::span<const double> p,
                           std::span<const double> q, double factor, Side side);

// Refined difference of two Jensen functionals with star factors:
// G = f on the superquadratic route, G = Phi on the uniformly convex route.
// The refinement term is reported separately from the cross term.
BoundReport functional_refinement(const Instance& inst, Side side,
                                  const Tolerances& tol = {});

// Same shape with the pointwise factors m, M and positive simplex q;
// superquadratic route only.
BoundReport dragomir_refinement(const Instance& inst, Side side,
                                const Tolerances& tol = {});

// Dispatch by theorem id; validates the instance against the theorem's
// hypotheses first.
BoundReport evaluate_theorem(const Instance& inst, TheoremId id,
                             const Tolerances& tol = {});

} // namespace jbound
