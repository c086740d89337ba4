#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jbound/errors.hpp"

namespace jbound {

// The four function classes the catalog certifies. The defining
// inequalities:
//
//   UniformlyConvex   t f(x) + (1-t) f(y) >= f(tx+(1-t)y) + t(1-t) Phi(|x-y|)
//   StronglyConvex    same, with Phi(d) = c d^2
//   PhiConvex         t f(x) + (1-t) f(y) + t Phi((1-t)|x-y|)
//                       + (1-t) Phi(t|x-y|) >= f(tx+(1-t)y)
//   Superquadratic    f(y) >= f(x) + C_x (y-x) + f(|y-x|)
enum class FunctionClass {
  UniformlyConvex,
  StronglyConvex,
  PhiConvex,
  Superquadratic,
};

std::string_view to_string(FunctionClass cls);
FunctionClass function_class_from_string(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

// A certified member of the catalog: evaluates f, f', Phi and Phi'.
//
// Catalog entries:
//   power(n)             f(x) = x^n on [lo,hi], lo >= 0, with Phi(d) = d^n
//   strong_quadratic(c)  f(x) = c x^2 with Phi(d) = c d^2
//   combination          nonnegative combination of atoms; modulus is the
//                        same combination of atom moduli, tags are the
//                        intersection of atom tags, domain the intersection
//                        of atom domains
class FunctionSpec {
public:
  enum class Kind { Power, StrongQuadratic, Combination };

  struct ComboTerm {
    double coeff;
    std::shared_ptr<const FunctionSpec> atom;
  };

  static FunctionSpec power(int n, Interval domain);
  static FunctionSpec strong_quadratic(double c, Interval domain);
  static FunctionSpec combination(std::vector<std::pair<double, FunctionSpec>> terms);

  // Formula evaluation; no domain check. Difference arguments |y-x| land
  // in [0, width] and every kind extends naturally there.
  double value(double x) const;
  double derivative(double x) const;
  double modulus(double d) const;
  double modulus_derivative(double d) const;

  // Domain-checked entry points.
  double evaluate(double x) const;
  double modulus_at(double d) const;

  const Interval& domain() const { return domain_; }
  const std::vector<FunctionClass>& class_tags() const { return tags_; }
  bool has_tag(FunctionClass cls) const;

  Kind kind() const { return kind_; }
  int power_exponent() const { return n_; }
  double strong_coefficient() const { return c_; }
  const std::vector<ComboTerm>& terms() const { return terms_; }

  std::string describe() const;

private:
  FunctionSpec() = default;

  Kind kind_ = Kind::Power;
  int n_ = 2;
  double c_ = 1.0;
  std::vector<ComboTerm> terms_;
  Interval domain_{0.0, 1.0};
  std::vector<FunctionClass> tags_;
};

// Choice of the tangent-line slope phi. Derivative means phi(u) = f'(u),
// legal for superquadratic catalog specs because their derivative is
// superadditive. A table interpolates linearly between sorted breakpoints.
class Subgradient {
public:
  Subgradient() = default;

  static Subgradient derivative() { return Subgradient{}; }
  static Subgradient table(std::vector<std::pair<double, double>> points);

  bool is_derivative() const { return points_.empty(); }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

  double operator()(const FunctionSpec& spec, double u) const;

private:
  std::vector<std::pair<double, double>> points_; // empty => derivative rule
};

// Result of a grid certification sweep.
struct CertReport {
  std::string check;
  bool passed = false;
  double min_slack = 0.0;
  double worst_x = 0.0;
  double worst_y = 0.0;
  double worst_t = 0.0;
  std::size_t samples = 0;
  double tol_abs = 0.0;
};

// Samples the defining inequality of `cls` on a uniform grid (endpoints
// included) and reports the minimum slack. Passes iff min slack >= -tol_abs.
CertReport certify_class(const FunctionSpec& spec, FunctionClass cls,
                         int grid_density, double tol_abs = 1e-9,
                         const Subgradient& phi = {});

// Checks g(y) - g(x) >= H(y - x) over all grid pairs x <= y in `domain`.
// Used with g = f' and H = Phi' to validate the hypotheses of the
// D-function lemma and the refined functional bounds.
CertReport certify_h_superadditive(const std::function<double(double)>& g,
                                   const std::function<double(double)>& H,
                                   Interval domain, int grid_density,
                                   double tol_abs = 1e-9);

// Sign and gap function of the unified tangent inequality
//   f(x) - f(u) >= phi(u) (x-u) + sigma * G(|x-u|)
// per class: UniformlyConvex/StronglyConvex -> (+1, Phi),
// Superquadratic -> (+1, f), PhiConvex -> (-1, Phi).
double class_sigma(FunctionClass cls);
double class_gap(const FunctionSpec& spec, FunctionClass cls, double d);

// f(x) - f(u) - phi(u)(x-u) - sigma * G(|x-u|); nonnegative on certified
// (spec, class) combinations.
double tangent_slack(const FunctionSpec& spec, FunctionClass cls, double x,
                     double u, const Subgradient& phi = {});

} // namespace jbound
