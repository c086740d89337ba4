#include "jbound/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jbound {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

std::vector<double> uniform_grid(double lo, double hi, int density) {
  std::vector<double> g(static_cast<std::size_t>(density));
  for (int i = 0; i < density; ++i)
    g[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(density - 1);
  g.front() = lo;
  g.back() = hi;
  return g;
}

bool has(const std::vector<FunctionClass>& tags, FunctionClass c) {
  return std::find(tags.begin(), tags.end(), c) != tags.end();
}

} // namespace

std::string_view to_string(FunctionClass cls) {
  switch (cls) {
    case FunctionClass::UniformlyConvex: return "uniformly_convex";
    case FunctionClass::StronglyConvex: return "strongly_convex";
    case FunctionClass::PhiConvex: return "phi_convex";
    case FunctionClass::Superquadratic: return "superquadratic";
  }
  return "?";
}

FunctionClass function_class_from_string(std::string_view name) {
  if (name == "uniformly_convex") return FunctionClass::UniformlyConvex;
  if (name == "strongly_convex") return FunctionClass::StronglyConvex;
  if (name == "phi_convex") return FunctionClass::PhiConvex;
  if (name == "superquadratic") return FunctionClass::Superquadratic;
  throw ParseError("unknown function class '" + std::string(name) + "'");
}

FunctionSpec FunctionSpec::power(int n, Interval domain) {
  if (n < 2) throw Error("power spec requires integer exponent n >= 2");
  if (domain.lo < 0.0) throw Error("power spec requires a nonnegative domain");
  if (!(domain.lo < domain.hi)) throw Error("domain must satisfy lo < hi");
  FunctionSpec s;
  s.kind_ = Kind::Power;
  s.n_ = n;
  s.domain_ = domain;
  s.tags_ = {FunctionClass::UniformlyConvex, FunctionClass::PhiConvex,
             FunctionClass::Superquadratic};
  return s;
}

FunctionSpec FunctionSpec::strong_quadratic(double c, Interval domain) {
  if (!(c > 0.0)) throw Error("strong_quadratic spec requires c > 0");
  if (!(domain.lo < domain.hi)) throw Error("domain must satisfy lo < hi");
  FunctionSpec s;
  s.kind_ = Kind::StrongQuadratic;
  s.c_ = c;
  s.domain_ = domain;
  s.tags_ = {FunctionClass::StronglyConvex, FunctionClass::UniformlyConvex,
             FunctionClass::PhiConvex};
  if (domain.lo >= 0.0) s.tags_.push_back(FunctionClass::Superquadratic);
  return s;
}

FunctionSpec FunctionSpec::combination(
    std::vector<std::pair<double, FunctionSpec>> terms) {
  if (terms.empty()) throw Error("combination needs at least one term");
  Interval dom{-std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
  std::vector<FunctionClass> tags = terms.front().second.class_tags();
  for (const auto& [coeff, atom] : terms) {
    if (coeff < 0.0) throw Error("combination coefficients must be >= 0");
    dom.lo = std::max(dom.lo, atom.domain().lo);
    dom.hi = std::min(dom.hi, atom.domain().hi);
    std::erase_if(tags, [&](FunctionClass t) { return !atom.has_tag(t); });
  }
  if (!(dom.lo < dom.hi))
    throw Error("combination atoms have no common domain");
  FunctionSpec s;
  s.kind_ = Kind::Combination;
  s.domain_ = dom;
  s.tags_ = std::move(tags);
  s.terms_.reserve(terms.size());
  for (auto& [coeff, atom] : terms)
    s.terms_.push_back({coeff, std::make_shared<const FunctionSpec>(std::move(atom))});
  return s;
}

double FunctionSpec::value(double x) const {
  switch (kind_) {
    case Kind::Power: return ipow(x, n_);
    case Kind::StrongQuadratic: return c_ * x * x;
    case Kind::Combination: {
      double r = 0.0;
      for (const auto& t : terms_) r += t.coeff * t.atom->value(x);
      return r;
    }
  }
  return 0.0;
}

double FunctionSpec::derivative(double x) const {
  switch (kind_) {
    case Kind::Power: return static_cast<double>(n_) * ipow(x, n_ - 1);
    case Kind::StrongQuadratic: return 2.0 * c_ * x;
    case Kind::Combination: {
      double r = 0.0;
      for (const auto& t : terms_) r += t.coeff * t.atom->derivative(x);
      return r;
    }
  }
  return 0.0;
}

double FunctionSpec::modulus(double d) const {
  switch (kind_) {
    case Kind::Power: return ipow(d, n_);
    case Kind::StrongQuadratic: return c_ * d * d;
    case Kind::Combination: {
      double r = 0.0;
      for (const auto& t : terms_) r += t.coeff * t.atom->modulus(d);
      return r;
    }
  }
  return 0.0;
}

double FunctionSpec::modulus_derivative(double d) const {
  switch (kind_) {
    case Kind::Power: return static_cast<double>(n_) * ipow(d, n_ - 1);
    case Kind::StrongQuadratic: return 2.0 * c_ * d;
    case Kind::Combination: {
      double r = 0.0;
      for (const auto& t : terms_) r += t.coeff * t.atom->modulus_derivative(d);
      return r;
    }
  }
  return 0.0;
}

double FunctionSpec::evaluate(double x) const {
  if (!domain_.contains(x)) {
    std::ostringstream os;
    os << "x=" << x << " outside domain [" << domain_.lo << ", " << domain_.hi << "]";
    throw DomainError(os.str());
  }
  return value(x);
}

double FunctionSpec::modulus_at(double d) const {
  if (d < 0.0 || d > domain_.width()) {
    std::ostringstream os;
    os << "d=" << d << " outside modulus domain [0, " << domain_.width() << "]";
    throw DomainError(os.str());
  }
  return modulus(d);
}

bool FunctionSpec::has_tag(FunctionClass cls) const { return has(tags_, cls); }

std::string FunctionSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Power: os << "power(" << n_ << ")"; break;
    case Kind::StrongQuadratic: os << "strong_quadratic(c=" << c_ << ")"; break;
    case Kind::Combination: {
      os << "combo(";
      for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i) os << " + ";
        os << terms_[i].coeff << "*" << terms_[i].atom->describe();
      }
      os << ")";
      break;
    }
  }
  os << " on [" << domain_.lo << ", " << domain_.hi << "]";
  return os.str();
}

Subgradient Subgradient::table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw Error("subgradient table needs at least one point");
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Subgradient s;
  s.points_ = std::move(points);
  return s;
}

double Subgradient::operator()(const FunctionSpec& spec, double u) const {
  if (points_.empty()) return spec.derivative(u);
  if (u < points_.front().first || u > points_.back().first) {
    std::ostringstream os;
    os << "subgradient table does not cover u=" << u;
    throw DomainError(os.str());
  }
  auto it = std::lower_bound(
      points_.begin(), points_.end(), u,
      [](const auto& p, double v) { return p.first < v; });
  if (it->first == u) return it->second;
  auto hi = it;
  auto lo = it - 1;
  double w = (u - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

double class_sigma(FunctionClass cls) {
  return cls == FunctionClass::PhiConvex ? -1.0 : 1.0;
}

double class_gap(const FunctionSpec& spec, FunctionClass cls, double d) {
  return cls == FunctionClass::Superquadratic ? spec.value(d) : spec.modulus(d);
}

namespace {

void require_class_support(const FunctionSpec& spec, FunctionClass cls) {
  if (cls == FunctionClass::Superquadratic && spec.domain().lo < 0.0)
    throw UnsupportedClassError(
        "superquadratic check needs a nonnegative domain, got " + spec.describe());
}

} // namespace

CertReport certify_class(const FunctionSpec& spec, FunctionClass cls,
                         int grid_density, double tol_abs,
                         const Subgradient& phi) {
  if (grid_density < 2) throw Error("grid_density must be >= 2");
  require_class_support(spec, cls);

  CertReport rep;
  rep.check = "class:" + std::string(to_string(cls));
  rep.tol_abs = tol_abs;
  rep.min_slack = std::numeric_limits<double>::infinity();

  const auto xs = uniform_grid(spec.domain().lo, spec.domain().hi, grid_density);
  auto consider = [&](double slack, double x, double y, double t) {
    ++rep.samples;
    if (slack < rep.min_slack) {
      rep.min_slack = slack;
      rep.worst_x = x;
      rep.worst_y = y;
      rep.worst_t = t;
    }
  };

  if (cls == FunctionClass::Superquadratic) {
    for (double x : xs) {
      const double cx = phi(spec, x);
      for (double y : xs) {
        double slack =
            spec.value(y) - spec.value(x) - cx * (y - x) - spec.value(std::abs(y - x));
        consider(slack, x, y, 0.0);
      }
    }
  } else {
    const auto ts = uniform_grid(0.0, 1.0, grid_density);
    const bool phi_convex = cls == FunctionClass::PhiConvex;
    for (double x : xs) {
      for (double y : xs) {
        const double dxy = std::abs(x - y);
        for (double t : ts) {
          const double mixed = spec.value(t * x + (1.0 - t) * y);
          double slack;
          if (phi_convex) {
            slack = t * spec.value(x) + (1.0 - t) * spec.value(y) +
                    t * spec.modulus((1.0 - t) * dxy) +
                    (1.0 - t) * spec.modulus(t * dxy) - mixed;
          } else {
            slack = t * spec.value(x) + (1.0 - t) * spec.value(y) - mixed -
                    t * (1.0 - t) * spec.modulus(dxy);
          }
          consider(slack, x, y, t);
        }
      }
    }
  }

  rep.passed = rep.min_slack >= -tol_abs;
  return rep;
}

CertReport certify_h_superadditive(const std::function<double(double)>& g,
                                   const std::function<double(double)>& H,
                                   Interval domain, int grid_density,
                                   double tol_abs) {
  if (grid_density < 2) throw Error("grid_density must be >= 2");
  CertReport rep;
  rep.check = "h_superadditive";
  rep.tol_abs = tol_abs;
  rep.min_slack = std::numeric_limits<double>::infinity();

  const auto xs = uniform_grid(domain.lo, domain.hi, grid_density);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i; j < xs.size(); ++j) {
      const double x = xs[i];
      const double y = xs[j];
      const double slack = g(y) - g(x) - H(y - x);
      ++rep.samples;
      if (slack < rep.min_slack) {
        rep.min_slack = slack;
        rep.worst_x = x;
        rep.worst_y = y;
      }
    }
  }
  rep.passed = rep.min_slack >= -tol_abs;
  return rep;
}

double tangent_slack(const FunctionSpec& spec, FunctionClass cls, double x,
                     double u, const Subgradient& phi) {
  require_class_support(spec, cls);
  if (!spec.domain().contains(x) || !spec.domain().contains(u))
    throw DomainError("tangent_slack arguments outside domain");
  const double sigma = class_sigma(cls);
  return spec.value(x) - spec.value(u) - phi(spec, u) * (x - u) -
         sigma * class_gap(spec, cls, std::abs(x - u));
}

} // namespace jbound
