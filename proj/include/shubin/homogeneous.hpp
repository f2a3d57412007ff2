#ifndef SHUBIN_HOMOGENEOUS_HPP
#define SHUBIN_HOMOGENEOUS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "shubin/multi_index.hpp"
#include "shubin/scalar.hpp"

namespace shubin {

/// One term coef * z^monomial * (|z|^2)^(-radial_power) of a homogeneous
/// function on R^dim \ {0}. radial_power may be negative internally (a
/// positive power of |z|^2); the external symbol format restricts to s >= 0.
template <class Scalar>
struct SymbolTerm {
  Scalar coef{};
  MultiIndex monomial;
  Rational radial_power;  // s, any sign

  /// Homogeneity degree |monomial| - 2s as an exact rational.
  Rational degree() const { return Rational(monomial.weight()) - 2 * radial_power; }
};

/// Exactly homogeneous function: finite sum of monomial * radial-power terms,
/// all of one degree. Closed under +, *, and partial differentiation.
template <class Scalar>
class HomogeneousComponent {
 public:
  HomogeneousComponent() = default;
  HomogeneousComponent(std::size_t dim, int degree) : dim_(dim), degree_(degree) {}

  static HomogeneousComponent zero(std::size_t dim, int degree) {
    return HomogeneousComponent(dim, degree);
  }

  static HomogeneousComponent term(std::size_t dim, Scalar coef, MultiIndex mono,
                                   Rational radial_power = Rational(0)) {
    if (mono.size() != dim) throw std::invalid_argument("HomogeneousComponent: bad monomial size");
    Rational deg = Rational(mono.weight()) - 2 * radial_power;
    if (denominator(deg) != 1)
      throw std::invalid_argument("HomogeneousComponent: non-integer degree");
    HomogeneousComponent c(dim, static_cast<int>(numerator(deg)));
    c.terms_.push_back({std::move(coef), std::move(mono), std::move(radial_power)});
    c.normalize();
    return c;
  }

  static HomogeneousComponent constant(std::size_t dim, Scalar value) {
    return term(dim, std::move(value), MultiIndex(dim));
  }

  std::size_t dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<SymbolTerm<Scalar>>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(Scalar coef, MultiIndex mono, Rational radial_power = Rational(0)) {
    if (mono.size() != dim_) throw std::invalid_argument("add_term: bad monomial size");
    Rational deg = Rational(mono.weight()) - 2 * radial_power;
    if (deg != degree_) throw std::invalid_argument("add_term: degree mismatch");
    terms_.push_back({std::move(coef), std::move(mono), std::move(radial_power)});
    normalize();
  }

  std::complex<double> eval(std::span<const double> point) const {
    if (point.size() != dim_) throw std::invalid_argument("eval: wrong point dimension");
    double r2 = 0;
    for (double v : point) r2 += v * v;
    std::complex<double> acc = 0;
    for (const auto& t : terms_) {
      if (t.radial_power > 0 && r2 == 0)
        throw std::domain_error("eval: singular term at the origin");
      double mono = 1;
      for (std::size_t k = 0; k < dim_; ++k)
        for (int e = 0; e < t.monomial[k]; ++e) mono *= point[k];
      double rad = t.radial_power == 0 ? 1.0
                                       : std::pow(r2, -static_cast<double>(t.radial_power));
      acc += to_complex(t.coef) * (mono * rad);
    }
    return acc;
  }

  /// d/dz_axis, applying the product and chain rule on the term representation.
  HomogeneousComponent diff(std::size_t axis) const {
    if (axis >= dim_) throw std::invalid_argument("diff: axis out of range");
    HomogeneousComponent out(dim_, degree_ - 1);
    for (const auto& t : terms_) {
      if (t.monomial[axis] > 0) {
        Scalar c = t.coef * ScalarOps<Scalar>::from_rational(Rational(t.monomial[axis]));
        out.terms_.push_back({std::move(c), t.monomial.plus(axis, -1), t.radial_power});
      }
      if (t.radial_power != 0) {
        // d (|z|^2)^(-s) = -2 s z_axis (|z|^2)^(-s-1)
        Scalar c = t.coef * ScalarOps<Scalar>::from_rational(-2 * t.radial_power);
        out.terms_.push_back({std::move(c), t.monomial.plus(axis, +1), t.radial_power + 1});
      }
    }
    out.normalize();
    return out;
  }

  HomogeneousComponent diff(const MultiIndex& alpha) const {
    HomogeneousComponent out = *this;
    for (std::size_t k = 0; k < alpha.size(); ++k)
      for (int e = 0; e < alpha[k]; ++e) out = out.diff(k);
    return out;
  }

  friend HomogeneousComponent operator+(const HomogeneousComponent& a,
                                        const HomogeneousComponent& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.dim_ != b.dim_ || a.degree_ != b.degree_)
      throw std::invalid_argument("component +: mismatched dim or degree");
    HomogeneousComponent out = a;
    out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
    out.normalize();
    return out;
  }

  friend HomogeneousComponent operator*(const HomogeneousComponent& a,
                                        const HomogeneousComponent& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("component *: dim mismatch");
    HomogeneousComponent out(a.dim_, a.degree_ + b.degree_);
    for (const auto& s : a.terms_)
      for (const auto& t : b.terms_)
        out.terms_.push_back({s.coef * t.coef, s.monomial + t.monomial,
                              s.radial_power + t.radial_power});
    out.normalize();
    return out;
  }

  HomogeneousComponent scaled(const Scalar& c) const {
    HomogeneousComponent out = *this;
    for (auto& t : out.terms_) t.coef = t.coef * c;
    out.normalize();
    return out;
  }

  HomogeneousComponent negated() const {
    return scaled(ScalarOps<Scalar>::from_rational(Rational(-1)));
  }

  HomogeneousComponent pow(int k) const {
    if (k < 0) throw std::invalid_argument("pow: negative exponent");
    HomogeneousComponent out = constant(dim_, ScalarOps<Scalar>::one());
    for (int i = 0; i < k; ++i) out = out * *this;
    return out;
  }

  friend bool operator==(const HomogeneousComponent& a, const HomogeneousComponent& b) {
    if (a.dim_ != b.dim_) return false;
    if (a.terms_.empty() && b.terms_.empty()) return true;
    if (a.degree_ != b.degree_) return false;
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t k = 0; k < a.terms_.size(); ++k) {
      const auto& s = a.terms_[k];
      const auto& t = b.terms_[k];
      if (!(s.monomial == t.monomial) || s.radial_power != t.radial_power ||
          !(s.coef == t.coef))
        return false;
    }
    return true;
  }

 private:
  // Canonical form: the relation sum_k z_k^2 = |z|^2 is used to keep the
  // exponent of the last variable below 2, so equality and zero-testing on
  // the term list are exact.
  void reduce_last_axis() {
    if (dim_ == 0) return;
    const std::size_t last = dim_ - 1;
    std::vector<SymbolTerm<Scalar>> work = std::move(terms_);
    terms_.clear();
    while (!work.empty()) {
      SymbolTerm<Scalar> t = std::move(work.back());
      work.pop_back();
      if (dim_ > 1 && t.monomial[last] >= 2) {
        // z_last^2 = |z|^2 - sum_{k<last} z_k^2
        MultiIndex base = t.monomial.plus(last, -2);
        work.push_back({t.coef, base, t.radial_power - 1});
        for (std::size_t k = 0; k < last; ++k)
          work.push_back({-t.coef, base.plus(k, +2), t.radial_power});
      } else if (dim_ == 1 && t.monomial[0] >= 2) {
        work.push_back({t.coef, t.monomial.plus(0, -2), t.radial_power - 1});
      } else {
        terms_.push_back(std::move(t));
      }
    }
  }

  void normalize() {
    reduce_last_axis();
    std::sort(terms_.begin(), terms_.end(), [](const auto& s, const auto& t) {
      if (s.monomial < t.monomial) return true;
      if (t.monomial < s.monomial) return false;
      return s.radial_power < t.radial_power;
    });
    std::vector<SymbolTerm<Scalar>> merged;
    for (auto& t : terms_) {
      if (!merged.empty() && merged.back().monomial == t.monomial &&
          merged.back().radial_power == t.radial_power) {
        merged.back().coef += t.coef;
      } else {
        merged.push_back(std::move(t));
      }
    }
    terms_.clear();
    for (auto& t : merged)
      if (!ScalarOps<Scalar>::is_zero(t.coef)) terms_.push_back(std::move(t));
  }

  std::size_t dim_ = 0;
  int degree_ = 0;
  std::vector<SymbolTerm<Scalar>> terms_;
};

using ExactComponent = HomogeneousComponent<GaussianRational>;
using NumericComponent = HomogeneousComponent<std::complex<double>>;

inline NumericComponent to_numeric(const ExactComponent& c) {
  NumericComponent out(c.dim(), c.degree());
  for (const auto& t : c.terms())
    out.add_term(to_complex(t.coef), t.monomial, t.radial_power);
  return out;
}

}  // namespace shubin

#endif
