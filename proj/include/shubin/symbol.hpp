#ifndef SHUBIN_SYMBOL_HPP
#define SHUBIN_SYMBOL_HPP

#include <map>
#include <optional>
#include <stdexcept>

#include "shubin/homogeneous.hpp"

namespace shubin {

enum class Convention { Standard, Weyl };

/// Classical Shubin symbol of integer order: finite list of exactly
/// homogeneous components, component j having degree order - j.
template <class Scalar>
class ClassicalSymbol {
 public:
  ClassicalSymbol() = default;
  ClassicalSymbol(std::size_t n, int order) : n_(n), order_(order) {}

  static ClassicalSymbol zero(std::size_t n, int order) { return ClassicalSymbol(n, order); }

  static ClassicalSymbol from_principal(HomogeneousComponent<Scalar> principal) {
    if (principal.dim() % 2 != 0)
      throw std::invalid_argument("ClassicalSymbol: odd phase-space dimension");
    ClassicalSymbol s(principal.dim() / 2, principal.degree());
    if (!principal.is_zero()) s.components_[0] = std::move(principal);
    return s;
  }

  std::size_t n() const { return n_; }
  std::size_t dim() const { return 2 * n_; }
  int order() const { return order_; }
  bool is_zero() const { return components_.empty(); }

  int max_drop() const { return components_.empty() ? -1 : components_.rbegin()->first; }

  const std::map<int, HomogeneousComponent<Scalar>>& components() const { return components_; }

  HomogeneousComponent<Scalar> component(int j) const {
    auto it = components_.find(j);
    if (it != components_.end()) return it->second;
    return HomogeneousComponent<Scalar>::zero(2 * n_, order_ - j);
  }

  void set_component(int j, HomogeneousComponent<Scalar> c) {
    if (j < 0) throw std::invalid_argument("set_component: negative drop");
    if (c.is_zero()) {
      components_.erase(j);
      return;
    }
    if (c.dim() != 2 * n_ || c.degree() != order_ - j)
      throw std::invalid_argument("set_component: degree or dim mismatch");
    components_[j] = std::move(c);
  }

  void accumulate(int j, const HomogeneousComponent<Scalar>& c) {
    if (c.is_zero()) return;
    set_component(j, component(j) + c);
  }

  ClassicalSymbol scaled(const Scalar& c) const {
    ClassicalSymbol out(n_, order_);
    for (const auto& [j, comp] : components_) out.set_component(j, comp.scaled(c));
    return out;
  }

  /// Sum; the result order is the larger of the two (drops realigned).
  friend ClassicalSymbol operator+(const ClassicalSymbol& a, const ClassicalSymbol& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.n_ != b.n_) throw std::invalid_argument("symbol +: n mismatch");
    ClassicalSymbol out(a.n_, std::max(a.order_, b.order_));
    for (const auto& [j, comp] : a.components_) out.accumulate(j + out.order_ - a.order_, comp);
    for (const auto& [j, comp] : b.components_) out.accumulate(j + out.order_ - b.order_, comp);
    return out;
  }

  friend bool operator==(const ClassicalSymbol& a, const ClassicalSymbol& b) {
    if (a.n_ != b.n_) return false;
    if (a.is_zero() && b.is_zero()) return true;
    // Compare by degree so differing declared orders with matching content agree.
    std::map<int, HomogeneousComponent<Scalar>> am, bm;
    for (const auto& [j, c] : a.components_) am[a.order_ - j] = c;
    for (const auto& [j, c] : b.components_) bm[b.order_ - j] = c;
    return am == bm;
  }

 private:
  std::size_t n_ = 0;
  int order_ = 0;
  std::map<int, HomogeneousComponent<Scalar>> components_;
};

/// Asymptotic composition a # b truncated after total order
/// ord a + ord b - N + 1 (i.e. drops 0..N-1 retained).
///
/// Standard: sum over alpha of (1/alpha!) d_p^alpha a . D_x^alpha b, D = -i d.
/// Weyl: the symmetric Moyal expansion; exact (terminates) when either factor
/// is quadratic or lower.
template <class Scalar>
ClassicalSymbol<Scalar> symbol_compose(const ClassicalSymbol<Scalar>& a,
                                       const ClassicalSymbol<Scalar>& b, int N,
                                       Convention convention) {
  if (a.n() != b.n()) throw std::invalid_argument("symbol_compose: n mismatch");
  if (N < 1) throw std::invalid_argument("symbol_compose: N must be >= 1");
  const std::size_t n = a.n();
  ClassicalSymbol<Scalar> out(n, a.order() + b.order());
  if (a.is_zero() || b.is_zero()) return out;

  auto shift_p = [n](const MultiIndex& alpha) {
    MultiIndex full(2 * n);
    for (std::size_t k = 0; k < n; ++k) full[n + k] = alpha[k];
    return full;
  };
  auto shift_x = [n](const MultiIndex& alpha) {
    MultiIndex full(2 * n);
    for (std::size_t k = 0; k < n; ++k) full[k] = alpha[k];
    return full;
  };
  auto alpha_factorial = [](const MultiIndex& alpha) {
    Rational f = 1;
    for (std::size_t k = 0; k < alpha.size(); ++k) f *= factorial_rational(alpha[k]);
    return f;
  };

  for (const auto& [ja, ca] : a.components()) {
    for (const auto& [jb, cb] : b.components()) {
      if (ja + jb >= N) continue;
      if (convention == Convention::Standard) {
        for (int w = 0; ja + jb + 2 * w < N; ++w) {
          for_each_multi_index(n, w, [&](const MultiIndex& alpha) {
            auto da = ca.diff(shift_p(alpha));
            if (da.is_zero()) return;
            auto db = cb.diff(shift_x(alpha));
            if (db.is_zero()) return;
            Scalar c = ScalarOps<Scalar>::i_power(-w) *
                       ScalarOps<Scalar>::from_rational(Rational(1) / alpha_factorial(alpha));
            out.accumulate(ja + jb + 2 * w, (da * db).scaled(c));
          });
        }
      } else {
        for (int w = 0; ja + jb + 2 * w < N; ++w) {
          // w = |alpha| + |beta| total derivative count
          for (int wa = 0; wa <= w; ++wa) {
            for_each_multi_index(n, wa, [&](const MultiIndex& alpha) {
              for_each_multi_index(n, w - wa, [&](const MultiIndex& beta) {
                auto da = ca.diff(shift_p(alpha) + shift_x(beta));
                if (da.is_zero()) return;
                auto db = cb.diff(shift_x(alpha) + shift_p(beta));
                if (db.is_zero()) return;
                // (-1)^{|alpha|} (i/2)^{|alpha|+|beta|} / (alpha! beta!)
                Rational denom = alpha_factorial(alpha) * alpha_factorial(beta);
                for (int e = 0; e < w; ++e) denom *= 2;
                Scalar c = ScalarOps<Scalar>::i_power(w) *
                           ScalarOps<Scalar>::from_rational(
                               Rational(wa % 2 == 0 ? 1 : -1) / denom);
                out.accumulate(ja + jb + 2 * w, (da * db).scaled(c));
              });
            });
          }
        }
      }
    }
  }
  return out;
}

/// Recognizes c * (|z|^2)^(degree/2); returns the scalar c if so.
/// In the canonical term representation such a component is a single pure
/// radial term.
template <class Scalar>
std::optional<Scalar> radial_multiple(const HomogeneousComponent<Scalar>& c) {
  if (c.is_zero()) return ScalarOps<Scalar>::zero();
  if (c.terms().size() != 1) return std::nullopt;
  const auto& t0 = c.terms().front();
  if (t0.monomial.weight() != 0) return std::nullopt;
  return t0.coef;
}

/// Exact reciprocal, defined when the component is a scalar multiple of a
/// power of |z|^2.
template <class Scalar>
HomogeneousComponent<Scalar> radial_reciprocal(const HomogeneousComponent<Scalar>& c) {
  auto lambda = radial_multiple(c);
  if (!lambda || ScalarOps<Scalar>::is_zero(*lambda))
    throw std::domain_error("radial_reciprocal: component is not an invertible radial multiple");
  Scalar inv = ScalarOps<Scalar>::one() / *lambda;
  const Rational s = c.terms().front().radial_power;
  return HomogeneousComponent<Scalar>::term(c.dim(), inv, MultiIndex(c.dim()), -s);
}

/// Asymptotic inverse: returns b with b # a = 1 through drops 0..N-1.
/// Requires the principal component of a to be an invertible radial multiple.
template <class Scalar>
ClassicalSymbol<Scalar> symbol_invert(const ClassicalSymbol<Scalar>& a, int N,
                                      Convention convention) {
  if (a.is_zero()) throw std::invalid_argument("symbol_invert: zero symbol");
  auto principal_inv = radial_reciprocal(a.component(0));
  ClassicalSymbol<Scalar> b = ClassicalSymbol<Scalar>::from_principal(principal_inv);
  for (int j = 1; j < N; ++j) {
    // defect through drop j: (b # a - 1) has leading drop >= j
    auto prod = symbol_compose(b, a, j + 1, convention);
    auto defect = prod.component(j);
    if (defect.is_zero()) continue;
    b.accumulate(j, (defect * principal_inv).negated());
  }
  return b;
}

using ExactSymbol = ClassicalSymbol<GaussianRational>;
using NumericSymbol = ClassicalSymbol<std::complex<double>>;

inline NumericSymbol to_numeric(const ExactSymbol& s) {
  NumericSymbol out(s.n(), s.order());
  for (const auto& [j, c] : s.components()) out.set_component(j, to_numeric(c));
  return out;
}

/// Harmonic oscillator symbol h2 = (|x|^2 + |p|^2)/2 as an exact symbol.
inline ExactSymbol oscillator_symbol(std::size_t n) {
  ExactComponent h2(2 * n, 2);
  for (std::size_t k = 0; k < 2 * n; ++k) {
    MultiIndex mono(2 * n);
    mono[k] = 2;
    h2.add_term(GaussianRational(Rational(1, 2)), mono);
  }
  return ExactSymbol::from_principal(h2);
}

}  // namespace shubin

#endif
