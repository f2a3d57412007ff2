#ifndef SHUBIN_PARAMETRIX_HPP
#define SHUBIN_PARAMETRIX_HPP

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "shubin/symbol.hpp"

namespace shubin {

/// One weakly parametric term d(x,p) * (h_m(x,p) + mu^m)^(-power).
/// power == 0 denotes a plain mu-independent homogeneous term.
/// Formal bi-orders (degree(d) - m*power, 0) and (degree(d), -m*power) are
/// derivable from the stored data; no analytic seminorm is tracked.
template <class Scalar>
struct ParametricTerm {
  HomogeneousComponent<Scalar> d;
  int power = 0;

  int joint_degree(int m) const { return d.degree() - m * power; }
};

/// Finite sum of parametric terms over a fixed auxiliary symbol h, grouped by
/// the total homogeneity drop j relative to a declared leading order:
/// drop = lead - joint degree. Terms at drop >= remainder_order are absorbed
/// into the formal remainder.
template <class Scalar>
class ParametricSymbol {
 public:
  ParametricSymbol() = default;
  ParametricSymbol(ClassicalSymbol<Scalar> h, int K, int lead, int remainder_order)
      : h_(std::move(h)), K_(K), lead_(lead), remainder_order_(remainder_order) {
    if (h_.order() < 1) throw std::invalid_argument("ParametricSymbol: ord h must be >= 1");
  }

  const ClassicalSymbol<Scalar>& h() const { return h_; }
  int m() const { return h_.order(); }
  int K() const { return K_; }
  int lead() const { return lead_; }
  int remainder_order() const { return remainder_order_; }
  const std::map<int, std::vector<ParametricTerm<Scalar>>>& drops() const { return drops_; }

  void add_term(ParametricTerm<Scalar> t) {
    if (t.d.is_zero()) return;
    int drop = lead_ - t.joint_degree(m());
    if (drop < 0) throw std::invalid_argument("ParametricSymbol: term above leading order");
    if (drop >= remainder_order_) return;  // absorbed into the remainder
    auto& bucket = drops_[drop];
    for (std::size_t k = 0; k < bucket.size(); ++k) {
      if (bucket[k].power == t.power) {
        bucket[k].d = bucket[k].d + t.d;
        if (bucket[k].d.is_zero()) {
          bucket.erase(bucket.begin() + k);
          if (bucket.empty()) drops_.erase(drop);
        }
        return;
      }
    }
    bucket.push_back(std::move(t));
  }

  std::vector<ParametricTerm<Scalar>> terms_at_drop(int j) const {
    auto it = drops_.find(j);
    return it == drops_.end() ? std::vector<ParametricTerm<Scalar>>{} : it->second;
  }

  bool empty() const { return drops_.empty(); }

 private:
  ClassicalSymbol<Scalar> h_;
  int K_ = 1;
  int lead_ = 0;
  int remainder_order_ = 0;
  std::map<int, std::vector<ParametricTerm<Scalar>>> drops_;
};

namespace detail {

/// d/d axis of d*(h_m+mu^m)^(-P): product rule plus the chain-rule factor
/// -P * (d h_m/d axis) raising the power.
template <class Scalar>
std::vector<ParametricTerm<Scalar>> diff_term(const ParametricTerm<Scalar>& t,
                                              const HomogeneousComponent<Scalar>& h_principal,
                                              std::size_t axis) {
  std::vector<ParametricTerm<Scalar>> out;
  auto dd = t.d.diff(axis);
  if (!dd.is_zero()) out.push_back({std::move(dd), t.power});
  if (t.power != 0) {
    auto dh = h_principal.diff(axis);
    if (!dh.is_zero()) {
      auto factor = (t.d * dh).scaled(
          ScalarOps<Scalar>::from_rational(Rational(-t.power)));
      if (!factor.is_zero()) out.push_back({std::move(factor), t.power + 1});
    }
  }
  return out;
}

template <class Scalar>
std::vector<ParametricTerm<Scalar>> diff_term_multi(std::vector<ParametricTerm<Scalar>> ts,
                                                    const HomogeneousComponent<Scalar>& h_principal,
                                                    const MultiIndex& full_alpha) {
  for (std::size_t axis = 0; axis < full_alpha.size(); ++axis) {
    for (int e = 0; e < full_alpha[axis]; ++e) {
      std::vector<ParametricTerm<Scalar>> next;
      for (const auto& t : ts) {
        auto parts = diff_term(t, h_principal, axis);
        next.insert(next.end(), parts.begin(), parts.end());
      }
      ts = std::move(next);
    }
  }
  return ts;
}

/// t * mu^m = d*(h_m+mu^m)^(-P+1) - d*h_m*(h_m+mu^m)^(-P).
template <class Scalar>
std::vector<ParametricTerm<Scalar>> mul_mu_power(const ParametricTerm<Scalar>& t,
                                                 const HomogeneousComponent<Scalar>& h_principal) {
  if (t.power == 0)
    throw std::invalid_argument("mul_mu_power: plain term times mu^m is not parametric");
  std::vector<ParametricTerm<Scalar>> out;
  out.push_back({t.d, t.power - 1});
  auto neg = (t.d * h_principal).negated();
  if (!neg.is_zero()) out.push_back({std::move(neg), t.power});
  return out;
}

}  // namespace detail

/// Standard composition p1 # p2 of two parametric symbols over the same h,
/// truncated at drop N: sum over alpha of (1/alpha!) d_p^alpha p1 . D_x^alpha p2.
template <class Scalar>
ParametricSymbol<Scalar> compose_parametric_symbols(const ParametricSymbol<Scalar>& p1,
                                                    const ParametricSymbol<Scalar>& p2, int N) {
  if (!(p1.h() == p2.h())) throw std::invalid_argument("compose: different auxiliary symbols");
  const std::size_t n = p1.h().n();
  const auto h_principal = p1.h().component(0);
  ParametricSymbol<Scalar> out(p1.h(), p1.K() + p2.K(), p1.lead() + p2.lead(), N);

  auto alpha_factorial = [](const MultiIndex& alpha) {
    Rational f = 1;
    for (std::size_t k = 0; k < alpha.size(); ++k) f *= factorial_rational(alpha[k]);
    return f;
  };

  for (const auto& [j1, bucket1] : p1.drops()) {
    for (const auto& [j2, bucket2] : p2.drops()) {
      for (int w = 0; j1 + j2 + 2 * w < N; ++w) {
        for_each_multi_index(n, w, [&](const MultiIndex& alpha) {
          MultiIndex alpha_p(2 * n), alpha_x(2 * n);
          for (std::size_t k = 0; k < n; ++k) {
            alpha_p[n + k] = alpha[k];
            alpha_x[k] = alpha[k];
          }
          Scalar c = ScalarOps<Scalar>::i_power(-w) *
                     ScalarOps<Scalar>::from_rational(Rational(1) / alpha_factorial(alpha));
          for (const auto& t1 : bucket1) {
            auto left = detail::diff_term_multi<Scalar>({t1}, h_principal, alpha_p);
            if (left.empty()) continue;
            for (const auto& t2 : bucket2) {
              auto right = detail::diff_term_multi<Scalar>({t2}, h_principal, alpha_x);
              for (const auto& lt : left) {
                for (const auto& rt : right) {
                  out.add_term({(lt.d * rt.d).scaled(c), lt.power + rt.power});
                }
              }
            }
          }
        });
      }
    }
  }
  return out;
}

/// Embeds a classical symbol as a parametric symbol (all powers zero) over h.
template <class Scalar>
ParametricSymbol<Scalar> embed_classical(const ClassicalSymbol<Scalar>& a,
                                         const ClassicalSymbol<Scalar>& h, int N) {
  ParametricSymbol<Scalar> out(h, 0, a.order(), N);
  for (const auto& [j, c] : a.components()) out.add_term({c, 0});
  return out;
}

/// Resolvent parametrix for h + mu^m, K = 1, by the recursion
///   p_{-m}   = (h_m + mu^m)^{-1}
///   p_{-m-j} = - sum_{l<j, l+k+|alpha|=j} (1/alpha!) (d_p^alpha p_{-m-l})
///                                         (D_x^alpha h_{m-k}) p_{-m}
/// with D = -i d. Passes compose_check to order -N by construction.
template <class Scalar>
ParametricSymbol<Scalar> resolvent_parametrix(const ClassicalSymbol<Scalar>& h, int N) {
  const int m = h.order();
  if (m < 1) throw std::invalid_argument("resolvent_parametrix: ord h must be >= 1");
  const std::size_t n = h.n();
  {
    // principal must be strictly positive and scalar on the unit sphere
    const auto principal = h.component(0);
    if (principal.is_zero())
      throw std::invalid_argument("resolvent_parametrix: zero principal symbol");
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 64; ++trial) {
      std::vector<double> pt(2 * n);
      double norm = 0;
      for (auto& v : pt) {
        v = dist(rng);
        norm += v * v;
      }
      if (norm < 1e-8) continue;
      norm = std::sqrt(norm);
      for (auto& v : pt) v /= norm;
      auto val = principal.eval(pt);
      if (!(val.real() > 0) || std::abs(val.imag()) > 1e-12 * std::abs(val.real()))
        throw std::invalid_argument(
            "resolvent_parametrix: principal symbol not strictly positive");
    }
  }

  const auto h_principal = h.component(0);
  ParametricSymbol<Scalar> out(h, 1, -m, N);
  // recursion layers indexed as in the appendix; each layer is a term list
  std::vector<std::vector<ParametricTerm<Scalar>>> layers;
  layers.push_back({{HomogeneousComponent<Scalar>::constant(2 * n, ScalarOps<Scalar>::one()), 1}});
  out.add_term(layers[0][0]);

  auto alpha_factorial = [](const MultiIndex& alpha) {
    Rational f = 1;
    for (std::size_t k = 0; k < alpha.size(); ++k) f *= factorial_rational(alpha[k]);
    return f;
  };

  for (int j = 1; j < N; ++j) {
    std::vector<ParametricTerm<Scalar>> layer;
    for (int l = 0; l < j; ++l) {
      for (int w = 0; l + w <= j; ++w) {
        int k = j - l - w;
        if (k < 0) continue;
        auto hk = h.component(k);
        if (hk.is_zero()) continue;
        for_each_multi_index(n, w, [&](const MultiIndex& alpha) {
          MultiIndex alpha_p(2 * n), alpha_x(2 * n);
          for (std::size_t q = 0; q < n; ++q) {
            alpha_p[n + q] = alpha[q];
            alpha_x[q] = alpha[q];
          }
          auto dh = hk.diff(alpha_x);
          if (dh.is_zero()) return;
          Scalar c = ScalarOps<Scalar>::i_power(-w) *
                     ScalarOps<Scalar>::from_rational(Rational(-1) / alpha_factorial(alpha));
          std::vector<ParametricTerm<Scalar>> left;
          for (const auto& t : layers[l]) {
            auto parts = detail::diff_term_multi<Scalar>({t}, h_principal, alpha_p);
            left.insert(left.end(), parts.begin(), parts.end());
          }
          for (const auto& lt : left) {
            // (d_p^alpha p_{-m-l}) * (D_x^alpha h_{m-k}) * p_{-m}
            layer.push_back({(lt.d * dh).scaled(c), lt.power + 1});
          }
        });
      }
    }
    for (const auto& t : layer) out.add_term(t);
    layers.push_back(std::move(layer));
  }
  return out;
}

/// A(H+mu^m)^{-K}-style composition: classical a composed (standard) with a
/// parametric symbol, truncated at drop N.
template <class Scalar>
ParametricSymbol<Scalar> compose_parametric(const ClassicalSymbol<Scalar>& a,
                                            const ParametricSymbol<Scalar>& p, int N) {
  return compose_parametric_symbols(embed_classical(a, p.h(), N), p, N);
}

/// Residual of the defining identity: all nonzero terms of p#(h+mu^m) - 1
/// with drop < N. Empty iff the identity holds to order -N.
template <class Scalar>
std::vector<ParametricTerm<Scalar>> compose_check(const ParametricSymbol<Scalar>& p,
                                                  const ClassicalSymbol<Scalar>& h, int N) {
  if (!(p.h() == h)) throw std::invalid_argument("compose_check: parametrix built over different h");
  if (N <= 0) return {};
  const int m = h.order();
  const auto h_principal = h.component(0);
  const std::size_t n = h.n();

  // q = p # h  (standard composition, p on the left)
  auto q = compose_parametric_symbols(p, embed_classical(h, h, N + m), N + m);

  // plus p * mu^m, minus 1, regrouped at lead 0
  ParametricSymbol<Scalar> res(h, p.K(), p.lead() + m, N);
  for (const auto& [j, bucket] : q.drops())
    for (const auto& t : bucket) res.add_term(t);
  for (const auto& [j, bucket] : p.drops()) {
    for (const auto& t : bucket) {
      for (auto& u : detail::mul_mu_power(t, h_principal)) res.add_term(std::move(u));
    }
  }
  if (res.lead() != 0)
    throw std::logic_error("compose_check: unexpected leading order");
  res.add_term({HomogeneousComponent<Scalar>::constant(
                    2 * n, ScalarOps<Scalar>::from_rational(Rational(-1))),
                0});

  std::vector<ParametricTerm<Scalar>> out;
  for (const auto& [j, bucket] : res.drops())
    for (const auto& t : bucket) out.push_back(t);
  return out;
}

/// Expansion at mu = infinity: (h_m+mu^m)^{-P} = sum_k binom(-P,k) h_m^k mu^{-m(P+k)}.
/// Returns the coefficient of mu^{dExponent-k} for k < N; requires all terms
/// to share the d-order dExponent = -m*power.
template <class Scalar>
std::vector<std::pair<int, HomogeneousComponent<Scalar>>> expand_at_infinity(
    const ParametricSymbol<Scalar>& p, int dExponent, int N) {
  const int m = p.m();
  const auto h_principal = p.h().component(0);
  std::map<int, std::map<int, HomogeneousComponent<Scalar>>> acc;  // k -> degree -> comp
  for (const auto& [j, bucket] : p.drops()) {
    for (const auto& t : bucket) {
      if (t.power <= 0 || -m * t.power != dExponent)
        throw std::invalid_argument("expand_at_infinity: mixed d-orders; caller must split");
      for (int kk = 0; m * kk < N; ++kk) {
        // binom(-P, kk) = (-1)^kk C(P+kk-1, kk)
        Rational binom = 1;
        for (int i = 0; i < kk; ++i) binom *= Rational(t.power + i, i + 1);
        if (kk % 2 == 1) binom = -binom;
        auto coef = (t.d * h_principal.pow(kk))
                        .scaled(ScalarOps<Scalar>::from_rational(binom));
        if (coef.is_zero()) continue;
        auto& slot = acc[m * kk][coef.degree()];
        slot = slot.is_zero() ? coef : slot + coef;
      }
    }
  }
  std::vector<std::pair<int, HomogeneousComponent<Scalar>>> out;
  for (int k = 0; k < N; ++k) {
    auto it = acc.find(k);
    if (it == acc.end() || it->second.empty()) {
      out.emplace_back(k, HomogeneousComponent<Scalar>());
      continue;
    }
    if (it->second.size() > 1)
      throw std::invalid_argument("expand_at_infinity: inhomogeneous coefficient sum");
    auto comp = it->second.begin()->second;
    out.emplace_back(k, std::move(comp));
  }
  return out;
}

using ExactParametricSymbol = ParametricSymbol<GaussianRational>;
using ExactParametricTerm = ParametricTerm<GaussianRational>;

}  // namespace shubin

#endif
