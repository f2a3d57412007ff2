#ifndef SHUBIN_FOCK_HPP
#define SHUBIN_FOCK_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <variant>
#include <vector>

#include "shubin/group.hpp"
#include "shubin/multi_index.hpp"

namespace shubin {

/// Hermite-Fock basis {|alpha> : |alpha| <= N}, graded by level.
class FockBasis {
 public:
  FockBasis(int n, int N) : n_(n), N_(N) {
    level_offset_.push_back(0);
    for (int L = 0; L <= N; ++L) {
      for_each_multi_index(n, L, [&](const MultiIndex& a) {
        for (int k = 0; k < n; ++k) flat_.push_back(a[k]);
      });
      level_offset_.push_back(static_cast<long>(flat_.size() / n));
    }
  }

  int n() const { return n_; }
  int N() const { return N_; }
  long dim() const { return static_cast<long>(flat_.size()) / n_; }
  const int* state(long idx) const { return flat_.data() + idx * n_; }
  int level(long idx) const {
    int L = 0;
    for (int k = 0; k < n_; ++k) L += state(idx)[k];
    return L;
  }
  long level_begin(int L) const { return level_offset_[L]; }
  long level_end(int L) const { return level_offset_[L + 1]; }

  long index_of(const std::vector<int>& alpha) const {
    ensure_lookup();
    auto it = lookup_.find(alpha);
    if (it == lookup_.end()) throw std::out_of_range("FockBasis: state outside cutoff");
    return it->second;
  }

 private:
  void ensure_lookup() const {
    if (!lookup_.empty() || dim() == 0) return;
    for (long i = 0; i < dim(); ++i)
      lookup_[std::vector<int>(state(i), state(i) + n_)] = i;
  }

  int n_, N_;
  std::vector<int> flat_;
  std::vector<long> level_offset_;
  mutable std::map<std::vector<int>, long> lookup_;
};

inline double level_multiplicity(int n, long L) {
  double m = 1;
  for (int k = 1; k < n; ++k) m *= static_cast<double>(L + k) / k;
  return m;  // C(L+n-1, n-1)
}

/// Certified bound on the absolute diagonal entries of a damped factor for
/// levels beyond the cutoff: scale*exp(-rate*L) or scale*(L+shift)^(-q).
struct TailModel {
  enum class Kind { None, Exponential, Power };
  Kind kind = Kind::None;
  double scale = 0, rate = 0, q = 0, shift = 0;

  static TailModel none() { return {}; }
  static TailModel exponential(double scale, double rate) {
    return {Kind::Exponential, scale, rate, 0, 0};
  }
  static TailModel power(double scale, double q, double shift) {
    return {Kind::Power, scale, 0, q, shift};
  }
};

struct LevelDiagK {
  Eigen::VectorXcd d;  // indexed by level 0..N
};
struct StateDiagK {
  Eigen::VectorXcd d;  // indexed by basis state
};
struct KronSumK {
  // sum of Kronecker terms, each a per-mode (N+1)x(N+1) matrix list
  std::vector<std::vector<Eigen::MatrixXcd>> terms;
};
struct ModePermK {
  std::vector<int> sigma;       // mode permutation, j -> sigma[j]
  std::vector<Complex> signs;   // per-mode factor sign_j^{alpha_j}
};
struct DenseK {
  Eigen::MatrixXcd m;
};

struct FockOperator {
  int n = 0;
  int N = 0;
  std::variant<LevelDiagK, StateDiagK, KronSumK, ModePermK, DenseK> kind;
  // level-growth envelope: operator norm between level blocks <= C (1+L)^p
  double growth_C = 1.0;
  double growth_p = 0.0;
  TailModel tail;  // meaningful for damped diagonal factors only

  bool is_diagonal() const {
    return std::holds_alternative<LevelDiagK>(kind) || std::holds_alternative<StateDiagK>(kind);
  }
};

namespace fock_detail {

inline Eigen::MatrixXcd ladder_x(int size) {
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(size, size);
  for (int k = 0; k + 1 < size; ++k) {
    double v = std::sqrt((k + 1) / 2.0);
    X(k, k + 1) = v;
    X(k + 1, k) = v;
  }
  return X;
}

inline Eigen::MatrixXcd ladder_p(int size) {
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(size, size);
  for (int k = 0; k + 1 < size; ++k) {
    double v = std::sqrt((k + 1) / 2.0);
    P(k, k + 1) = Complex(0, -v);
    P(k + 1, k) = Complex(0, v);
  }
  return P;
}

inline double binom(int m, int r) {
  double b = 1;
  for (int i = 0; i < r; ++i) b *= static_cast<double>(m - i) / (i + 1);
  return b;
}

/// Single-mode Weyl quantization of x^m p^k via the normal-ordering rewrite
/// op^w(x^m p^k) = 2^{-m} sum_r C(m,r) X^r P^k X^{m-r}; built padded so the
/// returned (size x size) block is exact.  X and P are banded, so the
/// products are formed sparsely (O(size) instead of O(size^3)).
inline Eigen::MatrixXcd single_mode_weyl(int m, int k, int size) {
  using Sparse = Eigen::SparseMatrix<Complex>;
  const int S = size + m + k;
  Sparse X(S, S), P(S, S);
  {
    std::vector<Eigen::Triplet<Complex>> tx, tp;
    for (int j = 0; j + 1 < S; ++j) {
      double v = std::sqrt((j + 1) / 2.0);
      tx.push_back({j, j + 1, Complex(v, 0)});
      tx.push_back({j + 1, j, Complex(v, 0)});
      tp.push_back({j, j + 1, Complex(0, -v)});
      tp.push_back({j + 1, j, Complex(0, v)});
    }
    X.setFromTriplets(tx.begin(), tx.end());
    P.setFromTriplets(tp.begin(), tp.end());
  }
  Sparse Pk(S, S);
  Pk.setIdentity();
  for (int i = 0; i < k; ++i) Pk = (Pk * P).eval();
  Sparse acc(S, S);
  for (int r = 0; r <= m; ++r) {
    Sparse left(S, S);
    left.setIdentity();
    for (int i = 0; i < r; ++i) left = (left * X).eval();
    Sparse right(S, S);
    right.setIdentity();
    for (int i = 0; i < m - r; ++i) right = (right * X).eval();
    acc += Sparse(binom(m, r) * (left * Pk * right));
  }
  return Eigen::MatrixXcd(acc / std::pow(2.0, m)).topLeftCorner(size, size);
}

/// Oracle: average of all operator orderings of m X's and k P's (full
/// symmetrization), independent of the normal-ordering rewrite.
inline Eigen::MatrixXcd single_mode_symmetrized(int m, int k, int size) {
  const int S = size + m + k;
  auto X = ladder_x(S);
  auto P = ladder_p(S);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(S, S);
  long count = 0;
  std::function<void(int, int, const Eigen::MatrixXcd&)> rec =
      [&](int mx, int kp, const Eigen::MatrixXcd& prefix) {
        if (mx == 0 && kp == 0) {
          acc += prefix;
          ++count;
          return;
        }
        if (mx > 0) rec(mx - 1, kp, prefix * X);
        if (kp > 0) rec(mx, kp - 1, prefix * P);
      };
  rec(m, k, Eigen::MatrixXcd::Identity(S, S));
  return (acc / static_cast<double>(count)).topLeftCorner(size, size);
}

inline double abs2(const Complex& z) { return std::norm(z); }

/// <mrow| D(beta) |kcol> displacement matrix elements.  The associated
/// Laguerre value is carried with the sqrt(lo!/hi!) amplitude folded into the
/// recurrence: S_p = sqrt(p!/(p+d)!) L_p^d(x) stays O(1), so no intermediate
/// overflows even for large cutoffs.
inline Eigen::MatrixXcd displacement_mode(const Complex& beta, int size) {
  Eigen::MatrixXcd D(size, size);
  const double b2 = abs2(beta);
  const double ab = std::abs(beta);
  const Complex phase = ab > 0 ? beta / ab : Complex(1, 0);
  for (int d = 0; d < size; ++d) {
    // |beta|^d / sqrt(d!) exp(-|beta|^2/2) assembled in log space so large
    // |beta| and d never overflow; the unit phases carry the direction
    const double logmag = (d > 0 ? d * std::log(ab) : 0.0) - b2 / 2 -
                          0.5 * std::lgamma(d + 1.0);
    const Complex dir_lo = std::pow(phase, d) * std::exp(logmag);           // row >= col
    const Complex dir_hi = std::pow(-std::conj(phase), d) * std::exp(logmag);  // col > row
    double s_prev = 0;
    double s = 1;  // scaled L_0^d
    for (int p = 0; p + d < size; ++p) {
      D(p + d, p) = dir_lo * s;
      if (d > 0) D(p, p + d) = dir_hi * s;
      double s_next = ((2 * p + d + 1 - b2) * s - std::sqrt(p * (p + d + 0.0)) * s_prev) /
                      std::sqrt((p + 1.0) * (p + 1.0 + d));
      s_prev = s;
      s = s_next;
    }
  }
  return D;
}

}  // namespace fock_detail

/// Polynomial symbol on phase space: list of (coef, exponent) with exponents
/// on (x_1..x_n, p_1..p_n).
using PolySymbol = std::vector<std::pair<Complex, MultiIndex>>;

inline int poly_degree(const PolySymbol& P) {
  int d = 0;
  for (const auto& [c, mono] : P) d = std::max(d, mono.weight());
  return d;
}

/// Linear substitution z -> M z on the 2n phase-space variables, expanded
/// monomial by monomial.
inline PolySymbol poly_substitute(const PolySymbol& P, const Eigen::MatrixXd& M) {
  const int dim = static_cast<int>(M.rows());
  std::map<std::vector<int>, Complex> acc;
  for (const auto& [coef, mono] : P) {
    std::map<std::vector<int>, Complex> cur;
    cur[std::vector<int>(dim, 0)] = coef;
    for (int k = 0; k < dim; ++k) {
      for (int e = 0; e < mono[k]; ++e) {
        std::map<std::vector<int>, Complex> next;
        for (const auto& [expo, c] : cur) {
          for (int l = 0; l < dim; ++l) {
            if (M(k, l) == 0.0) continue;
            auto e2 = expo;
            e2[l] += 1;
            next[e2] += c * M(k, l);
          }
        }
        cur = std::move(next);
      }
    }
    for (const auto& [expo, c] : cur) acc[expo] += c;
  }
  PolySymbol out;
  for (const auto& [expo, c] : acc)
    if (std::abs(c) > 0) out.push_back({c, MultiIndex(expo)});
  return out;
}

/// Weyl quantization of a polynomial symbol: Kronecker sum over monomials,
/// each mode carrying its single-variable Weyl factor.
inline FockOperator op_weyl_poly(const PolySymbol& P, int n, int N) {
  KronSumK ks;
  double C = 0;
  int deg = poly_degree(P);
  for (const auto& [coef, mono] : P) {
    if (static_cast<int>(mono.size()) != 2 * n)
      throw std::invalid_argument("op_weyl_poly: exponent length mismatch");
    std::vector<Eigen::MatrixXcd> modes;
    for (int j = 0; j < n; ++j) {
      int m = mono[j], k = mono[n + j];
      if (m == 0 && k == 0) {
        modes.push_back(Eigen::MatrixXcd::Identity(N + 1, N + 1));
      } else {
        modes.push_back(fock_detail::single_mode_weyl(m, k, N + 1));
      }
    }
    modes[0] *= coef;
    ks.terms.push_back(std::move(modes));
    C += std::abs(coef) * std::pow(2.0 * (mono.weight() + 1), mono.weight() / 2.0);
  }
  FockOperator op;
  op.n = n;
  op.N = N;
  op.kind = std::move(ks);
  op.growth_C = std::max(C, 1.0);
  op.growth_p = deg / 2.0;
  return op;
}

/// Diagonal f(|alpha| + n/2 + c); the caller supplies the certified tail
/// model matching f (see heat_factor / power_factor / resolvent_factor).
inline FockOperator func_of_H0(const std::function<Complex(double)>& f, int n, double c, int N,
                               TailModel tail = TailModel::none()) {
  LevelDiagK ld;
  ld.d.resize(N + 1);
  double maxabs = 0;
  for (int L = 0; L <= N; ++L) {
    ld.d(L) = f(L + n / 2.0 + c);
    maxabs = std::max(maxabs, std::abs(ld.d(L)));
    if (!std::isfinite(ld.d(L).real()) || !std::isfinite(ld.d(L).imag()))
      throw std::domain_error("func_of_H0: f singular on the spectrum");
  }
  FockOperator op;
  op.n = n;
  op.N = N;
  op.kind = std::move(ld);
  op.growth_C = maxabs;
  op.growth_p = 0;
  op.tail = tail;
  return op;
}

inline FockOperator heat_factor(double t, int n, double c, int N) {
  if (t <= 0) throw std::invalid_argument("heat_factor: t must be positive");
  auto op = func_of_H0([t](double e) { return Complex(std::exp(-t * e), 0); }, n, c, N,
                       TailModel::exponential(std::exp(-t * (n / 2.0 + c)), t));
  return op;
}

inline FockOperator power_factor(const Complex& z, int n, double c, int N) {
  double s = n / 2.0 + c;
  if (s <= 0) throw std::invalid_argument("power_factor: ground eigenvalue not positive");
  return func_of_H0([z](double e) { return std::pow(Complex(e, 0), -z); }, n, c, N,
                    TailModel::power(1.0, z.real(), s));
}

inline FockOperator resolvent_factor(const Complex& lambda, int K, int n, double c, int N) {
  double s = n / 2.0 + c;
  for (int L = 0; L <= N + 10; ++L)
    if (std::abs(Complex(L + s, 0) - lambda) < 1e-12)
      throw std::domain_error("resolvent_factor: lambda on the spectrum");
  if (lambda.real() >= s && std::abs(lambda.imag()) < 1e-12 &&
      std::abs(lambda.real() - std::round(lambda.real() - s) - s) < 1e-12)
    throw std::domain_error("resolvent_factor: lambda on the spectrum");
  double shift = s - lambda.real();
  if (shift <= 0)
    throw std::invalid_argument("resolvent_factor: certified tail needs Re lambda < ground");
  return func_of_H0(
      [lambda, K](double e) { return std::pow(Complex(e, 0) - lambda, -K); }, n, c, N,
      TailModel::power(1.0, static_cast<double>(K), shift));
}

/// T_w = D(conj(w)/sqrt(2)) as a Kronecker product of per-mode displacements.
inline FockOperator displacement(const std::vector<Complex>& w, int N) {
  const int n = static_cast<int>(w.size());
  KronSumK ks;
  std::vector<Eigen::MatrixXcd> modes;
  for (int j = 0; j < n; ++j)
    modes.push_back(fock_detail::displacement_mode(std::conj(w[j]) / std::sqrt(2.0), N + 1));
  ks.terms.push_back(std::move(modes));
  FockOperator op;
  op.n = n;
  op.N = N;
  op.kind = std::move(ks);
  op.growth_C = 1.0;  // unitary
  op.growth_p = 0;
  return op;
}

/// Diagonal metaplectic factor: entries e^{-i <phi, alpha>}.
inline FockOperator metaplectic_diag(const std::vector<double>& angles, const FockBasis& basis) {
  const int n = basis.n();
  if (static_cast<int>(angles.size()) != n)
    throw std::invalid_argument("metaplectic_diag: angle count mismatch");
  StateDiagK sd;
  sd.d.resize(basis.dim());
  for (long i = 0; i < basis.dim(); ++i) {
    double phase = 0;
    for (int j = 0; j < n; ++j) phase -= angles[j] * basis.state(i)[j];
    sd.d(i) = std::polar(1.0, phase);
  }
  FockOperator op;
  op.n = n;
  op.N = basis.N();
  op.kind = std::move(sd);
  return op;
}

/// Basis permutation |alpha> -> prod sign_j^{alpha_j} |sigma alpha>.
inline FockOperator metaplectic_perm(const std::vector<int>& sigma,
                                     const std::vector<Complex>& signs, int n, int N) {
  if (static_cast<int>(sigma.size()) != n || static_cast<int>(signs.size()) != n)
    throw std::invalid_argument("metaplectic_perm: size mismatch");
  FockOperator op;
  op.n = n;
  op.N = N;
  op.kind = ModePermK{sigma, signs};
  return op;
}

/// Metaplectic operator for a monomial unitary g = diag(phases) . P_sigma as
/// an ordered factor list R_diag . R_perm.
inline std::vector<FockOperator> fock_metaplectic(const MonomialUnitary& g, const FockBasis& basis) {
  const int n = static_cast<int>(g.n());
  std::vector<FockOperator> out;
  std::vector<double> angles(n);
  bool any_angle = false;
  for (int j = 0; j < n; ++j) {
    angles[j] = std::arg(g.phases[j]);
    if (std::abs(angles[j]) > 1e-15) any_angle = true;
  }
  if (any_angle) out.push_back(metaplectic_diag(angles, basis));
  if (!g.is_diagonal())
    out.push_back(metaplectic_perm(g.sigma, std::vector<Complex>(n, Complex(1, 0)), n, basis.N()));
  return out;
}

namespace fock_detail {

inline Complex kron_entry(const KronSumK& ks, const int* a, const int* b, int n) {
  Complex v = 0;
  for (const auto& term : ks.terms) {
    Complex p = 1;
    for (int j = 0; j < n; ++j) {
      p *= term[j](a[j], b[j]);
      if (p == Complex(0, 0)) break;
    }
    v += p;
  }
  return v;
}

inline Complex diagonal_entry(const FockOperator& op, const FockBasis& basis, long idx) {
  const int n = basis.n();
  const int* a = basis.state(idx);
  if (const auto* ld = std::get_if<LevelDiagK>(&op.kind)) return ld->d(basis.level(idx));
  if (const auto* sd = std::get_if<StateDiagK>(&op.kind)) return sd->d(idx);
  if (const auto* ks = std::get_if<KronSumK>(&op.kind)) return kron_entry(*ks, a, a, n);
  if (const auto* mp = std::get_if<ModePermK>(&op.kind)) {
    // diagonal entry nonzero only on sigma-fixed states
    Complex sgn = 1;
    for (int j = 0; j < n; ++j) {
      if (a[mp->sigma[j]] != a[j]) return Complex(0, 0);
      sgn *= std::pow(mp->signs[j], a[j]);
    }
    return sgn;
  }
  return std::get<DenseK>(op.kind).m(idx, idx);
}

}  // namespace fock_detail

inline Eigen::MatrixXcd to_dense(const FockOperator& op, const FockBasis& basis) {
  const long dim = basis.dim();
  const int n = basis.n();
  if (dim > 6000) throw std::invalid_argument("to_dense: dimension too large");
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  if (const auto* ld = std::get_if<LevelDiagK>(&op.kind)) {
    for (long i = 0; i < dim; ++i) M(i, i) = ld->d(basis.level(i));
  } else if (const auto* sd = std::get_if<StateDiagK>(&op.kind)) {
    for (long i = 0; i < dim; ++i) M(i, i) = sd->d(i);
  } else if (const auto* ks = std::get_if<KronSumK>(&op.kind)) {
    for (long i = 0; i < dim; ++i)
      for (long j = 0; j < dim; ++j)
        M(i, j) = fock_detail::kron_entry(*ks, basis.state(i), basis.state(j), n);
  } else if (const auto* mp = std::get_if<ModePermK>(&op.kind)) {
    for (long i = 0; i < dim; ++i) {
      const int* a = basis.state(i);
      std::vector<int> b(n);
      Complex sgn = 1;
      for (int j = 0; j < n; ++j) {
        b[mp->sigma[j]] = a[j];
        sgn *= std::pow(mp->signs[j], a[j]);
      }
      M(basis.index_of(b), i) = sgn;
    }
  } else {
    M = std::get<DenseK>(op.kind).m;
  }
  return M;
}

struct TraceResult {
  Complex value;
  double certified_tail = 0;
};

/// Trace of a factor product over the cutoff basis with an explicit bound on
/// the discarded levels. The factor at damped_index must be level-diagonal
/// with a declared tail model; the remaining factors contribute their
/// level-growth envelopes.
inline TraceResult trace_product(const std::vector<FockOperator>& factors, int damped_index) {
  if (factors.empty()) throw std::invalid_argument("trace_product: no factors");
  const int n = factors[0].n;
  const int N = factors[0].N;
  for (const auto& f : factors)
    if (f.n != n || f.N != N) throw std::invalid_argument("trace_product: mismatched shapes");
  if (damped_index < 0 || damped_index >= static_cast<int>(factors.size()))
    throw std::invalid_argument("trace_product: bad damped index");
  const auto& damped = factors[damped_index];
  if (damped.tail.kind == TailModel::Kind::None ||
      !std::holds_alternative<LevelDiagK>(damped.kind))
    throw std::invalid_argument("trace_product: damped factor lacks a certified tail model");

  // ---- certified tail over levels > N ----
  double C = 1.0 / std::tgamma(n);  // multiplicity C(L+n-1,n-1) <= (L+n)^{n-1}/(n-1)!
  double P = n - 1.0;
  for (int i = 0; i < static_cast<int>(factors.size()); ++i) {
    if (i == damped_index) continue;
    C *= factors[i].growth_C;
    P += factors[i].growth_p;
  }
  double tail = 0;
  const auto& tm = damped.tail;
  if (tm.kind == TailModel::Kind::Exponential) {
    double L0 = N + 1.0;
    double a0 = C * std::pow(L0 + n, P) * tm.scale * std::exp(-tm.rate * L0);
    double r = std::pow((L0 + 1 + n) / (L0 + n), P) * std::exp(-tm.rate);
    if (r >= 1) throw std::invalid_argument("trace_product: cutoff too small for geometric tail");
    tail = a0 / (1 - r);
  } else {
    // power decay: integral comparison, needs q - P > 1
    double q = tm.q;
    if (q - P <= 1)
      throw std::invalid_argument("trace_product: power tail not summable past the envelope");
    double c1 = std::max(1.0, n / tm.shift);
    tail = C * tm.scale * std::pow(c1, P) * std::pow(N + tm.shift, P - q + 1) / (q - P - 1);
  }

  // ---- value over the cutoff basis ----
  int nondiag = -1;
  bool all_level = true;
  for (int i = 0; i < static_cast<int>(factors.size()); ++i) {
    if (!std::holds_alternative<LevelDiagK>(factors[i].kind)) all_level = false;
    if (!factors[i].is_diagonal()) {
      if (nondiag >= 0) nondiag = -2;  // more than one
      else if (nondiag == -1) nondiag = i;
    }
  }

  Complex value = 0;
  if (all_level) {
    for (int L = 0; L <= N; ++L) {
      Complex prod = level_multiplicity(n, L);
      for (const auto& f : factors) prod *= std::get<LevelDiagK>(f.kind).d(L);
      value += prod;
    }
  } else if (nondiag != -2) {
    FockBasis basis(n, N);
    if (basis.dim() > 20'000'000)
      throw std::invalid_argument("trace_product: basis too large");
    for (long i = 0; i < basis.dim(); ++i) {
      Complex prod = 1;
      for (const auto& f : factors) {
        prod *= fock_detail::diagonal_entry(f, basis, i);
        if (prod == Complex(0, 0)) break;
      }
      value += prod;
    }
  } else {
    FockBasis basis(n, N);
    Eigen::MatrixXcd M = to_dense(factors[0], basis);
    for (std::size_t i = 1; i < factors.size(); ++i) M = M * to_dense(factors[i], basis);
    value = M.trace();
  }
  return {value, tail};
}

/// Operator norm of R_g^{-1} op^w(P) R_g - op^w(P o kappa_g) on the interior
/// block |alpha| <= N - deg P; kappa_g is the phase-space rotation of g.
inline double egorov_defect(const MonomialUnitary& g, const PolySymbol& P, int N) {
  const int n = static_cast<int>(g.n());
  FockBasis basis(n, N);

  // kappa for the diagonal part: per-mode rotation by phi_j
  Eigen::MatrixXd Md = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    double phi = std::arg(g.phases[j]);
    Md(j, j) = std::cos(phi);
    Md(j, n + j) = std::sin(phi);
    Md(n + j, j) = -std::sin(phi);
    Md(n + j, n + j) = std::cos(phi);
  }
  // kappa for the permutation part: x_j -> x_{sigma^{-1}(j)}
  Eigen::MatrixXd Mp = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  std::vector<int> sinv(n);
  for (int j = 0; j < n; ++j) sinv[g.sigma[j]] = j;
  for (int j = 0; j < n; ++j) {
    Mp(j, sinv[j]) = 1;
    Mp(n + j, n + sinv[j]) = 1;
  }
  auto Pg = poly_substitute(poly_substitute(P, Md), Mp);

  auto A = to_dense(op_weyl_poly(P, n, N), basis);
  auto B = to_dense(op_weyl_poly(Pg, n, N), basis);
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Identity(basis.dim(), basis.dim());
  for (const auto& f : fock_metaplectic(g, basis)) R = R * to_dense(f, basis);
  Eigen::MatrixXcd diff = R.adjoint() * A * R - B;

  const int inner = N - poly_degree(P);
  long d = basis.level_end(inner);
  return diff.topLeftCorner(d, d).norm();
}

}  // namespace shubin

#endif
