#ifndef SHUBIN_GROUP_HPP
#define SHUBIN_GROUP_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <deque>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

namespace shubin {

using Complex = std::complex<double>;

/// Monomial unitary on C^n: (g z)_j = phase_j * z_{sigma^{-1}(j)},
/// i.e. g = diag(phases) . P_sigma with basis action e_k -> phase_{sigma(k)} e_{sigma(k)}.
struct MonomialUnitary {
  std::vector<int> sigma;       // 0-based permutation, k -> sigma[k]
  std::vector<Complex> phases;  // unit modulus, indexed by target slot

  static MonomialUnitary identity(std::size_t n) {
    MonomialUnitary g;
    g.sigma.resize(n);
    for (std::size_t k = 0; k < n; ++k) g.sigma[k] = static_cast<int>(k);
    g.phases.assign(n, Complex(1, 0));
    return g;
  }

  static MonomialUnitary diagonal(std::vector<Complex> phases) {
    MonomialUnitary g = identity(phases.size());
    g.phases = std::move(phases);
    g.validate();
    return g;
  }

  static MonomialUnitary from_angles(std::vector<int> sigma, const std::vector<double>& angles) {
    MonomialUnitary g;
    g.sigma = std::move(sigma);
    for (double a : angles) g.phases.push_back(std::polar(1.0, a));
    g.validate();
    return g;
  }

  void validate() const {
    const std::size_t n = sigma.size();
    if (phases.size() != n) throw std::invalid_argument("MonomialUnitary: size mismatch");
    std::vector<char> seen(n, 0);
    for (int s : sigma) {
      if (s < 0 || static_cast<std::size_t>(s) >= n || seen[s])
        throw std::invalid_argument("MonomialUnitary: sigma not a permutation");
      seen[s] = 1;
    }
    for (const auto& p : phases)
      if (std::abs(std::abs(p) - 1.0) > 1e-12)
        throw std::invalid_argument("MonomialUnitary: phase not unit modulus");
  }

  std::size_t n() const { return sigma.size(); }

  bool is_diagonal() const {
    for (std::size_t k = 0; k < sigma.size(); ++k)
      if (sigma[k] != static_cast<int>(k)) return false;
    return true;
  }

  std::vector<Complex> apply(const std::vector<Complex>& z) const {
    std::vector<Complex> out(n());
    for (std::size_t k = 0; k < n(); ++k) out[sigma[k]] = phases[sigma[k]] * z[k];
    return out;
  }

  MonomialUnitary inverse() const {
    MonomialUnitary g;
    g.sigma.resize(n());
    g.phases.resize(n());
    for (std::size_t k = 0; k < n(); ++k) {
      g.sigma[sigma[k]] = static_cast<int>(k);
      g.phases[k] = std::conj(phases[sigma[k]]);
    }
    return g;
  }

  friend MonomialUnitary operator*(const MonomialUnitary& g1, const MonomialUnitary& g2) {
    if (g1.n() != g2.n()) throw std::invalid_argument("MonomialUnitary *: n mismatch");
    const std::size_t n = g1.n();
    MonomialUnitary g;
    g.sigma.resize(n);
    g.phases.resize(n);
    std::vector<int> s1inv(n);
    for (std::size_t k = 0; k < n; ++k) s1inv[g1.sigma[k]] = static_cast<int>(k);
    for (std::size_t k = 0; k < n; ++k) g.sigma[k] = g1.sigma[g2.sigma[k]];
    for (std::size_t j = 0; j < n; ++j) g.phases[j] = g1.phases[j] * g2.phases[s1inv[j]];
    return g;
  }

  Eigen::MatrixXcd matrix() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n(), n());
    for (std::size_t k = 0; k < n(); ++k) m(sigma[k], k) = phases[sigma[k]];
    return m;
  }
};

/// Element (w, g) of C^n x| U(n), w = a - ik with a the translation and k the
/// modulation of T_w.
struct GroupElement {
  std::vector<Complex> w;
  MonomialUnitary g;

  static GroupElement identity(std::size_t n) {
    return {std::vector<Complex>(n, Complex(0, 0)), MonomialUnitary::identity(n)};
  }

  static GroupElement translation(std::vector<Complex> w) {
    const std::size_t n = w.size();
    return {std::move(w), MonomialUnitary::identity(n)};
  }

  static GroupElement rotation(MonomialUnitary g) {
    const std::size_t n = g.n();
    return {std::vector<Complex>(n, Complex(0, 0)), std::move(g)};
  }

  std::size_t n() const { return w.size(); }
};

struct ComposeResult {
  Complex phase;  // unit scalar
  GroupElement product;
};

/// R_{g1} T_{w1} R_{g2} T_{w2} = phase . R_{g1 g2} T_{g2^{-1} w1 + w2} with
/// phase = exp(-i Im((g2^{-1} w1, w2)) / 2), (v, w) = sum v_j conj(w_j).
inline ComposeResult compose(const GroupElement& e1, const GroupElement& e2) {
  if (e1.n() != e2.n()) throw std::invalid_argument("compose: dimension mismatch");
  auto v = e2.g.inverse().apply(e1.w);
  double im = 0;
  for (std::size_t k = 0; k < v.size(); ++k) im += std::imag(v[k] * std::conj(e2.w[k]));
  GroupElement prod;
  prod.w.resize(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) prod.w[k] = v[k] + e2.w[k];
  prod.g = e1.g * e2.g;
  return {std::polar(1.0, -im / 2.0), std::move(prod)};
}

inline GroupElement inverse(const GroupElement& e) {
  GroupElement out;
  out.w = e.g.apply(e.w);
  for (auto& v : out.w) v = -v;
  out.g = e.g.inverse();
  return out;
}

/// Group-level conjugation s e s^{-1} (projective phases discarded).
inline GroupElement conjugate(const GroupElement& s, const GroupElement& e) {
  auto se = compose(s, e).product;
  return compose(se, inverse(s)).product;
}

/// Block sizes of the diagonal normal form: m1 generic angles, m2 at +pi/2,
/// m3 at -pi/2, m4 at pi, m5 at 0 (the complex fixed-space dimension).
/// angles lists all n angles in block order (m1 first, then pi/2, -pi/2, pi, 0).
struct FixedPointData {
  int m1 = 0, m2 = 0, m3 = 0, m4 = 0, m5 = 0;
  std::vector<double> angles;

  int fixed_dim() const { return m5; }
};

inline FixedPointData fixed_point_data(const MonomialUnitary& g, double tol = 1e-10) {
  if (!g.is_diagonal()) throw std::invalid_argument("fixed_point_data: non-diagonal input");
  const double pi = std::numbers::pi;
  FixedPointData fp;
  std::vector<double> generic;
  for (const auto& p : g.phases) {
    double phi = std::arg(p);  // (-pi, pi]
    if (std::abs(phi) < tol) {
      ++fp.m5;
    } else if (std::abs(phi - pi) < tol || std::abs(phi + pi) < tol) {
      ++fp.m4;
    } else if (std::abs(phi - pi / 2) < tol) {
      ++fp.m2;
    } else if (std::abs(phi + pi / 2) < tol) {
      ++fp.m3;
    } else {
      ++fp.m1;
      generic.push_back(phi);
    }
  }
  fp.angles = generic;
  for (int k = 0; k < fp.m2; ++k) fp.angles.push_back(pi / 2);
  for (int k = 0; k < fp.m3; ++k) fp.angles.push_back(-pi / 2);
  for (int k = 0; k < fp.m4; ++k) fp.angles.push_back(pi);
  for (int k = 0; k < fp.m5; ++k) fp.angles.push_back(0.0);
  return fp;
}

/// Fixed-point set of v -> g v + w: empty iff w has a nonzero component in
/// ker(g - I); otherwise an affine subspace point + span(basis columns).
struct AffineFixedPoints {
  bool exists = false;
  Eigen::VectorXcd point;
  Eigen::MatrixXcd basis;  // orthonormal columns spanning ker(g - I)
};

inline AffineFixedPoints affine_fixed_points(const MonomialUnitary& g,
                                             const std::vector<Complex>& w,
                                             double tol = 1e-10) {
  const std::size_t n = g.n();
  if (w.size() != n) throw std::invalid_argument("affine_fixed_points: dimension mismatch");
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n) - g.matrix();
  Eigen::VectorXcd b(n);
  for (std::size_t k = 0; k < n; ++k) b(k) = w[k];

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;

  AffineFixedPoints out;
  out.basis = svd.matrixV().rightCols(n - rank);
  // solvable iff b is orthogonal to the cokernel (left null space)
  Eigen::VectorXcd resid = svd.matrixU().rightCols(n - rank).adjoint() * b;
  if (resid.norm() > tol * (1.0 + b.norm())) {
    out.exists = false;
    return out;
  }
  out.exists = true;
  Eigen::VectorXcd y = svd.matrixU().adjoint() * b;
  Eigen::VectorXcd z = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < rank; ++k) z(k) = y(k) / sv(k);
  out.point = svd.matrixV() * z;
  return out;
}

struct MonomialDiagonalization {
  Eigen::MatrixXcd u;   // unitary with g = u diag u^*
  MonomialUnitary g0;   // diagonal part (identity permutation)
};

/// Cycle-by-cycle diagonalization: a length-c cycle with phase product
/// e^{i Phi} contributes eigenphases e^{i(Phi + 2 pi l)/c}, l = 0..c-1, with
/// DFT-weighted eigenvectors.
inline MonomialDiagonalization diagonalize_monomial(const MonomialUnitary& g) {
  const std::size_t n = g.n();
  MonomialDiagonalization out;
  out.u = Eigen::MatrixXcd::Zero(n, n);
  out.g0 = MonomialUnitary::identity(n);

  std::vector<char> visited(n, 0);
  std::size_t col = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::vector<std::size_t> cycle;
    std::size_t k = start;
    do {
      visited[k] = 1;
      cycle.push_back(k);
      k = g.sigma[k];
    } while (k != start);
    const std::size_t c = cycle.size();
    double Phi = 0;
    for (std::size_t t = 0; t < c; ++t) Phi += std::arg(g.phases[g.sigma[cycle[t]]]);
    for (std::size_t l = 0; l < c; ++l) {
      Complex lambda = std::polar(1.0, (Phi + 2 * std::numbers::pi * l) / c);
      // g v = lambda v with v_t built along the cycle: coefficient at cycle[t]
      // is (prod of phases entering through step s <= t) / lambda^t
      Complex coef(1, 0);
      Complex lam_pow(1, 0);
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
      v(cycle[0]) = 1.0;
      for (std::size_t t = 1; t < c; ++t) {
        coef *= g.phases[cycle[t]];
        lam_pow *= lambda;
        v(cycle[t]) = coef / lam_pow;
      }
      v /= std::sqrt(static_cast<double>(c));
      out.u.col(col) = v;
      out.g0.phases[col] = lambda;
      ++col;
    }
  }
  return out;
}

namespace detail {

inline long long quantize(double v, double scale = 1e9) {
  return std::llround(v * scale);
}

inline std::vector<long long> element_key(const GroupElement& e) {
  std::vector<long long> key;
  for (const auto& v : e.w) {
    key.push_back(quantize(v.real()));
    key.push_back(quantize(v.imag()));
  }
  for (int s : e.g.sigma) key.push_back(s);
  for (const auto& p : e.g.phases) {
    key.push_back(quantize(p.real()));
    key.push_back(quantize(p.imag()));
  }
  return key;
}

}  // namespace detail

struct ConjugacyClass {
  std::vector<GroupElement> elements;
  bool finite = false;  // closure stabilized strictly before the radius bound
};

/// Breadth-first closure of e under conjugation by generators and their
/// inverses, up to word length radius.
inline ConjugacyClass conjugacy_class(const std::vector<GroupElement>& generators,
                                      const GroupElement& e, int radius) {
  if (radius < 0) throw std::invalid_argument("conjugacy_class: negative radius");
  std::vector<GroupElement> conjugators;
  for (const auto& s : generators) {
    conjugators.push_back(s);
    conjugators.push_back(inverse(s));
  }

  std::set<std::vector<long long>> seen;
  std::vector<GroupElement> elements;
  std::deque<GroupElement> frontier;
  seen.insert(detail::element_key(e));
  elements.push_back(e);
  frontier.push_back(e);

  ConjugacyClass out;
  for (int depth = 1; depth <= radius; ++depth) {
    std::deque<GroupElement> next;
    for (const auto& x : frontier) {
      for (const auto& s : conjugators) {
        auto y = conjugate(s, x);
        if (seen.insert(detail::element_key(y)).second) {
          elements.push_back(y);
          next.push_back(y);
        }
      }
    }
    if (next.empty()) {
      out.finite = true;
      out.elements = std::move(elements);
      return out;
    }
    frontier = std::move(next);
  }
  out.finite = false;
  out.elements = std::move(elements);
  return out;
}

}  // namespace shubin

#endif
