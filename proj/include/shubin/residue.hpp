#ifndef SHUBIN_RESIDUE_HPP
#define SHUBIN_RESIDUE_HPP

#include "shubin/group.hpp"
#include "shubin/symbol.hpp"
#include "shubin/traces.hpp"

namespace shubin {

/// Per-coordinate block type of the diagonal normal form: generic angle,
/// quarter turns (+/- pi/2), half turn (pi), fixed (angle 0).
enum class BlockType { Generic, QuarterPlus, QuarterMinus, Half, Fixed };

/// The affine phase-space reduction of Tr(R_g T_w A (H+mu^m)^{-K}) for
/// diagonal g: stationary shifts, the orthogonal block matrix B mapping the
/// integration variables (u_j, v_j) to (x_j, p_j), and the quadratic phase
/// coefficients transversal to the fixed sphere.
///
/// Slot convention: integration variables are indexed like phase space,
/// slot j = u_j, slot n+j = v_j.  Quarter-turn blocks integrate over u_j
/// only (their v-slot is inactive); fixed blocks are tangential.
struct ReducedPhaseData {
  int n = 0;
  std::vector<BlockType> type;              // per original coordinate
  std::vector<double> phi;                  // angle per coordinate
  std::vector<double> alpha, beta, gamma;   // generic blocks, 0 elsewhere
  std::vector<double> u0, v0;               // stationary shifts per coordinate
  std::vector<double> lam_minus, lam_plus;  // generic blocks, 0 elsewhere
  Eigen::MatrixXd B;                        // 2n x 2n orthogonal
  std::vector<double> b0;                   // shift in (x,p) slots, length 2n
  std::vector<double> lambda_tilde;         // transversal coefficients, block order
  std::vector<double> slot_lambda;          // per slot; 0 on tangential/inactive
  std::vector<int> slot_kind;               // 0 transversal, 1 tangential, 2 inactive
  int nprime = 0;                           // 2n - m2 - m3
  int m1 = 0, m2 = 0, m3 = 0, m4 = 0, m5 = 0;
};

namespace residue_detail {

inline BlockType classify_angle(double phi, double tol = 1e-10) {
  const double pi = std::numbers::pi;
  if (std::abs(phi) < tol) return BlockType::Fixed;
  if (std::abs(std::abs(phi) - pi) < tol) return BlockType::Half;
  if (std::abs(phi - pi / 2) < tol) return BlockType::QuarterPlus;
  if (std::abs(phi + pi / 2) < tol) return BlockType::QuarterMinus;
  return BlockType::Generic;
}

}  // namespace residue_detail

inline ReducedPhaseData reduced_phase_data(const GroupElement& e, const FixedPointData& fpd) {
  if (!e.g.is_diagonal())
    throw std::invalid_argument("reduced_phase_data: g must be diagonal");
  const int n = static_cast<int>(e.n());
  const double pi = std::numbers::pi;
  ReducedPhaseData r;
  r.n = n;
  r.type.resize(n);
  r.phi.resize(n);
  r.alpha.assign(n, 0);
  r.beta.assign(n, 0);
  r.gamma.assign(n, 0);
  r.u0.assign(n, 0);
  r.v0.assign(n, 0);
  r.lam_minus.assign(n, 0);
  r.lam_plus.assign(n, 0);
  r.B = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  r.b0.assign(2 * n, 0);
  r.slot_lambda.assign(2 * n, 0);
  r.slot_kind.assign(2 * n, 1);

  const double s2 = 1.0 / std::sqrt(2.0);
  std::vector<std::vector<double>> block_lt(n);
  for (int j = 0; j < n; ++j) {
    double phi = std::arg(e.g.phases[j]);
    double aj = e.w[j].real();
    double kj = -e.w[j].imag();
    BlockType bt = residue_detail::classify_angle(phi);
    r.type[j] = bt;
    r.phi[j] = phi;
    switch (bt) {
      case BlockType::Generic: {
        double rem = std::remainder(phi, pi / 2);
        if (std::abs(rem) < 1e-9)
          throw std::invalid_argument("reduced_phase_data: generic angle on the pi/2 lattice");
        double al = -2 * (1 - std::cos(phi)) / std::sin(phi);
        double be = 2 * kj / std::sin(phi);
        double ga = 2 * aj / std::tan(phi) + 2 * kj;
        r.alpha[j] = al;
        r.beta[j] = be;
        r.gamma[j] = ga;
        r.u0[j] = (2 * be - ga * al) / (4 - al * al);
        r.v0[j] = (2 * ga - be * al) / (4 - al * al);
        // both printed forms of lambda+-; they agree identically
        double lp = std::tan(phi) / 4 * (2 + al);
        double lm = std::tan(phi) / 4 * (2 - al);
        double lp2 = (std::sin(phi) - (1 - std::cos(phi))) / (2 * std::cos(phi));
        double lm2 = (std::sin(phi) + (1 - std::cos(phi))) / (2 * std::cos(phi));
        if (std::abs(lp - lp2) > 1e-9 * (1 + std::abs(lp)) ||
            std::abs(lm - lm2) > 1e-9 * (1 + std::abs(lm)))
          throw std::runtime_error("reduced_phase_data: lambda form mismatch");
        r.lam_plus[j] = lp2;
        r.lam_minus[j] = lm2;
        r.B(j, j) = s2; r.B(j, n + j) = s2;
        r.B(n + j, j) = -s2; r.B(n + j, n + j) = s2;
        r.b0[j] = r.u0[j];
        r.b0[n + j] = r.v0[j];
        r.slot_kind[j] = 0; r.slot_kind[n + j] = 0;
        r.slot_lambda[j] = -lm2;
        r.slot_lambda[n + j] = -lp2;
        block_lt[j] = {-lm2, -lp2};
        ++r.m1;
        break;
      }
      case BlockType::QuarterPlus:
      case BlockType::QuarterMinus: {
        double sphi = bt == BlockType::QuarterPlus ? 1.0 : -1.0;
        r.u0[j] = (aj - kj * sphi) / 2;
        r.b0[j] = r.u0[j];
        r.slot_kind[j] = 0;
        r.slot_kind[n + j] = 2;  // v_j is substituted, not integrated
        r.slot_lambda[j] = -sphi;
        block_lt[j] = {-sphi};
        if (bt == BlockType::QuarterPlus) ++r.m2; else ++r.m3;
        break;
      }
      case BlockType::Half: {
        r.u0[j] = aj / 2;
        r.v0[j] = kj / 2;
        r.B(j, j) = s2; r.B(j, n + j) = s2;
        r.B(n + j, j) = -s2; r.B(n + j, n + j) = s2;
        r.b0[j] = r.u0[j];
        r.b0[n + j] = r.v0[j];
        r.slot_kind[j] = 0; r.slot_kind[n + j] = 0;
        r.slot_lambda[j] = 1.0;
        r.slot_lambda[n + j] = -1.0;
        block_lt[j] = {1.0, -1.0};
        ++r.m4;
        break;
      }
      case BlockType::Fixed:
        ++r.m5;
        break;
    }
  }
  if (fpd.m1 != r.m1 || fpd.m2 != r.m2 || fpd.m3 != r.m3 || fpd.m4 != r.m4 ||
      fpd.m5 != r.m5)
    throw std::invalid_argument("reduced_phase_data: fixed point data mismatch");
  r.nprime = 2 * n - r.m2 - r.m3;
  // block order: generic angles first, then +pi/2, -pi/2, pi
  for (BlockType bt : {BlockType::Generic, BlockType::QuarterPlus, BlockType::QuarterMinus,
                       BlockType::Half})
    for (int j = 0; j < n; ++j)
      if (r.type[j] == bt)
        for (double l : block_lt[j]) r.lambda_tilde.push_back(l);
  return r;
}

/// Exact Fresnel integral over the directions transversal to the fixed
/// sphere: prod_t sqrt(pi/|lt|) e^{i pi/4 sgn lt}.
inline Complex fresnel_factor(const ReducedPhaseData& rpd) {
  const double pi = std::numbers::pi;
  Complex out(1, 0);
  for (double l : rpd.lambda_tilde) {
    if (l == 0) throw std::domain_error("fresnel_factor: zero phase coefficient");
    out *= std::sqrt(pi / std::abs(l)) * std::polar(1.0, (l > 0 ? 1.0 : -1.0) * pi / 4);
  }
  return out;
}

namespace residue_detail {

/// Integral of theta^mono over S^{d-1} (d = number of axes in fixedAxes):
/// 2 prod Gamma((a_i+1)/2) / Gamma((|a|+d)/2), zero for odd exponents.
inline double sphere_moment(const MultiIndex& mono, const std::vector<int>& axes) {
  double lg = 0;
  int total = 0;
  for (int ax : axes) {
    int a = mono[ax];
    if (a % 2 != 0) return 0;
    total += a;
    lg += std::lgamma((a + 1) / 2.0);
  }
  lg -= std::lgamma((total + static_cast<int>(axes.size())) / 2.0);
  return 2 * std::exp(lg);
}

/// Pullback c(M w) for orthogonal M; radial factors are invariant.
inline NumericComponent compose_linear(const NumericComponent& c, const Eigen::MatrixXd& M) {
  const int dim = static_cast<int>(c.dim());
  if (M.rows() != dim || M.cols() != dim)
    throw std::invalid_argument("compose_linear: dimension mismatch");
  if ((M.transpose() * M - Eigen::MatrixXd::Identity(dim, dim)).norm() > 1e-9)
    throw std::invalid_argument("compose_linear: matrix not orthogonal");
  NumericComponent out(c.dim(), c.degree());
  for (const auto& t : c.terms()) {
    std::map<std::vector<int>, Complex> cur;
    cur[std::vector<int>(dim, 0)] = t.coef;
    for (int k = 0; k < dim; ++k) {
      for (int rep = 0; rep < t.monomial[k]; ++rep) {
        std::map<std::vector<int>, Complex> next;
        for (const auto& [expo, cc] : cur) {
          for (int l = 0; l < dim; ++l) {
            if (M(k, l) == 0.0) continue;
            auto e2 = expo;
            e2[l] += 1;
            next[e2] += cc * M(k, l);
          }
        }
        cur = std::move(next);
      }
    }
    for (const auto& [expo, cc] : cur)
      if (std::abs(cc) > 0) out.add_term(cc, MultiIndex(expo), t.radial_power);
  }
  return out;
}

/// The scalar in front of the residue integral: (2 pi)^{-n+m2+m3}
/// prod_{m1} sqrt(1 + i tg phi) (right-half-plane root)
/// prod_{m1+m2+m3} e^{(i/4) ctg(phi/2)(k^2+a^2)}.
inline Complex printed_prefactor(const GroupElement& e, const ReducedPhaseData& rpd) {
  const int n = rpd.n;
  Complex pre = std::pow(2 * std::numbers::pi, -n + rpd.m2 + rpd.m3);
  for (int j = 0; j < n; ++j) {
    double aj = e.w[j].real();
    double kj = -e.w[j].imag();
    switch (rpd.type[j]) {
      case BlockType::Generic:
        pre *= std::sqrt(Complex(1.0, std::tan(rpd.phi[j])));
        [[fallthrough]];
      case BlockType::QuarterPlus:
      case BlockType::QuarterMinus:
        pre *= std::exp(Complex(0, (kj * kj + aj * aj) / (4 * std::tan(rpd.phi[j] / 2))));
        break;
      default:
        break;
    }
  }
  return pre;
}

inline std::vector<int> fixed_axes(const ReducedPhaseData& rpd) {
  std::vector<int> axes;
  for (int j = 0; j < rpd.n; ++j)
    if (rpd.type[j] == BlockType::Fixed) axes.push_back(j);
  for (int j = 0; j < rpd.n; ++j)
    if (rpd.type[j] == BlockType::Fixed) axes.push_back(rpd.n + j);
  return axes;
}

inline bool w_on_fixed_block(const GroupElement& e, const ReducedPhaseData& rpd,
                             double tol = 1e-12) {
  for (int j = 0; j < rpd.n; ++j)
    if (rpd.type[j] == BlockType::Fixed && std::abs(e.w[j]) > tol) return true;
  return false;
}

}  // namespace residue_detail

/// Integral of the degree -2 m5 component over the unit sphere of the fixed
/// coordinates (all other coordinates set to 0), exact per monomial moment.
inline Complex sphere_integral(const NumericComponent& c, int m5,
                               const std::vector<int>& fixedAxes) {
  if (m5 < 1) throw std::invalid_argument("sphere_integral: degenerate sphere (m5 = 0)");
  if (static_cast<int>(fixedAxes.size()) != 2 * m5)
    throw std::invalid_argument("sphere_integral: axis count must be 2 m5");
  if (c.is_zero()) return Complex(0, 0);
  if (c.degree() != -2 * m5)
    throw std::invalid_argument("sphere_integral: component degree must be -2 m5");
  std::vector<char> on_axis(c.dim(), 0);
  for (int ax : fixedAxes) on_axis[ax] = 1;
  Complex out(0, 0);
  for (const auto& t : c.terms()) {
    bool supported = true;
    for (std::size_t k = 0; k < c.dim(); ++k)
      if (!on_axis[k] && t.monomial[k] != 0) { supported = false; break; }
    if (!supported) continue;  // vanishes when off-sphere coordinates are set to 0
    out += t.coef * residue_detail::sphere_moment(t.monomial, fixedAxes);
  }
  return out;
}

/// The closed residue formula exactly as printed: prefactor times the sphere
/// integral of the given degree -2 m5 component.
inline Complex residue_printed(const GroupElement& e, const NumericComponent& a) {
  auto fpd = fixed_point_data(e.g);
  if (fpd.m5 == 0)
    throw std::domain_error("residue_printed: empty fixed sphere (m5 = 0)");
  auto rpd = reduced_phase_data(e, fpd);
  if (!a.is_zero() && a.degree() != -2 * fpd.m5)
    throw std::invalid_argument("residue_printed: component degree must be -2 m5");
  return residue_detail::printed_prefactor(e, rpd) *
         sphere_integral(a, fpd.m5, residue_detail::fixed_axes(rpd));
}

/// The assembled closed form: printed prefactor x transversal Fresnel factor
/// x sphere integral of the principal component composed with B.  Zero when
/// m5 = 0, when ord A < -2 m5, or when w has a component along the fixed
/// block (the trace is then O(t^infinity)).
inline Complex residue_assembled(const GroupElement& e, const NumericSymbol& A,
                                 const FixedPointData& fpd) {
  if (!e.g.is_diagonal())
    throw std::invalid_argument("residue_assembled: g must be diagonal (reduce first)");
  const int m5 = fpd.m5;
  if (m5 == 0) return Complex(0, 0);
  if (A.order() < -2 * m5) return Complex(0, 0);
  if (A.order() > -2 * m5)
    throw std::invalid_argument("residue_assembled: ord A above -2 m5, use residue_case_iii");
  auto rpd = reduced_phase_data(e, fpd);
  if (residue_detail::w_on_fixed_block(e, rpd)) return Complex(0, 0);
  auto principal = residue_detail::compose_linear(A.component(0), rpd.B);
  return residue_detail::printed_prefactor(e, rpd) * fresnel_factor(rpd) *
         sphere_integral(principal, m5, residue_detail::fixed_axes(rpd));
}

namespace residue_detail {

inline double binom_int(int p, int q) {
  double b = 1;
  for (int i = 0; i < q; ++i) b *= static_cast<double>(p - i) / (i + 1);
  return b;
}

/// prod over transversal slots of the exact Fresnel-Gaussian moment of
/// theta_t^{beta_t} relative to the leading factor: (beta_t-1)!! (i/(2 lt))^{beta_t/2}.
inline Complex transversal_moment(const MultiIndex& beta, const std::vector<int>& slots,
                                  const std::vector<double>& slot_lambda) {
  Complex out(1, 0);
  for (int s : slots) {
    int b = beta[s];
    if (b == 0) continue;
    double df = 1;
    for (int k = b - 1; k >= 1; k -= 2) df *= k;
    out *= df * std::pow(Complex(0, 1) / (2 * slot_lambda[s]), b / 2);
  }
  return out;
}

/// Sum over gamma >= 0 supported on the transversal slots with |gamma| = q of
/// (q!/gamma!) M_{mono + 2 gamma}; recursion over the slot list.
inline Complex gamma_sum(const MultiIndex& mono, int q, const std::vector<int>& slots,
                         const std::vector<double>& slot_lambda, std::size_t pos,
                         double multinom, MultiIndex& beta) {
  if (pos == slots.size()) {
    if (q != 0) return Complex(0, 0);
    return multinom * transversal_moment(beta, slots, slot_lambda);
  }
  Complex acc(0, 0);
  double fact = 1;
  for (int g = 0; g <= q; ++g) {
    if (g > 0) fact *= g;
    beta[slots[pos]] = mono[slots[pos]] + 2 * g;
    acc += gamma_sum(mono, q - g, slots, slot_lambda, pos + 1, multinom / fact, beta);
  }
  beta[slots[pos]] = mono[slots[pos]];
  return acc;
}

}  // namespace residue_detail

/// Residue for ord A > -2 m5: sum over component drops j, Taylor shifts alpha
/// and transversal Gaussian moment orders J subject to
/// ord A - j - |alpha| - 2J = -2 m5, each term integrated exactly over the
/// fixed sphere against the Fresnel moments of the transversal phase.
inline Complex residue_case_iii(const GroupElement& e, const NumericSymbol& A,
                                const FixedPointData& fpd, int maxOrder = 16) {
  if (!e.g.is_diagonal())
    throw std::invalid_argument("residue_case_iii: g must be diagonal (reduce first)");
  const int n = static_cast<int>(e.n());
  const int m5 = fpd.m5;
  if (m5 == 0) return Complex(0, 0);
  auto rpd = reduced_phase_data(e, fpd);
  if (rpd.m2 + rpd.m3 > 0)
    throw std::invalid_argument(
        "residue_case_iii: quarter-turn blocks are outside the derivative pipeline");
  if (residue_detail::w_on_fixed_block(e, rpd)) return Complex(0, 0);

  const int jmax = A.order() + 2 * m5;
  if (jmax < 0) return Complex(0, 0);
  if (maxOrder < jmax)
    throw std::invalid_argument("residue_case_iii: components missing below the threshold");

  // transversal / tangential slot partition; b0 support drives the Taylor sum
  std::vector<int> transversal, b0_slots;
  for (int s = 0; s < 2 * n; ++s) {
    if (rpd.slot_kind[s] == 0) transversal.push_back(s);
    if (std::abs(rpd.b0[s]) > 1e-14) b0_slots.push_back(s);
  }
  auto faxes = residue_detail::fixed_axes(rpd);

  Complex total(0, 0);
  for (int j = 0; j <= jmax; ++j) {
    auto comp = A.component(j);
    if (comp.is_zero()) continue;
    // enumerate alpha supported on the nonzero entries of b0, |alpha| <= jmax - j
    std::vector<MultiIndex> alphas;
    MultiIndex a0(2 * n);
    alphas.push_back(a0);
    if (!b0_slots.empty()) {
      for (int wgt = 1; wgt <= jmax - j; ++wgt) {
        for_each_multi_index(b0_slots.size(), wgt, [&](const MultiIndex& packed) {
          MultiIndex full(2 * n);
          for (std::size_t k = 0; k < b0_slots.size(); ++k) full[b0_slots[k]] = packed[k];
          alphas.push_back(full);
        });
      }
    }
    for (const auto& alpha : alphas) {
      const int aw = alpha.weight();
      const int twoJ = A.order() - j - aw + 2 * m5;
      if (twoJ < 0 || twoJ % 2 != 0) continue;
      const int J = twoJ / 2;
      Complex cf(1, 0);
      for (int s = 0; s < 2 * n; ++s)
        for (int r = 0; r < alpha[s]; ++r) cf *= -rpd.b0[s] / (r + 1);
      auto G = residue_detail::compose_linear(comp.diff(alpha), rpd.B);
      for (const auto& t : G.terms()) {
        // parity: both the sphere moment and the Fresnel moment vanish on
        // odd exponents
        int wT = 0, wF = 0;
        bool odd = false;
        for (int s = 0; s < 2 * n; ++s) {
          if (rpd.slot_kind[s] == 1) wF += t.monomial[s];
          else wT += t.monomial[s];
          if (t.monomial[s] % 2 != 0) odd = true;
        }
        if (odd) continue;
        const int q = J - wT / 2;
        if (q < 0) continue;
        const int P = wF / 2 + m5 - 1;
        if (q > P) continue;
        double Somega = residue_detail::sphere_moment(t.monomial, faxes);
        if (Somega == 0) continue;
        MultiIndex beta = t.monomial;
        Complex msum = residue_detail::gamma_sum(t.monomial, q, transversal,
                                                 rpd.slot_lambda, 0, 1.0, beta);
        double fq = 1;
        for (int k = 2; k <= q; ++k) fq *= k;
        total += cf * t.coef * Somega * ((q % 2 == 0) ? 1.0 : -1.0) *
                 residue_detail::binom_int(P, q) * fq * msum;
      }
    }
  }
  return residue_detail::printed_prefactor(e, rpd) * fresnel_factor(rpd) * total;
}

/// Remark-level reduction of a monomial element: (w, g) with g = u g0 u* is
/// traded for (u* w, g0) with the symbol pulled back along the phase-space
/// rotation of u (z -> conj(u) z in real form).
struct ReducedElement {
  GroupElement e;
  NumericSymbol a;
};

inline ReducedElement reduce_element(const GroupElement& e, const NumericSymbol& a) {
  if (e.g.is_diagonal()) return {e, a};
  const int n = static_cast<int>(e.n());
  auto d = diagonalize_monomial(e.g);
  Eigen::VectorXcd w(n);
  for (int j = 0; j < n; ++j) w(j) = e.w[j];
  Eigen::VectorXcd w0 = d.u.adjoint() * w;
  GroupElement e0;
  e0.w.assign(w0.data(), w0.data() + n);
  e0.g = d.g0;
  Eigen::MatrixXcd uc = d.u.conjugate();
  Eigen::MatrixXd M(2 * n, 2 * n);
  M.topLeftCorner(n, n) = uc.real();
  M.topRightCorner(n, n) = -uc.imag();
  M.bottomLeftCorner(n, n) = uc.imag();
  M.bottomRightCorner(n, n) = uc.real();
  NumericSymbol a0(a.n(), a.order());
  for (const auto& [j, c] : a.components())
    a0.set_component(j, residue_detail::compose_linear(c, M));
  return {e0, a0};
}

/// Residue of a single (element, symbol) pair: monomial g reduced to diagonal
/// form, then dispatched on ord A against -2 m5.
inline Complex element_residue(const GroupElement& e, const NumericSymbol& a,
                               int maxOrder = 16) {
  auto red = reduce_element(e, a);
  auto fpd = fixed_point_data(red.e.g);
  if (fpd.m5 == 0) return Complex(0, 0);
  if (red.a.order() < -2 * fpd.m5) return Complex(0, 0);
  if (red.a.order() == -2 * fpd.m5) return residue_assembled(red.e, red.a, fpd);
  return residue_case_iii(red.e, red.a, fpd, maxOrder);
}

struct ResidueSummand {
  GroupElement e;
  NumericSymbol a;
};

/// Residue localized at a finite conjugacy class: sum of the per-element
/// residues of the summands whose element lies in the class.
inline Complex localized_residue(const ConjugacyClass& cls,
                                 const std::vector<ResidueSummand>& summands,
                                 int maxOrder = 16) {
  if (!cls.finite)
    throw std::invalid_argument("localized_residue: conjugacy class not finite");
  std::set<std::vector<long long>> keys;
  for (const auto& el : cls.elements) keys.insert(detail::element_key(el));
  Complex total(0, 0);
  for (const auto& s : summands) {
    if (!keys.count(detail::element_key(s.e))) continue;
    total += element_residue(s.e, s.a, maxOrder);
  }
  return total;
}

/// Operator of the form R_g T_w A with both a spectral realization (recipe)
/// and its symbol order.
struct LocalizedOp {
  GroupElement e;
  OperatorRecipe A;
  int ordA = 0;
};

/// |res([B1, B2])| via the spectral oracle: the commutator heat trace is
/// sampled on the grid and the t^0 log t coefficient of its expansion is
/// extracted; the residue defect is ord H times that coefficient.
inline double trace_defect(const LocalizedOp& B1, const LocalizedOp& B2,
                           const AuxiliarySpec& aux,
                           std::vector<double> grid = default_grid(), int nTerms = -1) {
  const int n = static_cast<int>(B1.e.n());
  if (B2.e.n() != B1.e.n()) throw std::invalid_argument("trace_defect: dimension mismatch");
  double growth_p = 0;
  for (const auto& f : B1.A(8)) growth_p += f.growth_p;
  for (const auto& f : B2.A(8)) growth_p += f.growth_p;
  std::vector<std::pair<double, Complex>> samples;
  for (double t : grid) {
    int N = heat_cutoff(t, n, growth_p, 1e-13);
    auto f12 = trace_detail::element_factors(B1.e, B1.A, N);
    auto more12 = trace_detail::element_factors(B2.e, B2.A, N);
    f12.insert(f12.end(), more12.begin(), more12.end());
    f12.push_back(heat_factor(t, n, aux.c, N));
    auto f21 = trace_detail::element_factors(B2.e, B2.A, N);
    auto more21 = trace_detail::element_factors(B1.e, B1.A, N);
    f21.insert(f21.end(), more21.begin(), more21.end());
    f21.push_back(heat_factor(t, n, aux.c, N));
    Complex t12 = trace_product(f12, static_cast<int>(f12.size()) - 1).value;
    Complex t21 = trace_product(f21, static_cast<int>(f21.size()) - 1).value;
    samples.push_back({t, t12 - t21});
  }
  const int m = trace_detail::fixed_dim(compose(B1.e, B2.e).product.g);
  if (nTerms < 0) nTerms = 7;
  auto fit = fit_expansion(samples, m, B1.ordA + B2.ordA, aux.m_order, nTerms);
  return std::abs(static_cast<double>(aux.m_order) * fit.coefficient(Rational(0), true));
}

}  // namespace shubin

#endif
