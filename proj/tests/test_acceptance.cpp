// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>

#include "shubin/parametrix.hpp"
#include "shubin/residue.hpp"

using namespace shubin;
using std::numbers::pi;

namespace {

int g_failures = 0;

void report(int k, bool pass, const std::string& detail) {
  std::printf("CRITERION %d: %s — %s\n", k, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

NumericSymbol inverse_oscillator_principal(int n) {
  NumericComponent c(2 * n, -2 * n);
  c.add_term(std::pow(2.0, n), MultiIndex(2 * n), Rational(n));
  NumericSymbol s(n, -2 * n);
  s.set_component(0, c);
  return s;
}

GroupElement plane_rotation(double phi) {
  return GroupElement::rotation(
      MonomialUnitary::diagonal({std::polar(1.0, phi), Complex(1, 0)}));
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::vector<double> geometric_grid(double start, double step_log2_den, int count) {
  std::vector<double> g;
  for (int i = 0; i <= count; ++i) g.push_back(start * std::pow(2.0, i / step_log2_den));
  return g;
}

// ---------------------------------------------------------------------------

void criterion1() {
  auto start = std::chrono::steady_clock::now();
  double worst_symbolic = 0;
  for (int n = 1; n <= 3; ++n) {
    auto id = GroupElement::identity(n);
    auto A = inverse_oscillator_principal(n);
    double expected = 2.0 / factorial(n - 1);
    auto printed = residue_printed(id, A.component(0));
    auto assembled = residue_assembled(id, A, fixed_point_data(id.g));
    worst_symbolic = std::max({worst_symbolic, std::abs(printed - expected),
                               std::abs(assembled - expected)});
  }
  // spectral oracle at fixed cutoff 400 on the [0.05, 0.8] grid
  double worst_spectral = 0;
  AuxiliarySpec aux;
  for (int n = 1; n <= 3; ++n) {
    std::vector<std::pair<double, Complex>> samples;
    for (double t : default_grid())
      samples.push_back(
          {t, heat_trace(GroupElement::identity(n), recipe_H0_power(n, n), t, aux, 400).value});
    auto fit = fit_expansion(samples, n, -2 * n, aux.m_order, 7);
    Complex c0p = -fit.coefficient(Rational(0), true);
    worst_spectral = std::max(
        worst_spectral,
        std::abs(static_cast<double>(aux.m_order) * c0p - 2.0 / factorial(n - 1)));
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool pass = worst_symbolic < 1e-10 && worst_spectral < 1e-4 && secs < 60;
  report(1, pass,
         "identity residue 2/(n-1)!: symbolic defect " + fmt(worst_symbolic) +
             ", spectral defect " + fmt(worst_spectral) + ", " + fmt(secs) + " s");
}

void criterion2() {
  AuxiliarySpec aux;
  auto A = recipe_identity();
  double worst = 0;
  for (double t : default_grid()) {
    Complex csch(1.0 / (2.0 * std::sinh(t / 2)), 0);
    {
      int N = heat_cutoff(t, 1, 0, 1e-13);
      auto r = heat_trace(GroupElement::identity(1), A, t, aux, N);
      worst = std::max(worst, std::abs(r.value - csch) / std::abs(csch));

      double phi = 2 * pi / 5;
      auto g = GroupElement::rotation(MonomialUnitary::diagonal({std::polar(1.0, phi)}));
      Complex rot = std::exp(Complex(-t / 2, 0)) / (1.0 - std::exp(Complex(-t, -phi)));
      worst = std::max(worst,
                       std::abs(heat_trace(g, A, t, aux, N).value - rot) / std::abs(rot));

      Complex w(0.8, -0.3);
      Complex tr = std::exp(Complex(-std::norm(w) / 4 / std::tanh(t / 2), 0)) * csch;
      worst = std::max(worst, std::abs(heat_trace(GroupElement::translation({w}), A, t, aux,
                                                  N).value -
                                       tr) /
                                  std::abs(tr));
    }
    {
      int N = heat_cutoff(t, 2, 0, 1e-13);
      Complex csch2 = csch * csch;
      auto r = heat_trace(GroupElement::identity(2), A, t, aux, N);
      worst = std::max(worst, std::abs(r.value - csch2) / std::abs(csch2));
    }
  }
  report(2, worst < 1e-8, "heat-trace closed forms: worst relative error " + fmt(worst));
}

void criterion3() {
  AuxiliarySpec aux;
  double worst_symbolic = 0, worst_spectral = 0;
  std::string ratios;
  for (double phi : {pi / 3, 2 * pi / 3}) {
    auto e = plane_rotation(phi);
    Complex expected = 2.0 / (1.0 - std::exp(Complex(0, -phi)));
    auto A = inverse_oscillator_principal(1);
    NumericComponent c(4, -2);
    c.add_term(Complex(2, 0), MultiIndex(4), Rational(1));
    NumericSymbol A2(2, -2);
    A2.set_component(0, c);
    auto fpd = fixed_point_data(e.g);
    Complex assembled = residue_assembled(e, A2, fpd);
    worst_symbolic = std::max(worst_symbolic, std::abs(assembled - expected));

    Complex printed = residue_printed(e, c);
    Complex ratio = assembled / printed;
    char buf[96];
    std::snprintf(buf, sizeof buf, " [phi=%.4f assembled/printed = %.6f%+.6fi]", phi,
                  ratio.real(), ratio.imag());
    ratios += buf;

    auto lc = log_coefficient(e, recipe_H0_power(1, 2), -2, aux,
                              geometric_grid(0.0125, 4, 16), 7);
    worst_spectral = std::max(
        worst_spectral, std::abs(static_cast<double>(aux.m_order) * lc.value - expected));
  }
  bool pass = worst_symbolic < 1e-10 && worst_spectral < 1e-3;
  report(3, pass,
         "rotation residue: symbolic defect " + fmt(worst_symbolic) + ", spectral defect " +
             fmt(worst_spectral) + ratios);
}

void criterion4() {
  AuxiliarySpec aux;
  double phi = pi / 3;
  auto e = plane_rotation(phi);
  Complex z = std::exp(Complex(0, -phi));
  Complex oracle = 2.0 * (1.0 + z) / (2.0 * (1.0 - z) * (1.0 - z));

  // spectral engine; both traces here live on the integer lattice
  // {ln t, 1, t, t^2, ...}, so the samples are fitted on that lattice
  auto integer_lattice_c0p = [&aux](const GroupElement& g, const OperatorRecipe& A,
                                    const std::vector<double>& grid, int nTerms) {
    double growth_p = 0;
    for (const auto& f : A(8)) growth_p += f.growth_p;
    std::vector<std::pair<double, Complex>> samples;
    for (double t : grid) {
      int N = heat_cutoff(t, static_cast<int>(g.n()), growth_p, 1e-13);
      samples.push_back({t, heat_trace(g, A, t, aux, N).value});
    }
    auto fit = fit_expansion(samples, 0, 0, 1, nTerms, Rational(0), 1e12);
    return -fit.coefficient(Rational(0), true);
  };
  PolySymbol x1sq = {{Complex(1, 0), MultiIndex({2, 0, 0, 0})}};
  auto recipe = recipe_product(recipe_weyl_poly(x1sq, 2), recipe_H0_power(1, 2));
  Complex c0p = integer_lattice_c0p(e, recipe, geometric_grid(0.0125, 4, 16), 7);
  double spectral_defect = std::abs(static_cast<double>(aux.m_order) * c0p - oracle);

  // symbolic engine
  auto inv = symbol_invert(oscillator_symbol(2), 8, Convention::Weyl);
  ExactComponent x2(4, 2);
  x2.add_term(GaussianRational(1), MultiIndex({2, 0, 0, 0}));
  auto A = to_numeric(symbol_compose(ExactSymbol::from_principal(x2), inv, 8,
                                     Convention::Weyl));
  auto fpd = fixed_point_data(e.g);
  Complex converged = residue_case_iii(e, A, fpd, 16);
  double symbolic_defect = std::abs(residue_case_iii(e, A, fpd, 4) - converged);
  double oracle_defect = std::abs(converged - oracle);

  // parity control: trace is log-free and matches 1/(8 cosh^2(t/2))
  auto par = GroupElement::rotation(MonomialUnitary::diagonal({Complex(-1, 0), Complex(1, 0)}));
  double parity_trace = 0;
  for (double t : default_grid()) {
    int N = heat_cutoff(t, 2, 1, 1e-13);
    Complex exact(1.0 / (8.0 * std::cosh(t / 2) * std::cosh(t / 2)), 0);
    auto r = heat_trace(par, recipe_weyl_poly(x1sq, 2), t, aux, N);
    parity_trace = std::max(parity_trace, std::abs(r.value - exact) / std::abs(exact));
  }
  Complex par_c0p = integer_lattice_c0p(par, recipe_weyl_poly(x1sq, 2),
                                        geometric_grid(0.0125, 4, 16), 7);
  double parity_spectral = std::abs(par_c0p);
  double parity_symbolic =
      std::abs(residue_case_iii(par, to_numeric(ExactSymbol::from_principal(x2)),
                                fixed_point_data(par.g)));

  bool pass = spectral_defect < 1e-3 && symbolic_defect < 1e-6 && oracle_defect < 1e-6 &&
              parity_trace < 1e-8 && parity_spectral < 1e-6 && parity_symbolic < 1e-10;
  report(4, pass,
         "case iii: spectral defect " + fmt(spectral_defect) + ", converged-value drift " +
             fmt(symbolic_defect) + ", oracle defect " + fmt(oracle_defect) +
             ", parity (trace " + fmt(parity_trace) + ", log " + fmt(parity_spectral) +
             ", symbolic " + fmt(parity_symbolic) + ")");
}

void criterion5() {
  // synthetic branch: data generated from the truncated model itself
  std::vector<std::pair<double, Complex>> model;
  for (int i = 0; i <= 64; ++i) {
    double t = 0.002 * std::pow(4.0 / 0.002, i / 64.0);
    model.push_back({t, Complex(1.0 / t - t / 24.0 + 7.0 * t * t * t / 5760.0, 0)});
  }
  auto fs = fit_expansion(model, 1, 0, 2, 9);
  double coef_defect =
      std::max({std::abs(fs.coefficient(Rational(-1), false) - 1.0),
                std::abs(fs.coefficient(Rational(1), false) + 1.0 / 24.0),
                std::abs(fs.coefficient(Rational(3), false) - 7.0 / 5760.0)});
  double log_defect = 0;
  for (std::size_t k = 0; k < fs.basis.size(); ++k)
    if (fs.basis[k].has_log) log_defect = std::max(log_defect, std::abs(fs.coef[k]));

  // exact-csch branch at the measured information limit of the window
  std::vector<std::pair<double, Complex>> samples;
  for (int i = 0; i <= 16; ++i) {
    double t = 0.4 * std::pow(2.0, -i);
    samples.push_back({t, Complex(1.0 / (2.0 * std::sinh(t / 2)), 0)});
  }
  auto fe = fit_expansion(samples, 1, 0, 2, 9);
  bool exact_ok = std::abs(fe.coefficient(Rational(-1), false) - 1.0) < 1e-8 &&
                  std::abs(fe.coefficient(Rational(1), false) + 1.0 / 24.0) < 5e-5 &&
                  std::abs(fe.coefficient(Rational(3), false) - 7.0 / 5760.0) < 1e-3;
  for (std::size_t k = 0; k < fe.basis.size(); ++k)
    if (fe.basis[k].has_log) exact_ok = exact_ok && std::abs(fe.coef[k]) < 1e-3;

  bool pass = coef_defect < 1e-6 && log_defect < 1e-8 && exact_ok;
  report(5, pass,
         "expansion fitting: synthetic coefficients " + fmt(coef_defect) +
             ", synthetic spurious logs " + fmt(log_defect) +
             ", exact-data branch within its information limit " +
             std::string(exact_ok ? "yes" : "no"));
}

void criterion6() {
  auto start = std::chrono::steady_clock::now();
  std::size_t residual_terms = 0;
  for (int n : {1, 2}) {
    auto h = oscillator_symbol(n);
    residual_terms += compose_check(resolvent_parametrix(h, 6), h, 6).size();
  }
  {
    auto h = oscillator_symbol(1);
    ExactComponent x1(2, 1);
    x1.add_term(GaussianRational(1), MultiIndex({1, 0}));
    h.set_component(1, x1);
    residual_terms += compose_check(resolvent_parametrix(h, 6), h, 6).size();
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool pass = residual_terms == 0 && secs < 10;
  report(6, pass,
         "parametrix identity through order -6: residual terms " +
             std::to_string(residual_terms) + ", " + fmt(secs) + " s");
}

void criterion7() {
  const int N = 60, pad = 20;
  FockBasis basis(1, N + pad);
  long inner = basis.level_end(N / 2);
  double worst = 0;

  // displacement composition law, |w| <= 2
  for (auto [v, w] : {std::pair{Complex(1, 0), Complex(0, 1)},
                      {Complex(1.4, -0.7), Complex(-0.5, 1.2)},
                      {Complex(2, 0), Complex(0, 2)}}) {
    auto Tv = to_dense(displacement({v}, N + pad), basis);
    auto Tw = to_dense(displacement({w}, N + pad), basis);
    auto Tvw = to_dense(displacement({v + w}, N + pad), basis);
    Complex phase = std::polar(1.0, -std::imag(v * std::conj(w)) / 2.0);
    Eigen::MatrixXcd diff = Tv * Tw - phase * Tvw;
    worst = std::max(worst, diff.topLeftCorner(inner, inner).operatorNorm());
  }

  // metaplectic conjugation of translations
  {
    FockBasis b(1, N);
    long in2 = b.level_end(N / 2);
    double phi = pi / 3;
    Complex w(0.7, -0.4);
    auto R = to_dense(metaplectic_diag({phi}, b), b);
    auto Rinv = to_dense(metaplectic_diag({-phi}, b), b);
    auto Tw = to_dense(displacement({w}, N), b);
    auto Tgw = to_dense(displacement({std::polar(1.0, phi) * w}, N), b);
    Eigen::MatrixXcd diff = R * Tw * Rinv - Tgw;
    worst = std::max(worst, diff.topLeftCorner(in2, in2).norm());
  }

  // Egorov defects for monomial g
  PolySymbol P = {{Complex(1, 0), MultiIndex({2, 0})}, {Complex(0, 0.5), MultiIndex({1, 1})}};
  worst = std::max(worst, egorov_defect(MonomialUnitary::diagonal({std::polar(1.0, 0.7)}),
                                        P, N));

  // R_g-heat commutation is exact
  double commutation = 0;
  {
    FockBasis b(2, 8);
    auto F = to_dense(heat_factor(0.3, 2, 0.5, 8), b);
    auto Rp = to_dense(metaplectic_perm({1, 0}, {Complex(1, 0), Complex(1, 0)}, 2, 8), b);
    commutation = (Rp * F - F * Rp).norm();
  }
  bool pass = worst < 1e-10 && commutation == 0.0;
  report(7, pass,
         "operator identities: worst interior-block defect " + fmt(worst) +
             ", R_g-heat commutator " + fmt(commutation));
}

void criterion8() {
  AuxiliarySpec aux;
  double worst = 0;

  // family 1: cyclic metaplectic group generated by diag(i, 1)
  auto g1 = GroupElement::rotation(
      MonomialUnitary::diagonal({Complex(0, 1), Complex(1, 0)}));
  auto g2 = GroupElement::rotation(
      MonomialUnitary::diagonal({Complex(-1, 0), Complex(1, 0)}));
  auto g3 = GroupElement::rotation(
      MonomialUnitary::diagonal({Complex(0, -1), Complex(1, 0)}));
  PolySymbol h2_mode1 = {{Complex(0.5, 0), MultiIndex({2, 0, 0, 0})},
                         {Complex(0.5, 0), MultiIndex({0, 0, 2, 0})}};
  worst = std::max(worst, trace_defect({g1, recipe_weyl_poly(h2_mode1, 2), 2},
                                       {g2, recipe_H0_power(1, 2), -2}, aux,
                                       default_grid(), 5));
  worst = std::max(worst, trace_defect({g1, recipe_H0_power(1, 2), -2},
                                       {g3, recipe_H0_power(1, 2), -2}, aux,
                                       default_grid(), 5));

  // family 2: translation lattice generated by w0 = 3
  worst = std::max(worst, trace_defect({GroupElement::translation({Complex(3, 0)}),
                                        recipe_H0_power(1, 1), -2},
                                       {GroupElement::translation({Complex(-3, 0)}),
                                        recipe_H0_power(1, 1), -2},
                                       aux, geometric_grid(0.1, 4, 12), 5));
  worst = std::max(worst, trace_defect({GroupElement::translation({Complex(3, 0)}),
                                        recipe_H0_power(1, 1), -2},
                                       {GroupElement::translation({Complex(-6, 0)}),
                                        recipe_H0_power(1, 1), -2},
                                       aux, geometric_grid(0.05, 6, 12), 3));
  report(8, worst < 1e-6, "commutator residue defects: worst " + fmt(worst));
}

void criterion9() {
  AuxiliarySpec aux;
  auto e = GroupElement::translation({Complex(3, 0)});
  bool vanish = vanishing_check(e, recipe_identity(), 0, aux);
  auto lc = log_coefficient(e, recipe_identity(), 0, aux, geometric_grid(0.02, 6, 12), 5);
  double vanish_defect = std::abs(lc.value);

  auto rep = coefficient_bridge_check(GroupElement::identity(1), recipe_H0_power(1, 1), -2,
                                      aux);
  double bridge = std::max({rep.d_heat_resolvent, rep.d_heat_zeta, rep.d_resolvent_zeta});

  Complex base;
  double shift_defect = 0;
  bool first = true;
  for (double c : {0.0, 0.5, 1.0}) {
    auto l = log_coefficient(GroupElement::identity(1), recipe_H0_power(1, 1), -2,
                             AuxiliarySpec{c, 2}, geometric_grid(0.0125, 4, 16));
    if (first) {
      base = l.value;
      first = false;
    } else {
      shift_defect = std::max(shift_defect, std::abs(l.value - base));
    }
  }
  bool pass = vanish && vanish_defect < 1e-6 && bridge < 1e-3 && shift_defect < 1e-4;
  report(9, pass,
         "vanishing/bridge: fixed-point-free log " + fmt(vanish_defect) +
             ", c0' route spread " + fmt(bridge) + ", aux-shift drift " + fmt(shift_defect));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures ? 1 : 0;
}
