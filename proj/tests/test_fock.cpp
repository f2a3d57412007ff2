#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "shubin/fock.hpp"

using namespace shubin;
using std::numbers::pi;

namespace {

PolySymbol mono(int n, std::initializer_list<int> expo, Complex coef = Complex(1, 0)) {
  return {{coef, MultiIndex(std::vector<int>(expo))}};
}

// Hermite functions h_0..h_{kmax} at x by recurrence.
std::vector<double> hermite_functions(double x, int kmax) {
  std::vector<double> h(kmax + 1);
  h[0] = std::pow(pi, -0.25) * std::exp(-x * x / 2);
  if (kmax >= 1) h[1] = std::sqrt(2.0) * x * h[0];
  for (int k = 1; k < kmax; ++k)
    h[k + 1] = std::sqrt(2.0 / (k + 1)) * x * h[k] - std::sqrt(k / (k + 1.0)) * h[k - 1];
  return h;
}

// Simpson quadrature of f over [-12, 12].
template <class F>
Complex quad(F&& f) {
  const double a = -12, b = 12;
  const int steps = 12000;  // even
  const double h = (b - a) / steps;
  Complex acc = f(a) + f(b);
  for (int i = 1; i < steps; ++i) acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

double csch_half(double t) { return 1.0 / (2.0 * std::sinh(t / 2.0)); }

double op_norm(const Eigen::MatrixXcd& M) {
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues()(0);
}

}  // namespace

TEST_CASE("op_weyl_poly: oscillator, x^2, and the constant symbol") {
  const int N = 12;
  FockBasis basis(1, N);

  PolySymbol h2 = {{Complex(0.5, 0), MultiIndex({2, 0})}, {Complex(0.5, 0), MultiIndex({0, 2})}};
  auto H = to_dense(op_weyl_poly(h2, 1, N), basis);
  for (int k = 0; k <= N; ++k) {
    CHECK(std::abs(H(k, k) - Complex(k + 0.5, 0)) < 1e-13);
    for (int j = 0; j <= N; ++j)
      if (j != k) CHECK(std::abs(H(k, j)) < 1e-13);
  }

  auto X2 = to_dense(op_weyl_poly(mono(1, {2, 0}), 1, N), basis);
  for (int k = 0; k <= N; ++k) {
    CHECK(std::abs(X2(k, k) - Complex(k + 0.5, 0)) < 1e-13);
    if (k + 2 <= N) {
      double expect = std::sqrt((k + 1) * (k + 2)) / 2.0;
      CHECK(std::abs(X2(k, k + 2) - Complex(expect, 0)) < 1e-13);
      CHECK(std::abs(X2(k + 2, k) - Complex(expect, 0)) < 1e-13);
    }
    if (k + 1 <= N) CHECK(std::abs(X2(k, k + 1)) < 1e-13);
  }

  auto I = to_dense(op_weyl_poly(mono(1, {0, 0}), 1, N), basis);
  CHECK((I - Eigen::MatrixXcd::Identity(N + 1, N + 1)).norm() < 1e-13);
}

TEST_CASE("weyl ordering: normal-ordering rewrite matches full symmetrization") {
  for (auto [m, k] : {std::pair{1, 1}, {2, 1}, {2, 2}, {3, 2}, {0, 3}, {3, 0}, {3, 3}}) {
    auto a = fock_detail::single_mode_weyl(m, k, 12);
    auto b = fock_detail::single_mode_symmetrized(m, k, 12);
    INFO("x^", m, " p^", k);
    CHECK((a - b).norm() < 1e-11);
  }
}

TEST_CASE("func_of_H0: heat entries, Hurwitz sum, identity") {
  auto heat = heat_factor(0.7, 1, 0.0, 10);
  const auto& d = std::get<LevelDiagK>(heat.kind).d;
  for (int k = 0; k <= 10; ++k)
    CHECK(std::abs(d(k) - std::exp(Complex(-0.7 * (k + 0.5), 0))) < 1e-15);

  // Tr H0^{-2} -> pi^2/2 within the certified tail
  auto z2 = power_factor(Complex(2, 0), 1, 0.0, 4000);
  auto r = trace_product({z2}, 0);
  CHECK(std::abs(r.value - Complex(pi * pi / 2, 0)) < r.certified_tail);
  CHECK(r.certified_tail < 1e-3);

  auto one = func_of_H0([](double) { return Complex(1, 0); }, 1, 0.0, 5);
  FockBasis basis(1, 5);
  CHECK((to_dense(one, basis) - Eigen::MatrixXcd::Identity(6, 6)).norm() == 0.0);
}

TEST_CASE("displacement: identity at w=0 and the vacuum overlap") {
  FockBasis basis(1, 8);
  auto T0 = to_dense(displacement({Complex(0, 0)}, 8), basis);
  CHECK((T0 - Eigen::MatrixXcd::Identity(9, 9)).norm() < 1e-14);

  for (Complex w : {Complex(1.2, 0.4), Complex(0, 1), Complex(-0.3, 0.9)}) {
    auto T = to_dense(displacement({w}, 8), basis);
    CHECK(std::abs(T(0, 0) - std::exp(Complex(-std::norm(w) / 4.0, 0))) < 1e-13);
  }
}

TEST_CASE("displacement calibration against quadrature of the integral definition") {
  // T_w u(x) = e^{ikx - iak/2} u(x - a), w = a - ik
  const int kmax = 8;
  for (Complex w : {Complex(0.8, 0), Complex(0, -1.1), Complex(0.6, 0.9)}) {
    double a = w.real(), k = -w.imag();
    FockBasis basis(1, kmax);
    auto T = to_dense(displacement({w}, kmax), basis);
    for (int m = 0; m <= kmax; ++m) {
      Complex oracle = quad([&](double x) {
        auto h = hermite_functions(x, kmax);
        auto hs = hermite_functions(x - a, 0);
        return h[m] * std::polar(1.0, k * x - a * k / 2.0) * hs[0];
      });
      INFO("w=", w.real(), "+", w.imag(), "i  m=", m);
      CHECK(std::abs(T(m, 0) - oracle) < 1e-10);
    }
  }
}

TEST_CASE("displacement composition law on the interior block at N=60") {
  // products are evaluated at a padded cutoff so that harness truncation of
  // the intermediate-state sum does not masquerade as identity defect
  const int N = 60, pad = 20;
  FockBasis basis(1, N + pad);
  long inner = basis.level_end(N / 2);
  for (auto [v, w] : {std::pair{Complex(1, 0), Complex(0, 1)},
                      {Complex(1.4, -0.7), Complex(-0.5, 1.2)},
                      {Complex(2, 0), Complex(0, 2)}}) {
    auto Tv = to_dense(displacement({v}, N + pad), basis);
    auto Tw = to_dense(displacement({w}, N + pad), basis);
    auto Tvw = to_dense(displacement({v + w}, N + pad), basis);
    Complex phase = std::polar(1.0, -std::imag(v * std::conj(w)) / 2.0);
    Eigen::MatrixXcd diff = Tv * Tw - phase * Tvw;
    CHECK(op_norm(diff.topLeftCorner(inner, inner)) < 1e-10);
  }
}

TEST_CASE("displacement and metaplectic unitarity on the interior block") {
  const int N = 60, pad = 20;
  FockBasis basis(1, N + pad);
  long inner = basis.level_end(N / 2);
  for (Complex w : {Complex(2, 0), Complex(1.1, -1.3)}) {
    auto T = to_dense(displacement({w}, N + pad), basis);
    Eigen::MatrixXcd defect =
        T.adjoint() * T - Eigen::MatrixXcd::Identity(N + pad + 1, N + pad + 1);
    CHECK(op_norm(defect.topLeftCorner(inner, inner)) < 1e-10);
  }
  auto R = to_dense(metaplectic_diag({pi / 3}, basis), basis);
  CHECK((R.adjoint() * R - Eigen::MatrixXcd::Identity(N + 1, N + 1)).norm() < 1e-12);
}

TEST_CASE("metaplectic conjugation maps T_w to T_{gw} on the interior block") {
  const int N = 60;
  FockBasis basis(1, N);
  long inner = basis.level_end(N / 2);
  double phi = pi / 3;
  Complex w(0.7, -0.4);
  auto R = to_dense(metaplectic_diag({phi}, basis), basis);
  auto Rinv = to_dense(metaplectic_diag({-phi}, basis), basis);
  auto Tw = to_dense(displacement({w}, N), basis);
  auto Tgw = to_dense(displacement({std::polar(1.0, phi) * w}, N), basis);
  Eigen::MatrixXcd diff = R * Tw * Rinv - Tgw;
  CHECK(diff.topLeftCorner(inner, inner).norm() < 1e-10);
}

TEST_CASE("metaplectic_diag: Fourier case and Mehler kernel oracle") {
  FockBasis basis(1, 10);
  auto F = metaplectic_diag({pi / 2}, basis);
  const auto& d = std::get<StateDiagK>(F.kind).d;
  for (int k = 0; k <= 10; ++k)
    CHECK(std::abs(d(k) - std::pow(Complex(0, -1), k)) < 1e-14);

  // Mehler kernel at phi = pi/3 applied to h_k reproduces e^{-ik phi} h_k
  double phi = pi / 3;
  Complex rho = std::polar(1.0, -phi);
  auto kernel = [&](double x, double y) {
    Complex r2 = rho * rho;
    return std::pow(pi * (1.0 - r2), -0.5) *
           std::exp(-(x * x + y * y) * (1.0 + r2) / (2.0 * (1.0 - r2)) +
                    2.0 * x * y * rho / (1.0 - r2));
  };
  for (int k = 0; k <= 3; ++k) {
    for (double x : {0.0, 0.8, -1.3}) {
      Complex applied = quad([&](double y) {
        auto h = hermite_functions(y, k);
        return kernel(x, y) * h[k];
      });
      auto hx = hermite_functions(x, k);
      Complex expect = std::polar(1.0, -k * phi) * hx[k];
      CHECK(std::abs(applied - expect) < 1e-8);
    }
  }
}

TEST_CASE("metaplectic_perm: parity diagonal and mode swap") {
  FockBasis b1(1, 6);
  auto Par = to_dense(metaplectic_perm({0}, {Complex(-1, 0)}, 1, 6), b1);
  for (int k = 0; k <= 6; ++k)
    CHECK(std::abs(Par(k, k) - Complex(k % 2 ? -1 : 1, 0)) < 1e-15);

  FockBasis b2(2, 4);
  auto S = to_dense(metaplectic_perm({1, 0}, {Complex(1, 0), Complex(1, 0)}, 2, 4), b2);
  for (long i = 0; i < b2.dim(); ++i) {
    std::vector<int> sw = {b2.state(i)[1], b2.state(i)[0]};
    CHECK(std::abs(S(b2.index_of(sw), i) - Complex(1, 0)) < 1e-15);
  }
  CHECK((S * S - Eigen::MatrixXcd::Identity(b2.dim(), b2.dim())).norm() == 0.0);
}

TEST_CASE("R_g commutes exactly with functions of H0") {
  FockBasis basis(2, 8);
  auto F = to_dense(heat_factor(0.3, 2, 0.5, 8), basis);
  auto Rd = to_dense(metaplectic_diag({0.4, -1.1}, basis), basis);
  auto Rp = to_dense(metaplectic_perm({1, 0}, {Complex(1, 0), Complex(1, 0)}, 2, 8), basis);
  CHECK((Rd * F - F * Rd).norm() == 0.0);
  CHECK((Rp * F - F * Rp).norm() == 0.0);
}

TEST_CASE("trace_product: three closed forms") {
  const int N = 200;
  const double t = 0.5;
  FockBasis basis(1, N);

  auto heat = heat_factor(t, 1, 0.0, N);
  auto r1 = trace_product({heat}, 0);
  CHECK(std::abs(r1.value - Complex(csch_half(t), 0)) <= r1.certified_tail + 1e-13);

  double phi = pi / 3;
  auto Rg = metaplectic_diag({phi}, basis);
  auto r2 = trace_product({Rg, heat}, 1);
  Complex expect2 = std::exp(Complex(-t / 2, 0)) / (1.0 - std::exp(Complex(-t, -phi)));
  CHECK(std::abs(r2.value - expect2) <= r2.certified_tail + 1e-13);

  Complex w(1.1, -0.6);
  auto Tw = displacement({w}, N);
  auto r3 = trace_product({Tw, heat}, 1);
  double c = 1.0 / std::tanh(t / 2);
  Complex expect3 = std::exp(Complex(-std::norm(w) / 4.0 * c, 0)) * csch_half(t);
  CHECK(std::abs(r3.value - expect3) <= r3.certified_tail + 1e-12);
  CHECK(r3.certified_tail < 1e-8);
}

TEST_CASE("trace_product: refusal without a certified damped factor") {
  FockBasis basis(1, 10);
  auto Rg = metaplectic_diag({0.5}, basis);
  CHECK_THROWS_AS(trace_product({Rg}, 0), std::invalid_argument);
}

TEST_CASE("trace_product: cyclic consistency within certified tails") {
  const int N = 120;
  FockBasis basis(1, N);
  auto heat = heat_factor(0.4, 1, 0.0, N);
  auto Rg = metaplectic_diag({1.1}, basis);
  auto Tw = displacement({Complex(0.9, 0.3)}, N);
  auto A = power_factor(Complex(1, 0), 1, 0.0, N);

  auto a = trace_product({Rg, Tw, A, heat}, 3);
  auto b = trace_product({heat, Rg, Tw, A}, 0);
  auto c = trace_product({Tw, A, heat, Rg}, 2);
  CHECK(std::abs(a.value - b.value) <= a.certified_tail + b.certified_tail + 1e-12);
  CHECK(std::abs(a.value - c.value) <= a.certified_tail + c.certified_tail + 1e-12);
}

TEST_CASE("egorov_defect vanishes for monomial g") {
  CHECK(egorov_defect(MonomialUnitary::identity(1), mono(1, {1, 0}), 16) < 1e-12);

  auto gi = MonomialUnitary::diagonal({Complex(0, 1)});
  CHECK(egorov_defect(gi, mono(1, {1, 0}), 16) < 1e-10);
  CHECK(egorov_defect(gi, mono(1, {2, 1}), 16) < 1e-10);

  auto swap2 = MonomialUnitary::from_angles({1, 0}, {0.0, 0.0});
  CHECK(egorov_defect(swap2, mono(2, {1, 0, 0, 1}), 10) < 1e-10);

  // general monomial: swap combined with a phase
  auto gm = MonomialUnitary::from_angles({1, 0}, {pi / 3, -pi / 5});
  CHECK(egorov_defect(gm, mono(2, {1, 0, 0, 1}), 10) < 1e-10);
  CHECK(egorov_defect(gm, mono(2, {0, 2, 0, 0}), 10) < 1e-10);
}
