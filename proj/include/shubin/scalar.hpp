#ifndef SHUBIN_SCALAR_HPP
#define SHUBIN_SCALAR_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace shubin {

using Rational = boost::multiprecision::cpp_rational;

/// Exact complex scalar with rational real and imaginary parts.
/// This is the coefficient field for all symbolic identities (parametrix
/// recursion, composition associativity); the same templates run on
/// std::complex<double> for the numeric residue pipeline.
struct GaussianRational {
  Rational re;
  Rational im;

  GaussianRational() = default;
  GaussianRational(long r) : re(r), im(0) {}
  GaussianRational(Rational r) : re(std::move(r)), im(0) {}
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
    Rational d = b.re * b.re + b.im * b.im;
    if (d == 0) throw std::domain_error("GaussianRational: division by zero");
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
  GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
  GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }

  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }

  bool is_zero() const { return re == 0 && im == 0; }

  std::string str() const {
    std::ostringstream os;
    os << re;
    if (im != 0) os << (im > 0 ? "+" : "") << im << "i";
    return os.str();
  }
};

inline std::complex<double> to_complex(const GaussianRational& x) {
  return {static_cast<double>(x.re), static_cast<double>(x.im)};
}
inline std::complex<double> to_complex(const std::complex<double>& x) { return x; }

/// Uniform construction hooks so the symbol algebra can be written once
/// for both scalar backings.
template <class Scalar>
struct ScalarOps;

template <>
struct ScalarOps<GaussianRational> {
  static GaussianRational zero() { return GaussianRational(0l); }
  static GaussianRational one() { return GaussianRational(1l); }
  static GaussianRational from_rational(const Rational& r) { return GaussianRational(r); }
  static GaussianRational i_power(long k) {
    switch (((k % 4) + 4) % 4) {
      case 0: return {Rational(1), Rational(0)};
      case 1: return {Rational(0), Rational(1)};
      case 2: return {Rational(-1), Rational(0)};
      default: return {Rational(0), Rational(-1)};
    }
  }
  static bool is_zero(const GaussianRational& x) { return x.is_zero(); }
};

template <>
struct ScalarOps<std::complex<double>> {
  static std::complex<double> zero() { return {0.0, 0.0}; }
  static std::complex<double> one() { return {1.0, 0.0}; }
  static std::complex<double> from_rational(const Rational& r) {
    return {static_cast<double>(r), 0.0};
  }
  static std::complex<double> i_power(long k) {
    switch (((k % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  static bool is_zero(const std::complex<double>& x) {
    return x.real() == 0.0 && x.imag() == 0.0;
  }
};

inline Rational factorial_rational(long n) {
  Rational r = 1;
  for (long k = 2; k <= n; ++k) r *= k;
  return r;
}

/// Parses a decimal or fraction literal ("0.25", "-3", "1/3") exactly.
inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    boost::multiprecision::cpp_int num(s.substr(0, slash));
    boost::multiprecision::cpp_int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
    return Rational(num, den);
  }
  auto dot = s.find('.');
  auto epos = s.find_first_of("eE");
  long exp10 = 0;
  std::string mant = s;
  if (epos != std::string::npos) {
    exp10 = std::stol(s.substr(epos + 1));
    mant = s.substr(0, epos);
    dot = mant.find('.');
  }
  if (dot == std::string::npos) {
    Rational r{boost::multiprecision::cpp_int(mant)};
    for (long k = 0; k < exp10; ++k) r *= 10;
    for (long k = 0; k > exp10; --k) r /= 10;
    return r;
  }
  std::string digits = mant.substr(0, dot) + mant.substr(dot + 1);
  long frac = static_cast<long>(mant.size() - dot - 1);
  Rational r{boost::multiprecision::cpp_int(digits)};
  long e = exp10 - frac;
  for (long k = 0; k < e; ++k) r *= 10;
  for (long k = 0; k > e; --k) r /= 10;
  return r;
}

}  // namespace shubin

#endif
