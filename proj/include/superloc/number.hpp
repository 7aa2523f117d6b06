#pragma once

#include <complex>
#include <string>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

namespace superloc {

using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

/// Coefficient of the expression ring.
///
/// Holds either an exact rational or a double-precision complex value.
/// Arithmetic between two exact values stays exact; anything touching a
/// floating value is promoted to floating.
class Number {
 public:
  Number() : value_(Rational(0)) {}
  Number(int v) : value_(Rational(v)) {}  // NOLINT(google-explicit-constructor)
  Number(long long v) : value_(Rational(v)) {}  // NOLINT
  Number(Rational v) : value_(std::move(v)) {}  // NOLINT
  Number(Complex v) : value_(v) {}  // NOLINT
  Number(double v) : value_(Complex(v, 0.0)) {}  // NOLINT

  /// num/den; the sign is moved to the numerator first (Boost 1.74 rejects negative denominators).
  static Number rational(long long num, long long den) {
    return den < 0 ? Number(Rational(-num, -den)) : Number(Rational(num, den));
  }
  static Number imaginary_unit() { return Number(Complex(0.0, 1.0)); }

  bool is_exact() const { return std::holds_alternative<Rational>(value_); }
  const Rational& exact() const { return std::get<Rational>(value_); }
  Complex to_complex() const;
  double real() const { return to_complex().real(); }

  bool is_zero() const;
  bool is_one() const;
  /// Sign of the real part; exact for rationals.
  int sign() const;
  bool is_real() const;

  Number& operator+=(const Number& o);
  Number& operator-=(const Number& o);
  Number& operator*=(const Number& o);
  Number& operator/=(const Number& o);

  friend Number operator+(Number a, const Number& b) { return a += b; }
  friend Number operator-(Number a, const Number& b) { return a -= b; }
  friend Number operator*(Number a, const Number& b) { return a *= b; }
  friend Number operator/(Number a, const Number& b) { return a /= b; }
  Number operator-() const;

  /// Structural equality: exact and floating values never compare equal.
  friend bool operator==(const Number& a, const Number& b);
  /// Total order used for canonical term ordering.
  friend int compare(const Number& a, const Number& b);

  std::string to_string() const;

 private:
  std::variant<Rational, Complex> value_;
};

Number pow(const Number& base, int exponent);
/// Principal square root; exact when both numerator and denominator are perfect squares.
Number sqrt(const Number& x);
Number exp(const Number& x);
double abs(const Number& x);

}  // namespace superloc
