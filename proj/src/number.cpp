#include "superloc/number.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace superloc {

namespace {

double to_double(const Rational& r) { return static_cast<double>(r); }

bool exact_sqrt(const boost::multiprecision::cpp_int& v, boost::multiprecision::cpp_int* root) {
  if (v < 0) return false;
  boost::multiprecision::cpp_int r = boost::multiprecision::sqrt(v);
  if (r * r != v) return false;
  *root = r;
  return true;
}

}  // namespace

Complex Number::to_complex() const {
  if (is_exact()) return Complex(to_double(exact()), 0.0);
  return std::get<Complex>(value_);
}

bool Number::is_zero() const {
  if (is_exact()) return exact() == 0;
  const Complex& c = std::get<Complex>(value_);
  return c.real() == 0.0 && c.imag() == 0.0;
}

bool Number::is_one() const {
  if (is_exact()) return exact() == 1;
  const Complex& c = std::get<Complex>(value_);
  return c.real() == 1.0 && c.imag() == 0.0;
}

int Number::sign() const {
  if (is_exact()) return exact() > 0 ? 1 : (exact() < 0 ? -1 : 0);
  double r = std::get<Complex>(value_).real();
  return r > 0 ? 1 : (r < 0 ? -1 : 0);
}

bool Number::is_real() const {
  return is_exact() || std::get<Complex>(value_).imag() == 0.0;
}

Number& Number::operator+=(const Number& o) {
  if (is_exact() && o.is_exact()) {
    value_ = exact() + o.exact();
  } else {
    value_ = to_complex() + o.to_complex();
  }
  return *this;
}

Number& Number::operator-=(const Number& o) {
  if (is_exact() && o.is_exact()) {
    value_ = exact() - o.exact();
  } else {
    value_ = to_complex() - o.to_complex();
  }
  return *this;
}

Number& Number::operator*=(const Number& o) {
  if (is_exact() && o.is_exact()) {
    value_ = exact() * o.exact();
  } else {
    value_ = to_complex() * o.to_complex();
  }
  return *this;
}

Number& Number::operator/=(const Number& o) {
  if (o.is_zero()) throw std::domain_error("division of a coefficient by zero");
  if (is_exact() && o.is_exact()) {
    value_ = exact() / o.exact();
  } else {
    value_ = to_complex() / o.to_complex();
  }
  return *this;
}

Number Number::operator-() const {
  if (is_exact()) return Number(Rational(-exact()));
  return Number(-std::get<Complex>(value_));
}

bool operator==(const Number& a, const Number& b) {
  if (a.is_exact() != b.is_exact()) return false;
  if (a.is_exact()) return a.exact() == b.exact();
  return std::get<Complex>(a.value_) == std::get<Complex>(b.value_);
}

int compare(const Number& a, const Number& b) {
  if (a.is_exact() != b.is_exact()) return a.is_exact() ? -1 : 1;
  if (a.is_exact()) {
    if (a.exact() < b.exact()) return -1;
    return a.exact() > b.exact() ? 1 : 0;
  }
  const Complex& x = std::get<Complex>(a.value_);
  const Complex& y = std::get<Complex>(b.value_);
  if (x.real() != y.real()) return x.real() < y.real() ? -1 : 1;
  if (x.imag() != y.imag()) return x.imag() < y.imag() ? -1 : 1;
  return 0;
}

std::string Number::to_string() const {
  if (is_exact()) {
    const Rational& r = exact();
    if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
  }
  const Complex& c = std::get<Complex>(value_);
  char buf[96];
  if (c.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.17g", c.real());
    std::string s(buf);
    // Keep floating literals distinguishable from exact integers on re-parse.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", c.real(), c.imag());
  return buf;
}

Number pow(const Number& base, int exponent) {
  if (exponent < 0) return pow(Number(1) / base, -exponent);
  Number result(1);
  Number b = base;
  while (exponent > 0) {
    if (exponent & 1) result *= b;
    b *= b;
    exponent >>= 1;
  }
  return result;
}

Number sqrt(const Number& x) {
  if (x.is_exact() && x.exact() >= 0) {
    boost::multiprecision::cpp_int n, d;
    if (exact_sqrt(boost::multiprecision::numerator(x.exact()), &n) &&
        exact_sqrt(boost::multiprecision::denominator(x.exact()), &d)) {
      return Number(Rational(n, d));
    }
  }
  return Number(std::sqrt(x.to_complex()));
}

Number exp(const Number& x) {
  if (x.is_zero()) return Number(1);
  return Number(std::exp(x.to_complex()));
}

double abs(const Number& x) { return std::abs(x.to_complex()); }

}  // namespace superloc
