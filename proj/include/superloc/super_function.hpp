#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "superloc/scalar_expr.hpp"

namespace superloc {

/// Set of odd coordinate indices, bit k standing for theta^{k+1}.
using OddMask = std::uint32_t;

inline int mask_size(OddMask m) { return __builtin_popcount(m); }

/// Sign of theta^I * theta^J after reordering to increasing indices; 0 when I and J overlap.
int koszul_sign(OddMask i, OddMask j);

/// Element of C^inf(R^m) (x) Lambda[theta^1..theta^n]: f = sum_I f_I(x) theta^I,
/// each theta^I taken in increasing index order.
class SuperFunction {
 public:
  using Components = std::map<OddMask, ScalarExpr>;

  SuperFunction() = default;
  SuperFunction(ScalarExpr body);  // NOLINT(google-explicit-constructor)
  SuperFunction(int c) : SuperFunction(ScalarExpr(c)) {}  // NOLINT

  static SuperFunction even_coordinate(int axis) { return SuperFunction(ScalarExpr::coordinate(axis)); }
  static SuperFunction odd_coordinate(int index);
  static SuperFunction monomial(OddMask mask, ScalarExpr coefficient);
  static SuperFunction from_components(Components components);

  const Components& components() const { return components_; }
  ScalarExpr component(OddMask mask) const;
  ScalarExpr body() const { return component(0); }
  SuperFunction soul() const;

  bool is_zero() const { return components_.empty(); }
  bool is_even() const;
  bool is_odd() const;
  /// 0 or 1; throws for inhomogeneous elements. Zero counts as even.
  int parity() const;
  bool is_exact() const;
  int max_even_axis() const;
  int max_odd_index() const;

  SuperFunction& operator+=(const SuperFunction& o);
  SuperFunction& operator-=(const SuperFunction& o);
  SuperFunction& operator*=(const SuperFunction& o);
  friend SuperFunction operator+(SuperFunction a, const SuperFunction& b) { return a += b; }
  friend SuperFunction operator-(SuperFunction a, const SuperFunction& b) { return a -= b; }
  friend SuperFunction operator*(const SuperFunction& a, const SuperFunction& b);
  SuperFunction operator-() const;

  friend bool operator==(const SuperFunction& a, const SuperFunction& b);
  friend int compare(const SuperFunction& a, const SuperFunction& b);

  std::string to_string() const;

 private:
  Components components_;
};

SuperFunction scale(const SuperFunction& f, const Number& c);
SuperFunction pow(const SuperFunction& f, int exponent);

SuperFunction diff_even(const SuperFunction& f, int axis);
/// Left derivative: d/dtheta^j (theta^j g) = g for g free of theta^j.
SuperFunction diff_odd(const SuperFunction& f, int index);

/// exp(f) for even f: exp(f_0) * sum_k psi^k / k!, psi the nilpotent part.
SuperFunction exp_even(const SuperFunction& f);
/// Positive square root sqrt(f_0) * sum_k binom(1/2, k) (psi / f_0)^k.
SuperFunction sqrt_positive(const SuperFunction& f);
/// Multiplicative inverse of an even element with invertible body.
SuperFunction inverse_even(const SuperFunction& f);
/// F(f) for a special primitive F, expanded in the nilpotent part of even f.
SuperFunction apply_special(SpecialKind kind, const SuperFunction& f, Rational lo = 0, Rational hi = 0);

/// Simultaneous substitution x^a -> even_images[a], theta^k -> odd_images[k].
/// Missing trailing images leave those coordinates unchanged.
SuperFunction pullback(const SuperFunction& f, std::span<const SuperFunction> even_images,
                       std::span<const SuperFunction> odd_images);

/// Largest |coefficient| over all components.
double max_abs_coefficient(const SuperFunction& f);

/// Component values at a real point.
std::map<OddMask, Complex> eval_components(const SuperFunction& f, std::span<const double> x);

}  // namespace superloc
