#pragma once

#include <compare>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "superloc/number.hpp"

namespace superloc {

class ScalarExpr;

/// Compactly supported smooth primitives. Neither has a division node: the
/// division inside their closed forms happens only at evaluation time.
enum class SpecialKind {
  /// exp(1 - 1/(1-u^2)) for |u| < 1, zero otherwise; equals 1 at u = 0.
  Bump,
  /// Smooth step: 1 for u <= lo, 0 for u >= hi.
  Step,
};

/// F^{(order)}(arg) * arg^{-inv_power}.
///
/// A positive `inv_power` is only legal when F^{(order)} vanishes on a
/// neighbourhood of arg = 0, which the constructors check.
struct SpecialFactor {
  SpecialKind kind = SpecialKind::Bump;
  int order = 0;
  int inv_power = 0;
  Rational lo = 0;
  Rational hi = 0;
  std::shared_ptr<const ScalarExpr> arg;

  const ScalarExpr& argument() const { return *arg; }
};

int compare(const SpecialFactor& a, const SpecialFactor& b);

/// The non-coefficient part of a term: x^powers * exp(exp_arg) * prod(specials).
struct Monomial {
  std::vector<int> powers;                        // trailing zeros trimmed
  std::shared_ptr<const ScalarExpr> exp_arg;      // null means exp(0)
  std::vector<SpecialFactor> specials;            // sorted

  int degree() const;
  int power(int axis) const { return axis < static_cast<int>(powers.size()) ? powers[axis] : 0; }
  bool is_polynomial() const { return !exp_arg && specials.empty(); }
  bool is_one() const { return powers.empty() && is_polynomial(); }
};

int compare(const Monomial& a, const Monomial& b);

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

/// Element of the coefficient ring C^inf(R^m) at desk scale.
///
/// Values are kept in a canonical sum-of-terms form
///   sum_k c_k * x^{a_k} * exp(P_k) * prod special(...)
/// so structural equality is ring equality for everything the algebra
/// produces (floating constants of exponentials are pulled out, exponentials are
/// merged, and special factors with a polynomial argument absorb exact
/// multiples of that argument).
class ScalarExpr {
 public:
  using TermMap = std::map<Monomial, Number, MonomialLess>;

  ScalarExpr();
  ScalarExpr(Number c);  // NOLINT(google-explicit-constructor)
  ScalarExpr(int c) : ScalarExpr(Number(c)) {}  // NOLINT

  static ScalarExpr constant(Number c) { return ScalarExpr(std::move(c)); }
  static ScalarExpr coordinate(int axis);
  static ScalarExpr from_terms(TermMap terms);
  static ScalarExpr special(SpecialKind kind, const ScalarExpr& arg, int order = 0, int inv_power = 0,
                            Rational lo = 0, Rational hi = 0);
  static ScalarExpr bump(const ScalarExpr& arg) { return special(SpecialKind::Bump, arg); }
  static ScalarExpr step(Rational lo, Rational hi, const ScalarExpr& arg) {
    return special(SpecialKind::Step, arg, 0, 0, std::move(lo), std::move(hi));
  }

  const TermMap& terms() const;
  bool is_zero() const { return terms().empty(); }
  bool is_constant() const;
  /// Constant term (coefficient of the unit monomial).
  Number constant_term() const;
  bool is_polynomial() const;
  bool is_exact() const;
  /// Highest axis index referenced anywhere (including inside arguments), or -1.
  int max_axis() const;
  /// Total polynomial degree over polynomial terms; -1 for zero.
  int polynomial_degree() const;

  ScalarExpr& operator+=(const ScalarExpr& o);
  ScalarExpr& operator-=(const ScalarExpr& o);
  ScalarExpr& operator*=(const ScalarExpr& o);
  friend ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b) { return a += b; }
  friend ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b) { return a -= b; }
  friend ScalarExpr operator*(ScalarExpr a, const ScalarExpr& b) { return a *= b; }
  ScalarExpr operator-() const;

  friend bool operator==(const ScalarExpr& a, const ScalarExpr& b) { return compare(a, b) == 0; }
  friend int compare(const ScalarExpr& a, const ScalarExpr& b);

  std::string to_string() const;

 private:
  std::shared_ptr<const TermMap> terms_;
};

ScalarExpr pow(const ScalarExpr& e, int exponent);
ScalarExpr exp(const ScalarExpr& e);
ScalarExpr scale(const ScalarExpr& e, const Number& c);

/// Symbolic partial derivative along an even axis.
ScalarExpr diff_scalar(const ScalarExpr& e, int axis);

/// Value at a real point. `x` must cover every axis the expression uses.
Complex eval_scalar(const ScalarExpr& e, std::span<const double> x);

/// Replaces coordinate `axis` by `replacement` everywhere, including inside arguments.
ScalarExpr substitute(const ScalarExpr& e, int axis, const ScalarExpr& replacement);

/// Simultaneous substitution x^a -> images[a]; axes past the end are kept.
ScalarExpr substitute_all(const ScalarExpr& e, std::span<const ScalarExpr> images);

/// Renames axes: axis a becomes axis_map[a]. Axes mapped to -1 must not occur.
ScalarExpr remap_axes(const ScalarExpr& e, std::span<const int> axis_map);

/// Inverse within the grammar: only c * exp(P) with c != 0 is invertible.
ScalarExpr invert_scalar(const ScalarExpr& e);
bool is_invertible_scalar(const ScalarExpr& e);
/// Positive square root within the grammar: c * exp(P) with c > 0.
ScalarExpr sqrt_scalar(const ScalarExpr& e);

/// Largest |coefficient| over all terms (0 for the zero element).
double max_abs_coefficient(const ScalarExpr& e);

/// k-th derivative of the special primitive F at u.
double special_derivative(SpecialKind kind, int order, double lo, double hi, double u);

/// Exact multivariate polynomial division by a polynomial divisor; returns
/// false when the remainder is nonzero.
bool divide_polynomial(const ScalarExpr& numerator, const ScalarExpr& divisor, ScalarExpr* quotient);

}  // namespace superloc
