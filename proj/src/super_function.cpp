#include "superloc/super_function.hpp"

#include <functional>
#include <stdexcept>

#include "superloc/expr_format.hpp"

namespace superloc {

namespace {

void accumulate(SuperFunction::Components& map, OddMask mask, const ScalarExpr& v) {
  if (v.is_zero()) return;
  auto it = map.find(mask);
  if (it == map.end()) {
    map.emplace(mask, v);
    return;
  }
  it->second += v;
  if (it->second.is_zero()) map.erase(it);
}

// sum_k coeff(k) * psi^k for even f = f_0 + psi; the series stops once psi^k vanishes.
SuperFunction power_series(const SuperFunction& f, const std::function<ScalarExpr(int)>& coeff) {
  if (!f.is_even()) throw std::domain_error("function of a non-even superfunction");
  SuperFunction psi = f.soul();
  SuperFunction result(coeff(0));
  SuperFunction power(1);
  for (int k = 1;; ++k) {
    power *= psi;
    if (power.is_zero()) break;
    result += SuperFunction(coeff(k)) * power;
  }
  return result;
}

Rational factorial(int k) {
  Rational f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

int koszul_sign(OddMask i, OddMask j) {
  if (i & j) return 0;
  int swaps = 0;
  for (OddMask rest = j; rest; rest &= rest - 1) {
    OddMask bit = rest & (~rest + 1);
    // elements of I that are greater than this element of J
    swaps += mask_size(i & ~(bit | (bit - 1)));
  }
  return swaps % 2 ? -1 : 1;
}

SuperFunction::SuperFunction(ScalarExpr body) {
  if (!body.is_zero()) components_.emplace(0, std::move(body));
}

SuperFunction SuperFunction::odd_coordinate(int index) {
  if (index < 0 || index >= 32) throw std::out_of_range("odd coordinate index out of range");
  return monomial(OddMask{1} << index, ScalarExpr(1));
}

SuperFunction SuperFunction::monomial(OddMask mask, ScalarExpr coefficient) {
  SuperFunction f;
  if (!coefficient.is_zero()) f.components_.emplace(mask, std::move(coefficient));
  return f;
}

SuperFunction SuperFunction::from_components(Components components) {
  SuperFunction f;
  for (auto& [mask, v] : components)
    if (!v.is_zero()) f.components_.emplace(mask, std::move(v));
  return f;
}

ScalarExpr SuperFunction::component(OddMask mask) const {
  auto it = components_.find(mask);
  return it == components_.end() ? ScalarExpr() : it->second;
}

SuperFunction SuperFunction::soul() const {
  SuperFunction s = *this;
  s.components_.erase(0);
  return s;
}

bool SuperFunction::is_even() const {
  for (const auto& [mask, v] : components_)
    if (mask_size(mask) % 2) return false;
  return true;
}

bool SuperFunction::is_odd() const {
  for (const auto& [mask, v] : components_)
    if (mask_size(mask) % 2 == 0) return false;
  return true;
}

int SuperFunction::parity() const {
  if (is_even()) return 0;
  if (is_odd()) return 1;
  throw std::domain_error("superfunction has no definite parity: " + to_string());
}

bool SuperFunction::is_exact() const {
  for (const auto& [mask, v] : components_)
    if (!v.is_exact()) return false;
  return true;
}

int SuperFunction::max_even_axis() const {
  int best = -1;
  for (const auto& [mask, v] : components_) best = std::max(best, v.max_axis());
  return best;
}

int SuperFunction::max_odd_index() const {
  int best = -1;
  for (const auto& [mask, v] : components_)
    for (int k = 31; k >= 0; --k)
      if (mask & (OddMask{1} << k)) {
        best = std::max(best, k);
        break;
      }
  return best;
}

SuperFunction& SuperFunction::operator+=(const SuperFunction& o) {
  for (const auto& [mask, v] : o.components_) accumulate(components_, mask, v);
  return *this;
}

SuperFunction& SuperFunction::operator-=(const SuperFunction& o) {
  for (const auto& [mask, v] : o.components_) accumulate(components_, mask, -v);
  return *this;
}

SuperFunction& SuperFunction::operator*=(const SuperFunction& o) { return *this = *this * o; }

SuperFunction operator*(const SuperFunction& a, const SuperFunction& b) {
  SuperFunction r;
  for (const auto& [ma, va] : a.components_)
    for (const auto& [mb, vb] : b.components_) {
      int s = koszul_sign(ma, mb);
      if (s == 0) continue;
      ScalarExpr prod = va * vb;
      accumulate(r.components_, ma | mb, s > 0 ? prod : -prod);
    }
  return r;
}

SuperFunction SuperFunction::operator-() const { return scale(*this, Number(-1)); }

bool operator==(const SuperFunction& a, const SuperFunction& b) { return compare(a, b) == 0; }

int compare(const SuperFunction& a, const SuperFunction& b) {
  auto ia = a.components_.begin(), ib = b.components_.begin();
  for (; ia != a.components_.end() && ib != b.components_.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    if (int c = compare(ia->second, ib->second); c != 0) return c;
  }
  if (ia == a.components_.end() && ib == b.components_.end()) return 0;
  return ia == a.components_.end() ? -1 : 1;
}

std::string SuperFunction::to_string() const {
  return format_super(*this, CoordinateNames::defaults(max_even_axis() + 1, max_odd_index() + 1));
}

SuperFunction scale(const SuperFunction& f, const Number& c) {
  SuperFunction::Components out;
  for (const auto& [mask, v] : f.components()) accumulate(out, mask, scale(v, c));
  return SuperFunction::from_components(std::move(out));
}

SuperFunction pow(const SuperFunction& f, int exponent) {
  if (exponent < 0) throw std::invalid_argument("negative power of a superfunction");
  SuperFunction r(1);
  for (int i = 0; i < exponent; ++i) r *= f;
  return r;
}

SuperFunction diff_even(const SuperFunction& f, int axis) {
  SuperFunction::Components out;
  for (const auto& [mask, v] : f.components()) accumulate(out, mask, diff_scalar(v, axis));
  return SuperFunction::from_components(std::move(out));
}

SuperFunction diff_odd(const SuperFunction& f, int index) {
  if (index < 0 || index >= 32) throw std::out_of_range("odd coordinate index out of range");
  OddMask bit = OddMask{1} << index;
  SuperFunction::Components out;
  for (const auto& [mask, v] : f.components()) {
    if (!(mask & bit)) continue;
    bool negative = mask_size(mask & (bit - 1)) % 2;
    accumulate(out, mask & ~bit, negative ? -v : v);
  }
  return SuperFunction::from_components(std::move(out));
}

SuperFunction exp_even(const SuperFunction& f) {
  ScalarExpr e = exp(f.body());
  return power_series(f, [&](int k) { return scale(e, Number(Rational(1) / factorial(k))); });
}

SuperFunction sqrt_positive(const SuperFunction& f) {
  ScalarExpr root = sqrt_scalar(f.body());
  ScalarExpr inv = invert_scalar(f.body());
  // binom(1/2, k) * f_0^{1/2 - k}
  Rational binom = 1;
  ScalarExpr inv_power(1);
  return power_series(f, [&](int k) {
    if (k > 0) {
      binom *= (Rational(1, 2) - (k - 1));
      binom /= k;
      inv_power *= inv;
    }
    return scale(root * inv_power, Number(binom));
  });
}

SuperFunction inverse_even(const SuperFunction& f) {
  ScalarExpr inv = invert_scalar(f.body());
  ScalarExpr term = inv;
  return power_series(f, [&](int k) {
    if (k > 0) term = -term * inv;
    return term;
  });
}

SuperFunction apply_special(SpecialKind kind, const SuperFunction& f, Rational lo, Rational hi) {
  ScalarExpr f0 = f.body();
  return power_series(f, [&](int k) {
    return scale(ScalarExpr::special(kind, f0, k, 0, lo, hi), Number(Rational(1) / factorial(k)));
  });
}

SuperFunction pullback(const SuperFunction& f, std::span<const SuperFunction> even_images,
                       std::span<const SuperFunction> odd_images) {
  const int m = static_cast<int>(even_images.size());
  std::vector<ScalarExpr> bodies(m);
  std::vector<SuperFunction> nilpotent(m);
  for (int a = 0; a < m; ++a) {
    if (!even_images[a].is_even()) throw std::invalid_argument("even coordinate image must be even");
    bodies[a] = even_images[a].body();
    nilpotent[a] = even_images[a].soul();
  }
  for (const auto& img : odd_images)
    if (!img.is_odd()) throw std::invalid_argument("odd coordinate image must be odd");

  // g(X_0 + nu) = sum_alpha (d^alpha g)(X_0) nu^alpha / alpha!
  std::function<void(int, const ScalarExpr&, const SuperFunction&, SuperFunction&)> expand =
      [&](int a, const ScalarExpr& g, const SuperFunction& weight, SuperFunction& acc) {
        if (a == m) {
          acc += SuperFunction(substitute_all(g, bodies)) * weight;
          return;
        }
        ScalarExpr deriv = g;
        SuperFunction w = weight;
        for (int k = 0;; ++k) {
          expand(a + 1, deriv, w, acc);
          w = scale(w * nilpotent[a], Number(Rational(1, k + 1)));
          if (w.is_zero()) break;
          deriv = diff_scalar(deriv, a);
          if (deriv.is_zero()) break;
        }
      };

  SuperFunction result;
  for (const auto& [mask, v] : f.components()) {
    SuperFunction odd_part(1);
    for (int k = 0; k < 32; ++k) {
      if (!(mask & (OddMask{1} << k))) continue;
      odd_part *= k < static_cast<int>(odd_images.size()) ? odd_images[k] : SuperFunction::odd_coordinate(k);
    }
    if (odd_part.is_zero()) continue;
    SuperFunction composed;
    expand(0, v, SuperFunction(1), composed);
    result += composed * odd_part;
  }
  return result;
}

double max_abs_coefficient(const SuperFunction& f) {
  double best = 0.0;
  for (const auto& [mask, v] : f.components()) best = std::max(best, max_abs_coefficient(v));
  return best;
}

std::map<OddMask, Complex> eval_components(const SuperFunction& f, std::span<const double> x) {
  std::map<OddMask, Complex> out;
  for (const auto& [mask, v] : f.components()) out[mask] = eval_scalar(v, x);
  return out;
}

}  // namespace superloc
