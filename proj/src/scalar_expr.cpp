#include "superloc/scalar_expr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "superloc/expr_format.hpp"

namespace superloc {

namespace {

// Truncated Taylor series in one variable, used to differentiate the
// special primitives to arbitrary order at a point.
class Jet {
 public:
  explicit Jet(int order) : c_(order + 1, 0.0) {}
  static Jet variable(int order, double at) {
    Jet j(order);
    j.c_[0] = at;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }
  int order() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int k) const { return c_[k]; }

  Jet affine(double a, double b) const {  // a * self + b
    Jet r(order());
    for (int k = 0; k <= order(); ++k) r.c_[k] = a * c_[k];
    r.c_[0] += b;
    return r;
  }
  Jet operator*(const Jet& o) const {
    Jet r(order());
    for (int i = 0; i <= order(); ++i)
      for (int j = 0; i + j <= order(); ++j) r.c_[i + j] += c_[i] * o.c_[j];
    return r;
  }
  Jet operator+(const Jet& o) const {
    Jet r(order());
    for (int k = 0; k <= order(); ++k) r.c_[k] = c_[k] + o.c_[k];
    return r;
  }
  Jet reciprocal() const {
    Jet r(order());
    r.c_[0] = 1.0 / c_[0];
    for (int n = 1; n <= order(); ++n) {
      double s = 0.0;
      for (int k = 1; k <= n; ++k) s += c_[k] * r.c_[n - k];
      r.c_[n] = -s / c_[0];
    }
    return r;
  }
  Jet exp() const {
    Jet r(order());
    r.c_[0] = std::exp(c_[0]);
    for (int n = 1; n <= order(); ++n) {
      double s = 0.0;
      for (int k = 1; k <= n; ++k) s += k * c_[k] * r.c_[n - k];
      r.c_[n] = s / n;
    }
    return r;
  }

 private:
  std::vector<double> c_;
};

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

int compare_ptr(const std::shared_ptr<const ScalarExpr>& a, const std::shared_ptr<const ScalarExpr>& b) {
  if (!a || !b) return (a ? 1 : 0) - (b ? 1 : 0);
  return compare(*a, *b);
}

std::shared_ptr<const ScalarExpr> share(ScalarExpr e) {
  if (e.is_zero()) return nullptr;
  return std::make_shared<const ScalarExpr>(std::move(e));
}

void trim(std::vector<int>& powers) {
  while (!powers.empty() && powers.back() == 0) powers.pop_back();
}

void accumulate(ScalarExpr::TermMap& map, const Monomial& m, const Number& c) {
  if (c.is_zero()) return;
  auto it = map.find(m);
  if (it == map.end()) {
    map.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) map.erase(it);
}

bool has_reducible_special(const Monomial& m) {
  for (const auto& s : m.specials)
    if (s.inv_power > 0 && s.argument().is_polynomial()) return true;
  return false;
}

// Special factors with a polynomial argument u absorb exact multiples of u:
// p * u * F(u) u^{-j}  ->  p * F(u) u^{-(j-1)}.
void reduce_specials(ScalarExpr::TermMap& map) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<Monomial, ScalarExpr::TermMap, MonomialLess> groups;
    for (const auto& [m, c] : map) {
      if (!has_reducible_special(m)) continue;
      Monomial key = m;
      key.powers.clear();
      Monomial poly;
      poly.powers = m.powers;
      groups[key].emplace(poly, c);
    }
    for (const auto& [key, poly_terms] : groups) {
      ScalarExpr poly = ScalarExpr::from_terms(poly_terms);
      for (std::size_t s = 0; s < key.specials.size(); ++s) {
        const SpecialFactor& sf = key.specials[s];
        if (sf.inv_power == 0 || !sf.argument().is_polynomial()) continue;
        ScalarExpr quotient;
        if (!divide_polynomial(poly, sf.argument(), &quotient)) continue;
        for (const auto& [pm, pc] : poly_terms) {
          Monomial full = key;
          full.powers = pm.powers;
          map.erase(full);
        }
        Monomial reduced = key;
        reduced.specials[s].inv_power -= 1;
        std::sort(reduced.specials.begin(), reduced.specials.end(),
                  [](const SpecialFactor& a, const SpecialFactor& b) { return compare(a, b) < 0; });
        for (const auto& [qm, qc] : quotient.terms()) {
          Monomial full = reduced;
          full.powers = qm.powers;
          accumulate(map, full, qc);
        }
        changed = true;
        break;
      }
      if (changed) break;
    }
  }
}

bool any_reducible(const ScalarExpr::TermMap& map) {
  for (const auto& [m, c] : map)
    if (has_reducible_special(m)) return true;
  return false;
}

ScalarExpr term_expr(const Monomial& m, const Number& c) {
  ScalarExpr::TermMap map;
  accumulate(map, m, c);
  return ScalarExpr::from_terms(std::move(map));
}

ScalarExpr multiply_terms(const Monomial& a, const Number& ca, const Monomial& b, const Number& cb) {
  Monomial m;
  m.powers.assign(std::max(a.powers.size(), b.powers.size()), 0);
  for (std::size_t i = 0; i < a.powers.size(); ++i) m.powers[i] += a.powers[i];
  for (std::size_t i = 0; i < b.powers.size(); ++i) m.powers[i] += b.powers[i];
  if (a.exp_arg && b.exp_arg) {
    m.exp_arg = share(*a.exp_arg + *b.exp_arg);
  } else {
    m.exp_arg = a.exp_arg ? a.exp_arg : b.exp_arg;
  }
  m.specials = a.specials;
  m.specials.insert(m.specials.end(), b.specials.begin(), b.specials.end());
  std::sort(m.specials.begin(), m.specials.end(),
            [](const SpecialFactor& x, const SpecialFactor& y) { return compare(x, y) < 0; });
  ScalarExpr::TermMap map;
  accumulate(map, m, ca * cb);
  return ScalarExpr::from_terms(std::move(map));
}

// Rebuilds a term with the given factor maps applied to coordinates and arguments.
template <typename CoordFn, typename ArgFn>
ScalarExpr rebuild(const ScalarExpr& e, CoordFn coord, ArgFn arg_map) {
  ScalarExpr result;
  for (const auto& [m, c] : e.terms()) {
    ScalarExpr t(c);
    for (int a = 0; a < static_cast<int>(m.powers.size()); ++a)
      if (m.powers[a] > 0) t *= pow(coord(a), m.powers[a]);
    if (m.exp_arg) t *= exp(arg_map(*m.exp_arg));
    for (const auto& s : m.specials)
      t *= ScalarExpr::special(s.kind, arg_map(s.argument()), s.order, s.inv_power, s.lo, s.hi);
    result += t;
  }
  return result;
}

const ScalarExpr::TermMap& empty_map() {
  static const ScalarExpr::TermMap kEmpty;
  return kEmpty;
}

}  // namespace

int compare(const SpecialFactor& a, const SpecialFactor& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.order != b.order) return a.order < b.order ? -1 : 1;
  if (a.inv_power != b.inv_power) return a.inv_power < b.inv_power ? -1 : 1;
  if (a.lo != b.lo) return a.lo < b.lo ? -1 : 1;
  if (a.hi != b.hi) return a.hi < b.hi ? -1 : 1;
  return compare_ptr(a.arg, b.arg);
}

int Monomial::degree() const {
  int d = 0;
  for (int p : powers) d += p;
  return d;
}

int compare(const Monomial& a, const Monomial& b) {
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db ? -1 : 1;
  std::size_t n = std::max(a.powers.size(), b.powers.size());
  for (std::size_t i = 0; i < n; ++i) {
    int pa = i < a.powers.size() ? a.powers[i] : 0;
    int pb = i < b.powers.size() ? b.powers[i] : 0;
    if (pa != pb) return pa > pb ? -1 : 1;
  }
  if (int c = compare_ptr(a.exp_arg, b.exp_arg); c != 0) return c;
  if (a.specials.size() != b.specials.size()) return a.specials.size() < b.specials.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.specials.size(); ++i)
    if (int c = compare(a.specials[i], b.specials[i]); c != 0) return c;
  return 0;
}

ScalarExpr::ScalarExpr() = default;

ScalarExpr::ScalarExpr(Number c) {
  if (c.is_zero()) return;
  TermMap map;
  map.emplace(Monomial{}, std::move(c));
  terms_ = std::make_shared<const TermMap>(std::move(map));
}

ScalarExpr ScalarExpr::coordinate(int axis) {
  if (axis < 0) throw std::out_of_range("coordinate axis must be non-negative");
  Monomial m;
  m.powers.assign(axis + 1, 0);
  m.powers[axis] = 1;
  TermMap map;
  map.emplace(std::move(m), Number(1));
  return from_terms(std::move(map));
}

ScalarExpr ScalarExpr::from_terms(TermMap terms) {
  for (auto it = terms.begin(); it != terms.end();) {
    it = it->second.is_zero() ? terms.erase(it) : std::next(it);
  }
  if (any_reducible(terms)) reduce_specials(terms);
  ScalarExpr e;
  if (!terms.empty()) e.terms_ = std::make_shared<const TermMap>(std::move(terms));
  return e;
}

ScalarExpr ScalarExpr::special(SpecialKind kind, const ScalarExpr& arg, int order, int inv_power, Rational lo,
                               Rational hi) {
  if (order < 0 || inv_power < 0) throw std::invalid_argument("special factor orders must be non-negative");
  if (kind == SpecialKind::Step && !(lo < hi)) throw std::invalid_argument("step requires lo < hi");
  if (inv_power > 0 && !(kind == SpecialKind::Step && order >= 1 && lo > 0)) {
    throw std::invalid_argument("special factor with a negative power of its argument must vanish near 0");
  }
  if (kind == SpecialKind::Bump) lo = hi = 0;
  if (arg.is_constant()) {
    Number u = arg.constant_term();
    if (u.is_exact()) {
      const Rational& r = u.exact();
      if (kind == SpecialKind::Bump) {
        if (r >= 1 || r <= -1) return ScalarExpr();
        if (r == 0 && order == 0) return ScalarExpr(1);
      } else {
        if (r >= hi) return ScalarExpr();
        if (r <= lo) return order == 0 ? ScalarExpr(1) : ScalarExpr();
      }
    }
    double ud = u.real();
    double v = special_derivative(kind, order, static_cast<double>(lo), static_cast<double>(hi), ud);
    if (v == 0.0) return ScalarExpr();
    return ScalarExpr(Number(v * std::pow(ud, -inv_power)));
  }
  SpecialFactor sf;
  sf.kind = kind;
  sf.order = order;
  sf.inv_power = inv_power;
  sf.lo = std::move(lo);
  sf.hi = std::move(hi);
  sf.arg = std::make_shared<const ScalarExpr>(arg);
  Monomial m;
  m.specials.push_back(std::move(sf));
  TermMap map;
  map.emplace(std::move(m), Number(1));
  return from_terms(std::move(map));
}

const ScalarExpr::TermMap& ScalarExpr::terms() const { return terms_ ? *terms_ : empty_map(); }

bool ScalarExpr::is_constant() const {
  const auto& t = terms();
  return t.empty() || (t.size() == 1 && t.begin()->first.is_one());
}

Number ScalarExpr::constant_term() const {
  auto it = terms().find(Monomial{});
  return it == terms().end() ? Number(0) : it->second;
}

bool ScalarExpr::is_polynomial() const {
  for (const auto& [m, c] : terms())
    if (!m.is_polynomial()) return false;
  return true;
}

bool ScalarExpr::is_exact() const {
  for (const auto& [m, c] : terms()) {
    if (!c.is_exact()) return false;
    if (m.exp_arg && !m.exp_arg->is_exact()) return false;
    for (const auto& s : m.specials)
      if (!s.argument().is_exact()) return false;
  }
  return true;
}

int ScalarExpr::max_axis() const {
  int best = -1;
  for (const auto& [m, c] : terms()) {
    for (int a = 0; a < static_cast<int>(m.powers.size()); ++a)
      if (m.powers[a] > 0) best = std::max(best, a);
    if (m.exp_arg) best = std::max(best, m.exp_arg->max_axis());
    for (const auto& s : m.specials) best = std::max(best, s.argument().max_axis());
  }
  return best;
}

int ScalarExpr::polynomial_degree() const {
  int d = -1;
  for (const auto& [m, c] : terms()) d = std::max(d, m.degree());
  return d;
}

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& o) {
  if (o.is_zero()) return *this;
  if (is_zero()) return *this = o;
  TermMap map = terms();
  for (const auto& [m, c] : o.terms()) accumulate(map, m, c);
  return *this = from_terms(std::move(map));
}

ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& o) { return *this += -o; }

ScalarExpr ScalarExpr::operator-() const { return scale(*this, Number(-1)); }

ScalarExpr& ScalarExpr::operator*=(const ScalarExpr& o) {
  if (is_zero() || o.is_zero()) return *this = ScalarExpr();
  ScalarExpr result;
  for (const auto& [ma, ca] : terms())
    for (const auto& [mb, cb] : o.terms()) result += multiply_terms(ma, ca, mb, cb);
  return *this = result;
}

int compare(const ScalarExpr& a, const ScalarExpr& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  auto ia = ta.begin(), ib = tb.begin();
  for (; ia != ta.end() && ib != tb.end(); ++ia, ++ib) {
    if (int c = compare(ia->first, ib->first); c != 0) return c;
    if (int c = compare(ia->second, ib->second); c != 0) return c;
  }
  if (ia == ta.end() && ib == tb.end()) return 0;
  return ia == ta.end() ? -1 : 1;
}

std::string ScalarExpr::to_string() const { return format_scalar(*this, CoordinateNames::defaults(max_axis() + 1, 0)); }

ScalarExpr pow(const ScalarExpr& e, int exponent) {
  if (exponent < 0) throw std::invalid_argument("negative powers are not in the expression grammar");
  ScalarExpr result(1), base = e;
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

ScalarExpr exp(const ScalarExpr& e) {
  // Exact constants stay inside the exponential so exp(c) * exp(-c) cancels exactly.
  Number c = e.constant_term();
  if (c.is_exact()) c = Number(0);
  ScalarExpr rest = e - ScalarExpr(c);
  if (rest.is_zero()) return ScalarExpr(exp(c));
  Monomial m;
  m.exp_arg = std::make_shared<const ScalarExpr>(std::move(rest));
  return term_expr(m, exp(c));
}

ScalarExpr scale(const ScalarExpr& e, const Number& c) {
  if (c.is_zero()) return ScalarExpr();
  ScalarExpr::TermMap map;
  for (const auto& [m, v] : e.terms()) accumulate(map, m, v * c);
  return ScalarExpr::from_terms(std::move(map));
}

ScalarExpr diff_scalar(const ScalarExpr& e, int axis) {
  if (axis < 0) throw std::out_of_range("differentiation axis out of range");
  ScalarExpr result;
  for (const auto& [m, c] : e.terms()) {
    int p = m.power(axis);
    if (p > 0) {
      Monomial lowered = m;
      lowered.powers[axis] -= 1;
      trim(lowered.powers);
      result += term_expr(lowered, c * Number(p));
    }
    if (m.exp_arg) {
      ScalarExpr d = diff_scalar(*m.exp_arg, axis);
      if (!d.is_zero()) result += term_expr(m, c) * d;
    }
    for (std::size_t i = 0; i < m.specials.size(); ++i) {
      const SpecialFactor& s = m.specials[i];
      ScalarExpr du = diff_scalar(s.argument(), axis);
      if (du.is_zero()) continue;
      Monomial rest = m;
      rest.specials.erase(rest.specials.begin() + static_cast<std::ptrdiff_t>(i));
      ScalarExpr outer = ScalarExpr::special(s.kind, s.argument(), s.order + 1, s.inv_power, s.lo, s.hi);
      if (s.inv_power > 0) {
        outer -= scale(ScalarExpr::special(s.kind, s.argument(), s.order, s.inv_power + 1, s.lo, s.hi),
                       Number(s.inv_power));
      }
      result += term_expr(rest, c) * outer * du;
    }
  }
  return result;
}

double special_derivative(SpecialKind kind, int order, double lo, double hi, double u) {
  if (kind == SpecialKind::Bump) {
    if (std::abs(u) >= 1.0) return 0.0;
    // exp(1 - 1/(1-u^2))
    Jet v = Jet::variable(order, u);
    Jet t = (v * v).affine(-1.0, 1.0);
    Jet f = t.reciprocal().affine(-1.0, 1.0).exp();
    return f[order] * factorial(order);
  }
  if (u <= lo) return order == 0 ? 1.0 : 0.0;
  if (u >= hi) return 0.0;
  // psi(s) / (psi(s) + psi(1-s)), s = (hi-u)/(hi-lo), psi(t) = exp(-1/t)
  double w = hi - lo;
  Jet s = Jet::variable(order, u).affine(-1.0 / w, hi / w);
  Jet one_minus_s = s.affine(-1.0, 1.0);
  Jet a = s.reciprocal().affine(-1.0, 0.0).exp();
  Jet b = one_minus_s.reciprocal().affine(-1.0, 0.0).exp();
  Jet f = a * (a + b).reciprocal();
  return f[order] * factorial(order);
}

Complex eval_scalar(const ScalarExpr& e, std::span<const double> x) {
  if (e.max_axis() >= static_cast<int>(x.size())) {
    throw std::invalid_argument("evaluation point has fewer coordinates than the expression uses");
  }
  Complex total(0.0, 0.0);
  for (const auto& [m, c] : e.terms()) {
    Complex t = c.to_complex();
    for (std::size_t a = 0; a < m.powers.size(); ++a)
      if (m.powers[a] > 0) t *= std::pow(x[a], m.powers[a]);
    if (m.exp_arg) t *= std::exp(eval_scalar(*m.exp_arg, x));
    for (const auto& s : m.specials) {
      Complex u = eval_scalar(s.argument(), x);
      if (std::abs(u.imag()) > 1e-12 * (1.0 + std::abs(u.real()))) {
        throw std::domain_error("special function argument is not real");
      }
      double v = special_derivative(s.kind, s.order, static_cast<double>(s.lo), static_cast<double>(s.hi), u.real());
      t *= v == 0.0 ? 0.0 : v * std::pow(u.real(), -s.inv_power);
    }
    total += t;
  }
  return total;
}

ScalarExpr substitute(const ScalarExpr& e, int axis, const ScalarExpr& replacement) {
  return rebuild(
      e, [&](int a) { return a == axis ? replacement : ScalarExpr::coordinate(a); },
      [&](const ScalarExpr& arg) { return substitute(arg, axis, replacement); });
}

ScalarExpr substitute_all(const ScalarExpr& e, std::span<const ScalarExpr> images) {
  return rebuild(
      e, [&](int a) { return a < static_cast<int>(images.size()) ? images[a] : ScalarExpr::coordinate(a); },
      [&](const ScalarExpr& arg) { return substitute_all(arg, images); });
}

ScalarExpr remap_axes(const ScalarExpr& e, std::span<const int> axis_map) {
  return rebuild(
      e,
      [&](int a) {
        if (a >= static_cast<int>(axis_map.size()) || axis_map[a] < 0) {
          throw std::invalid_argument("expression depends on a removed axis");
        }
        return ScalarExpr::coordinate(axis_map[a]);
      },
      [&](const ScalarExpr& arg) { return remap_axes(arg, axis_map); });
}

bool is_invertible_scalar(const ScalarExpr& e) {
  if (e.terms().size() != 1) return false;
  const auto& [m, c] = *e.terms().begin();
  return m.powers.empty() && m.specials.empty() && !c.is_zero();
}

ScalarExpr invert_scalar(const ScalarExpr& e) {
  if (!is_invertible_scalar(e)) {
    throw std::domain_error("body is not invertible within the expression grammar: " + e.to_string());
  }
  const auto& [m, c] = *e.terms().begin();
  ScalarExpr r(Number(1) / c);
  if (m.exp_arg) r *= exp(-*m.exp_arg);
  return r;
}

ScalarExpr sqrt_scalar(const ScalarExpr& e) {
  if (!is_invertible_scalar(e)) {
    throw std::domain_error("square root of this body is not expressible in the grammar: " + e.to_string());
  }
  const auto& [m, c] = *e.terms().begin();
  if (!c.is_real() || c.sign() <= 0) throw std::domain_error("square root requires a positive body");
  ScalarExpr r(sqrt(c));
  if (m.exp_arg) r *= exp(scale(*m.exp_arg, Number::rational(1, 2)));
  return r;
}

double max_abs_coefficient(const ScalarExpr& e) {
  double best = 0.0;
  for (const auto& [m, c] : e.terms()) best = std::max(best, abs(c));
  return best;
}

bool divide_polynomial(const ScalarExpr& numerator, const ScalarExpr& divisor, ScalarExpr* quotient) {
  if (!numerator.is_polynomial() || !divisor.is_polynomial() || divisor.is_zero()) return false;
  auto lex_greater = [](const Monomial& a, const Monomial& b) {
    std::size_t n = std::max(a.powers.size(), b.powers.size());
    for (std::size_t i = 0; i < n; ++i) {
      int pa = a.power(static_cast<int>(i)), pb = b.power(static_cast<int>(i));
      if (pa != pb) return pa > pb;
    }
    return false;
  };
  auto leading = [&](const ScalarExpr& p) {
    auto best = p.terms().begin();
    for (auto it = p.terms().begin(); it != p.terms().end(); ++it)
      if (lex_greater(it->first, best->first)) best = it;
    return best;
  };
  const auto lead_d = leading(divisor);
  ScalarExpr rem = numerator, q;
  int guard = 0;
  while (!rem.is_zero()) {
    if (++guard > 100000) return false;
    const auto lead_r = leading(rem);
    Monomial t;
    std::size_t n = std::max(lead_r->first.powers.size(), lead_d->first.powers.size());
    t.powers.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      int diff = lead_r->first.power(static_cast<int>(i)) - lead_d->first.power(static_cast<int>(i));
      if (diff < 0) return false;
      t.powers[i] = diff;
    }
    trim(t.powers);
    ScalarExpr term = term_expr(t, lead_r->second / lead_d->second);
    q += term;
    rem -= term * divisor;
  }
  *quotient = q;
  return true;
}

}  // namespace superloc
