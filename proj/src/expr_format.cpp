#include "superloc/expr_format.hpp"

#include <cstdio>

namespace superloc {

namespace {

std::string float_literal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string rational_text(const Rational& r) {
  Number n(r);
  return n.to_string();
}

std::string special_text(const SpecialFactor& s, const CoordinateNames& names) {
  std::string arg = format_scalar(s.argument(), names);
  bool plain = s.order == 0 && s.inv_power == 0;
  std::string order = std::to_string(s.order) + "," + std::to_string(s.inv_power) + ",";
  if (s.kind == SpecialKind::Bump) return plain ? "bump(" + arg + ")" : "bumpd(" + order + arg + ")";
  std::string bounds = rational_text(s.lo) + "," + rational_text(s.hi) + ",";
  return plain ? "step(" + bounds + arg + ")" : "stepd(" + order + bounds + arg + ")";
}

std::string monomial_text(const Monomial& m, const CoordinateNames& names) {
  std::string out;
  auto append = [&out](const std::string& f) {
    if (!out.empty()) out += "*";
    out += f;
  };
  for (int a = 0; a < static_cast<int>(m.powers.size()); ++a) {
    if (m.powers[a] == 0) continue;
    std::string name = a < static_cast<int>(names.even.size()) ? names.even[a] : "x" + std::to_string(a + 1);
    append(m.powers[a] == 1 ? name : name + "^" + std::to_string(m.powers[a]));
  }
  if (m.exp_arg) append("exp(" + format_scalar(*m.exp_arg, names) + ")");
  for (const auto& s : m.specials) append(special_text(s, names));
  return out;
}

}  // namespace

CoordinateNames CoordinateNames::defaults(int m, int n) {
  CoordinateNames names;
  for (int i = 1; i <= m; ++i) names.even.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.odd.push_back("th" + std::to_string(i));
  return names;
}

int CoordinateNames::even_index(const std::string& name) const {
  for (std::size_t i = 0; i < even.size(); ++i)
    if (even[i] == name) return static_cast<int>(i);
  return -1;
}

int CoordinateNames::odd_index(const std::string& name) const {
  for (std::size_t i = 0; i < odd.size(); ++i)
    if (odd[i] == name) return static_cast<int>(i);
  return -1;
}

std::string format_number(const Number& c) {
  if (c.is_exact()) return c.to_string();
  Complex z = c.to_complex();
  if (z.imag() == 0.0) return "float(" + float_literal(z.real()) + ")";
  return "(float(" + float_literal(z.real()) + ") + " + float_literal(z.imag()) + "*i)";
}

std::string format_scalar(const ScalarExpr& e, const CoordinateNames& names) {
  if (e.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : e.terms()) {
    Number coeff = c;
    bool negative = c.is_real() && c.sign() < 0;
    if (negative) coeff = -c;
    if (first) {
      out += negative ? "-" : "";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    std::string factors = monomial_text(m, names);
    if (factors.empty()) {
      out += format_number(coeff);
    } else if (coeff.is_one() && coeff.is_exact()) {
      out += factors;
    } else {
      out += format_number(coeff) + "*" + factors;
    }
  }
  return out;
}

std::string format_super(const SuperFunction& f, const CoordinateNames& names) {
  if (f.is_zero()) return "0";
  std::string out;
  for (const auto& [mask, coeff] : f.components()) {
    std::string odd;
    for (int k = 0; k < 32; ++k) {
      if (!(mask & (OddMask{1} << k))) continue;
      odd += "*" + (k < static_cast<int>(names.odd.size()) ? names.odd[k] : "th" + std::to_string(k + 1));
    }
    std::string scalar = format_scalar(coeff, names);
    std::string piece;
    if (odd.empty()) {
      piece = coeff.terms().size() == 1 ? scalar : "(" + scalar + ")";
    } else if (coeff == ScalarExpr(1)) {
      piece = odd.substr(1);
    } else if (coeff == ScalarExpr(-1)) {
      piece = "-" + odd.substr(1);
    } else if (coeff.terms().size() == 1 && scalar.find(' ') == std::string::npos) {
      piece = scalar + odd;
    } else {
      piece = "(" + scalar + ")" + odd;
    }
    if (out.empty()) out = piece;
    else if (piece[0] == '-') out += " - " + piece.substr(1);
    else out += " + " + piece;
  }
  return out;
}

}  // namespace superloc
