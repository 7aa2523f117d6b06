#include "superloc/parse.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

namespace superloc {

namespace {

const std::set<std::string>& reserved() {
  static const std::set<std::string> kWords = {"i", "pi", "exp", "bump", "step", "bumpd", "stepd", "float"};
  return kWords;
}

class Parser {
 public:
  Parser(const std::string& text, const CoordinateNames& names) : s_(text), names_(names) {}

  SuperFunction parse() {
    SuperFunction f = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("", msg + " at position " + std::to_string(pos_) + " in \"" + s_ + "\"");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  SuperFunction expr() {
    SuperFunction f = term();
    for (;;) {
      if (accept('+')) {
        f += term();
      } else if (accept('-')) {
        f -= term();
      } else {
        return f;
      }
    }
  }

  SuperFunction term() {
    SuperFunction f = factor();
    for (;;) {
      if (accept('*')) {
        f = f * factor();
      } else if (accept('/')) {
        Number d = constant_of(factor(), "divisor");
        if (d.is_zero()) fail("division by zero");
        f = scale(f, Number(1) / d);
      } else {
        return f;
      }
    }
  }

  SuperFunction factor() {
    if (accept('-')) return -factor();
    SuperFunction base = atom();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer");
      base = pow(base, std::stoi(s_.substr(start, pos_ - start)));
    }
    return base;
  }

  Number constant_of(const SuperFunction& f, const char* what) {
    if (f.is_zero()) return Number(0);
    if (f.components().size() != 1 || f.components().begin()->first != 0 || !f.body().is_constant()) {
      fail(std::string(what) + " must be a constant");
    }
    return f.body().constant_term();
  }

  Rational rational_arg() {
    Number n = constant_of(expr(), "bound");
    if (!n.is_exact()) fail("bound must be an exact rational");
    return n.exact();
  }

  int integer_arg() {
    Rational r = rational_arg();
    if (boost::multiprecision::denominator(r) != 1 || r < 0) fail("order must be a non-negative integer");
    return static_cast<int>(boost::multiprecision::numerator(r));
  }

  Number number() {
    std::size_t start = pos_;
    boost::multiprecision::cpp_int mantissa = 0;
    int frac_digits = 0;
    bool any = false, dot = false;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        mantissa = mantissa * 10 + (c - '0');
        if (dot) ++frac_digits;
        any = true;
      } else if (c == '.' && !dot) {
        dot = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (!any) {
      pos_ = start;
      fail("malformed number");
    }
    long exponent = 0;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      int sign = 1;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) sign = s_[pos_++] == '-' ? -1 : 1;
      std::size_t digits = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (digits == pos_) {
        pos_ = save;
      } else {
        exponent = sign * std::stol(s_.substr(digits, pos_ - digits));
      }
    }
    exponent -= frac_digits;
    if (std::labs(exponent) > 4000) fail("exponent out of range");
    boost::multiprecision::cpp_int ten = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                    static_cast<unsigned>(std::labs(exponent)));
    return exponent >= 0 ? Number(Rational(mantissa * ten)) : Number(Rational(mantissa, ten));
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  ScalarExpr scalar_arg(const SuperFunction& f, const char* fn) {
    if (!f.soul().is_zero()) fail(std::string(fn) + " argument must not involve odd coordinates");
    return f.body();
  }

  SuperFunction atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      SuperFunction f = expr();
      expect(')');
      return f;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return SuperFunction(ScalarExpr(number()));
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail("unexpected '" + std::string(1, c) + "'");
    std::string id = identifier();
    skip();
    bool call = pos_ < s_.size() && s_[pos_] == '(';
    if (call) {
      ++pos_;
      SuperFunction result;
      if (id == "exp") {
        SuperFunction a = expr();
        if (!a.is_even()) fail("exp argument must be even");
        result = exp_even(a);
      } else if (id == "bump") {
        SuperFunction a = expr();
        if (!a.is_even()) fail("bump argument must be even");
        result = apply_special(SpecialKind::Bump, a);
      } else if (id == "step") {
        Rational lo = rational_arg();
        expect(',');
        Rational hi = rational_arg();
        expect(',');
        SuperFunction a = expr();
        if (!a.is_even()) fail("step argument must be even");
        if (!(lo < hi)) fail("step requires lo < hi");
        result = apply_special(SpecialKind::Step, a, lo, hi);
      } else if (id == "bumpd" || id == "stepd") {
        int k = integer_arg();
        expect(',');
        int j = integer_arg();
        expect(',');
        Rational lo = 0, hi = 0;
        SpecialKind kind = SpecialKind::Bump;
        if (id == "stepd") {
          kind = SpecialKind::Step;
          lo = rational_arg();
          expect(',');
          hi = rational_arg();
          expect(',');
        }
        ScalarExpr a = scalar_arg(expr(), id.c_str());
        try {
          result = SuperFunction(ScalarExpr::special(kind, a, k, j, lo, hi));
        } catch (const std::invalid_argument& e) {
          fail(e.what());
        }
      } else if (id == "float") {
        Number n = constant_of(expr(), "float argument");
        result = SuperFunction(ScalarExpr(Number(n.to_complex())));
      } else {
        fail("unknown function '" + id + "'");
      }
      expect(')');
      return result;
    }
    if (id == "i") return SuperFunction(ScalarExpr(Number::imaginary_unit()));
    if (id == "pi") return SuperFunction(ScalarExpr(Number(std::numbers::pi)));
    if (int a = names_.even_index(id); a >= 0) return SuperFunction::even_coordinate(a);
    if (int k = names_.odd_index(id); k >= 0) return SuperFunction::odd_coordinate(k);
    fail("unknown name '" + id + "'");
  }

  const std::string& s_;
  const CoordinateNames& names_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_reserved_name(const std::string& name) { return reserved().count(name) > 0; }

SuperFunction parse_expression(const std::string& text, const CoordinateNames& names) {
  return Parser(text, names).parse();
}

ScalarExpr parse_scalar(const std::string& text, const CoordinateNames& names) {
  SuperFunction f = parse_expression(text, names);
  if (!f.soul().is_zero()) throw ParseError("", "expected an expression without odd coordinates: \"" + text + "\"");
  return f.body();
}

}  // namespace superloc
