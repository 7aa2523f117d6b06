#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "superloc/expr_format.hpp"
#include "superloc/parse.hpp"
#include "superloc/super_function.hpp"

using namespace superloc;

namespace {

const CoordinateNames kNames = CoordinateNames::defaults(3, 6);

SuperFunction P(const std::string& s) { return parse_expression(s, kNames); }
ScalarExpr S(const std::string& s) { return parse_scalar(s, kNames); }

SuperFunction th(int k) { return SuperFunction::odd_coordinate(k - 1); }

// Random homogeneous element with small rational polynomial coefficients.
SuperFunction random_homogeneous(std::mt19937& rng, int n, int parity) {
  std::uniform_int_distribution<int> coeff(-3, 3), power(0, 2), keep(0, 2);
  SuperFunction f;
  for (OddMask mask = 0; mask < (OddMask{1} << n); ++mask) {
    if (mask_size(mask) % 2 != parity || keep(rng) != 0) continue;
    ScalarExpr c = ScalarExpr(coeff(rng)) + scale(pow(ScalarExpr::coordinate(0), power(rng)), Number(coeff(rng)));
    f += SuperFunction::monomial(mask, c);
  }
  return f;
}

}  // namespace

TEST_CASE("eval_scalar examples") {
  std::vector<double> p{1.0, 2.0};
  CHECK(eval_scalar(S("x1^2+x2^2"), p).real() == doctest::Approx(5.0));
  std::vector<double> o{0.0, 0.0};
  CHECK(eval_scalar(S("exp(-0)"), o).real() == 1.0);
  std::vector<double> q{1.0, 1.0};
  CHECK(eval_scalar(S("exp(-(x1^2+x2^2)/2)"), q).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  std::vector<double> short_point{1.0};
  CHECK_THROWS_AS(eval_scalar(S("x1*x2"), short_point), std::invalid_argument);
}

TEST_CASE("diff_scalar examples") {
  CHECK(diff_scalar(S("x1^2"), 0) == S("2*x1"));
  CHECK(diff_scalar(S("x1^2"), 1).is_zero());
  std::vector<double> at{0.5};
  double d = eval_scalar(diff_scalar(S("exp(-x1^2)"), 0), at).real();
  auto f = [](double x) { return std::exp(-x * x); };
  double h = 1e-5;
  CHECK(d == doctest::Approx((f(0.5 + h) - f(0.5 - h)) / (2 * h)).epsilon(1e-8));
  CHECK(d == doctest::Approx(-0.778801).epsilon(1e-6));
  CHECK_THROWS(diff_scalar(S("x1"), -1));
}

TEST_CASE("diff_scalar matches central differences on polynomial times Gaussian") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> c(-4, 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ScalarExpr x = ScalarExpr::coordinate(0), y = ScalarExpr::coordinate(1);
    ScalarExpr poly = ScalarExpr(c(rng)) + scale(x, Number(c(rng))) + scale(x * y, Number(c(rng))) +
                      scale(pow(y, 3), Number(c(rng)));
    ScalarExpr e = poly * exp(scale(x * x + y * y, Number::rational(-1, 2)) + scale(x, Number(c(rng))));
    std::vector<double> p{u(rng), u(rng)};
    for (int axis = 0; axis < 2; ++axis) {
      double h = 1e-5;
      std::vector<double> a = p, b = p;
      a[axis] += h;
      b[axis] -= h;
      double fd = (eval_scalar(e, a).real() - eval_scalar(e, b).real()) / (2 * h);
      double exact = eval_scalar(diff_scalar(e, axis), p).real();
      CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("special primitives") {
  std::vector<double> zero{0.0};
  CHECK(ScalarExpr::bump(ScalarExpr(0)) == ScalarExpr(1));
  CHECK(ScalarExpr::bump(ScalarExpr(2)).is_zero());
  CHECK(eval_scalar(S("bump(x1)"), zero).real() == 1.0);
  std::vector<double> out{1.5};
  CHECK(eval_scalar(S("bump(x1)"), out).real() == 0.0);
  CHECK(eval_scalar(S("step(1,4,x1)"), zero).real() == 1.0);
  std::vector<double> mid{2.5};
  CHECK(eval_scalar(S("step(1,4,x1)"), mid).real() == doctest::Approx(0.5));

  // Derivatives of both primitives agree with central differences.
  for (const char* text : {"bump(x1)", "step(1,4,x1)", "bump(x1^2/2)"}) {
    ScalarExpr e = S(text);
    ScalarExpr d1 = diff_scalar(e, 0);
    ScalarExpr d2 = diff_scalar(d1, 0);
    for (double x : {-0.7, 0.3, 1.3, 2.2, 3.1}) {
      double h = 1e-5;
      std::vector<double> p{x}, a{x + h}, b{x - h};
      double fd1 = (eval_scalar(e, a).real() - eval_scalar(e, b).real()) / (2 * h);
      double fd2 = (eval_scalar(d1, a).real() - eval_scalar(d1, b).real()) / (2 * h);
      CHECK(eval_scalar(d1, p).real() == doctest::Approx(fd1).epsilon(1e-6).scale(1.0));
      CHECK(eval_scalar(d2, p).real() == doctest::Approx(fd2).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("special factors absorb multiples of their argument") {
  ScalarExpr u = S("x1^2+x2^2");
  ScalarExpr s = ScalarExpr::special(SpecialKind::Step, u, 1, 1, 1, 4);
  // u * h'(u) u^{-1} = h'(u)
  CHECK(u * s == ScalarExpr::special(SpecialKind::Step, u, 1, 0, 1, 4));
  CHECK(u * s - ScalarExpr::special(SpecialKind::Step, u, 1, 0, 1, 4) == ScalarExpr());
  CHECK_THROWS_AS(ScalarExpr::special(SpecialKind::Bump, u, 1, 1), std::invalid_argument);
}

TEST_CASE("multiply examples") {
  CHECK(th(1) * th(2) == P("th1*th2"));
  CHECK(th(2) * th(1) == -P("th1*th2"));
  CHECK((th(1) * th(1)).is_zero());
  CHECK(koszul_sign(0b10, 0b01) == -1);
  CHECK(koszul_sign(0b101, 0b010) == -1);
  CHECK(koszul_sign(0b011, 0b100) == 1);
}

TEST_CASE("partial derivative examples") {
  CHECK(diff_odd(P("th1*th2"), 0) == th(2));
  CHECK(diff_odd(P("th1*th2"), 1) == -th(1));
  CHECK(diff_even(P("x1*th1"), 0) == th(1));
  CHECK_THROWS(diff_odd(th(1), 40));
}

TEST_CASE("sqrt_positive examples") {
  CHECK(sqrt_positive(SuperFunction(4)) == SuperFunction(2));
  CHECK(sqrt_positive(P("1+th1*th2")) == P("1 + 1/2*th1*th2"));
  SuperFunction f = P("4 + th1*th2 + th3*th4");
  SuperFunction r = sqrt_positive(f);
  CHECK(r * r == f);
  SuperFunction g = P("2*exp(-x1^2) + x1*th1*th2 + th1*th3 - th2*th3*th4*th5");
  SuperFunction rg = sqrt_positive(g);
  CHECK(max_abs_coefficient(rg * rg - g) < 1e-14);
  SuperFunction h = P("9*exp(-x1^2) + x1*th1*th2 + th1*th3 - th2*th3*th4*th5");
  SuperFunction rh = sqrt_positive(h);
  CHECK(rh.is_exact());
  CHECK(rh * rh == h);
  CHECK_THROWS(sqrt_positive(th(1)));
  CHECK_THROWS(sqrt_positive(SuperFunction(-4)));
  for (int c : {1, 9, 25}) CHECK(sqrt_positive(SuperFunction(c * c)) == SuperFunction(c));
}

TEST_CASE("exp_even examples") {
  CHECK(exp_even(P("th1*th2")) == P("1 + th1*th2"));
  CHECK(exp_even(P("x1 + th1*th2")) == P("exp(x1)*(1+th1*th2)"));
  CHECK(exp_even(P("th1*th2+th3*th4")) == P("1+th1*th2+th3*th4+th1*th2*th3*th4"));
  SuperFunction f = P("3 + th1*th2 - 2*th1*th3 + x1*th2*th4 + th3*th4*th5*th6");
  CHECK(exp_even(f) * exp_even(-f) == SuperFunction(1));
  CHECK_THROWS(exp_even(th(1)));
}

TEST_CASE("inverse_even") {
  SuperFunction f = P("2*exp(x1) + th1*th2 + x2*th3*th4");
  CHECK(f * inverse_even(f) == SuperFunction(1));
  CHECK_THROWS(inverse_even(P("x1 + th1*th2")));
}

TEST_CASE("Koszul supercommutativity and associativity on random elements") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 1 + trial % 6;
    int pf = trial % 2, pg = (trial / 2) % 2, ph = (trial / 3) % 2;
    SuperFunction f = random_homogeneous(rng, n, pf);
    SuperFunction g = random_homogeneous(rng, n, pg);
    SuperFunction h = random_homogeneous(rng, n, ph);
    SuperFunction gf = g * f;
    CHECK(f * g == ((pf * pg) % 2 ? -gf : gf));
    CHECK((f * g) * h == f * (g * h));
  }
}

TEST_CASE("Leibniz rule and anticommuting odd derivatives") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 4;
    int pf = trial % 2;
    SuperFunction f = random_homogeneous(rng, n, pf);
    SuperFunction g = random_homogeneous(rng, n, (trial / 2) % 2);
    for (int k = 0; k < n; ++k) {
      SuperFunction lhs = diff_odd(f * g, k);
      SuperFunction rhs = diff_odd(f, k) * g + (pf ? -(f * diff_odd(g, k)) : f * diff_odd(g, k));
      CHECK(lhs == rhs);
      CHECK(diff_odd(diff_odd(f, k), k).is_zero());
      for (int j = 0; j < n; ++j) CHECK(diff_odd(diff_odd(f, k), j) == -diff_odd(diff_odd(f, j), k));
    }
    CHECK(diff_even(f * g, 0) == diff_even(f, 0) * g + f * diff_even(g, 0));
  }
}

TEST_CASE("pullback substitutes simultaneously") {
  // x1 -> x1 + th1*th2, th1 -> th2, th2 -> th1
  std::vector<SuperFunction> even{P("x1 + th1*th2")};
  std::vector<SuperFunction> odd{th(2), th(1)};
  CHECK(pullback(P("x1^2"), even, odd) == P("x1^2 + 2*x1*th1*th2"));
  CHECK(pullback(P("th1*th2"), even, odd) == -P("th1*th2"));
  CHECK(pullback(P("exp(x1)"), even, odd) == P("exp(x1)*(1 + th1*th2)"));
}

TEST_CASE("serialization round-trips") {
  std::vector<std::string> samples = {
      "exp(-(x1^2+x2^2)/2)*(1 + th1*th2)",
      "x1^2 - 3/4*x2*th1*th3 + float(0.1)",
      "(float(1.5) + 2*i)*x1*th2",
      "step(1,4,x1^2+x2^2) - 2*stepd(1,1,1,4,x1^2+x2^2)*th1*th2",
      "bump(x1) + bumpd(2,0,x2)",
      "exp(i*x1^2)*x2",
      "0",
  };
  for (const auto& s : samples) {
    SuperFunction f = P(s);
    std::string text = format_super(f, kNames);
    CHECK_MESSAGE(P(text) == f, text);
  }
  CHECK(P("0.25") == P("1/4"));
  CHECK(P("1e-3") == P("1/1000"));
  CHECK_FALSE(P("float(0.5)") == P("1/2"));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(P("x1 +"), ParseError);
  CHECK_THROWS_AS(P("x1 / x2"), ParseError);
  CHECK_THROWS_AS(P("y"), ParseError);
  CHECK_THROWS_AS(P("exp(th1)"), ParseError);
  CHECK_THROWS_AS(P("x1^-1"), ParseError);
  CHECK_THROWS_AS(P("stepd(1,1,0,4,x1)"), ParseError);
  CHECK_THROWS_AS(parse_scalar("th1", kNames), ParseError);
}
