#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "superloc/calculus.hpp"
#include "superloc/parse.hpp"

using namespace superloc;

namespace {

SuperFunction P(const std::string& s, int m = 2, int n = 2) {
  return parse_expression(s, CoordinateNames::defaults(m, n));
}

SuperVectorField field(int m, int n, std::initializer_list<const char*> coeffs) {
  SuperVectorField v(m, n);
  int k = 0;
  for (const char* c : coeffs) v.coefficient(k++) = P(c, m, n);
  return v;
}

SuperVectorField dh_field() { return field(2, 2, {"th1", "th2", "-x2", "x1"}); }

// Polynomial of degree <= 2 in x1, x2 times odd monomials of the requested parity.
SuperFunction random_function(std::mt19937& rng, int parity, bool vanish_at_origin) {
  std::uniform_int_distribution<int> c(-2, 2);
  std::uniform_int_distribution<int> keep(0, 2);
  SuperFunction f;
  for (OddMask mask = 0; mask < 4; ++mask) {
    if (mask_size(mask) % 2 != parity) continue;
    ScalarExpr coeff;
    const ScalarExpr x = ScalarExpr::coordinate(0), y = ScalarExpr::coordinate(1);
    const ScalarExpr basis[] = {ScalarExpr(1), x, y, x * x, x * y, y * y};
    for (int b = 0; b < 6; ++b) {
      if (vanish_at_origin && mask == 0 && b == 0) continue;
      if (keep(rng) == 0) coeff += scale(basis[b], Number(c(rng)));
    }
    f += SuperFunction::monomial(mask, coeff);
  }
  return f;
}

SuperVectorField random_field(std::mt19937& rng, int parity, bool vanish_at_origin = false) {
  SuperVectorField v(2, 2);
  for (int k = 0; k < 4; ++k) v.coefficient(k) = random_function(rng, (parity + (k >= 2)) % 2, vanish_at_origin);
  return v;
}

QuadratureConfig quad() { return QuadratureConfig{}; }

CoordinateSubmanifold origin(int m, int n) {
  CoordinateSubmanifold s{m, n, {}, {}};
  for (int i = 0; i < m; ++i) s.normal_even.push_back(i);
  for (int a = 0; a < n; ++a) s.normal_odd.push_back(a);
  return s;
}

}  // namespace

TEST_CASE("vector fields act as derivations and brackets square") {
  SuperVectorField q = field(1, 1, {"th1", "0"});
  CHECK(apply_vf(q, P("x1", 1, 1)) == P("th1", 1, 1));
  CHECK(square(q).is_zero());
  CHECK(square(SuperVectorField(2, 1)).is_zero());

  SuperVectorField dh = dh_field();
  CHECK(dh.parity() == 1);
  CHECK(apply_vf(dh, P("-x2*th1 + x1*th2")) == P("x1^2 + x2^2 + 2*th1*th2"));
  CHECK(square(dh) == field(2, 2, {"-x2", "x1", "-th2", "th1"}));
}

TEST_CASE("super Jacobi identity on random fields") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int px = trial % 2, py = (trial / 2) % 2, pz = (trial / 4) % 2;
    auto x = random_field(rng, px), y = random_field(rng, py), z = random_field(rng, pz);
    SuperVectorField lhs = bracket(x, bracket(y, z));
    SuperVectorField rhs = bracket(bracket(x, y), z);
    SuperVectorField swap = bracket(y, bracket(x, z));
    rhs = (px * py) % 2 ? rhs - swap : rhs + swap;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("apply_vf is a graded derivation") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int pv = trial % 2, pf = (trial / 2) % 2;
    auto v = random_field(rng, pv);
    auto f = random_function(rng, pf, false), g = random_function(rng, trial % 3 == 0, false);
    SuperFunction lhs = apply_vf(v, f * g);
    SuperFunction rhs = apply_vf(v, f) * g;
    SuperFunction second = f * apply_vf(v, g);
    rhs = (pv * pf) % 2 ? rhs - second : rhs + second;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("Lie derivative of densities") {
  Density bump{1, 0, P("bump(x1)", 1, 0), 1};
  CHECK(lie_derivative_density(SuperVectorField::partial_even(1, 0, 0), bump).coefficient ==
        diff_even(P("bump(x1)", 1, 0), 0));

  SuperVectorField dh = dh_field();
  SuperFunction qsigma = apply_vf(dh, P("-x2*th1 + x1*th2"));
  Density mu{2, 2, exp_even(scale(qsigma, Number(Rational(-1, 2)))), 1};
  CHECK(mu.coefficient == P("exp(-(x1^2+x2^2)/2) - exp(-(x1^2+x2^2)/2)*th1*th2"));
  CHECK(lie_derivative_density(dh, mu).coefficient.is_zero());
}

TEST_CASE("Lie derivative satisfies the Leibniz rule over functions") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int pv = trial % 2, pg = (trial / 2) % 2;
    auto v = random_field(rng, pv);
    auto g = random_function(rng, pg, false);
    Density mu{2, 2, random_function(rng, trial % 3 == 1, false), 1};
    Density gmu = mu;
    gmu.coefficient = g * mu.coefficient;
    SuperFunction lhs = lie_derivative_density(v, gmu).coefficient;
    SuperFunction rhs = apply_vf(v, g) * mu.coefficient;
    SuperFunction second = g * lie_derivative_density(v, mu).coefficient;
    rhs = (pv * pg) % 2 ? rhs - second : rhs + second;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("integral of a Lie derivative vanishes") {
  std::mt19937 rng(5);
  const SuperFunction gauss = P("exp(-x1^2 - x2^2)");
  for (int trial = 0; trial < 20; ++trial) {
    auto v = random_field(rng, trial % 2);
    Density mu{2, 2, gauss * random_function(rng, trial % 3 == 0, false), 1};
    Complex value = berezin_integrate(lie_derivative_density(v, mu), quad());
    CHECK(std::abs(value) < 1e-9);
  }
}

TEST_CASE("Berezin integration examples") {
  CHECK(std::abs(berezin_integrate(Density{0, 2, P("1 + th1*th2", 0, 2), 1}, quad()) - 1.0) < 1e-15);
  Complex g = berezin_integrate(Density{1, 2, P("exp(-x1^2)*th1*th2", 1, 2), 1}, quad());
  CHECK(std::abs(g - std::sqrt(std::numbers::pi)) < 1e-12);
  Complex flipped = berezin_integrate(Density{1, 2, P("exp(-x1^2)*th1*th2", 1, 2), -1}, quad());
  CHECK(std::abs(flipped + std::sqrt(std::numbers::pi)) < 1e-12);

  Density golden{2, 2, P("exp(-(x1^2+x2^2)/2)*(1 - th1*th2)"), 1};
  CHECK(std::abs(berezin_integrate(golden, quad()) + 2 * std::numbers::pi) < 1e-10);

  CHECK_THROWS_AS(berezin_integrate(Density{1, 1, P("x2*th1", 2, 1), 1}, quad()), std::invalid_argument);
}

TEST_CASE("Berezin integral is invariant under coordinate changes") {
  // phi: x -> x + th1*th2*(a, b), theta -> M theta; Ber(D phi) = 1 / det M.
  std::mt19937 rng(13);
  std::uniform_int_distribution<int> c(-2, 2);
  const SuperFunction gauss = P("exp(-x1^2 - x2^2 + x1/2)");
  for (int trial = 0; trial < 10; ++trial) {
    int m00, m01, m10, m11;
    do {
      m00 = c(rng), m01 = c(rng), m10 = c(rng), m11 = c(rng);
    } while (m00 * m11 - m01 * m10 == 0);
    const int det = m00 * m11 - m01 * m10;
    const SuperFunction th1 = P("th1"), th2 = P("th2"), x1 = P("x1"), x2 = P("x2");
    std::vector<SuperFunction> even = {x1 + scale(th1 * th2, Number(c(rng))), x2 + scale(th1 * th2, Number(c(rng)))};
    std::vector<SuperFunction> odd = {scale(th1, Number(m00)) + scale(th2, Number(m01)),
                                      scale(th1, Number(m10)) + scale(th2, Number(m11))};
    SuperFunction f = gauss * random_function(rng, 0, false);
    Density mu{2, 2, f, 1};
    Density pulled{2, 2, scale(pullback(f, even, odd), Number::rational(1, det)), 1};
    Complex a = berezin_integrate(mu, quad()), b = berezin_integrate(pulled, quad());
    CHECK(std::abs(a - b) < 1e-9 * (1 + std::abs(a)));
  }
}

TEST_CASE("Hessian at a critical coordinate submanifold") {
  SuperMatrix h1 = hessian_at(P("x1^2", 1, 0), origin(1, 0));
  CHECK(h1(0, 0) == SuperFunction(2));

  SuperMatrix h2 = hessian_at(P("th1*th2", 0, 2), origin(0, 2));
  CHECK(h2(0, 1) == SuperFunction(-1));
  CHECK(h2(1, 0) == SuperFunction(1));
  CHECK(h2(0, 0).is_zero());

  SuperMatrix h = hessian_at(P("x1^2 + x2^2 + 2*th1*th2"), origin(2, 2));
  CHECK(h.A() == DenseMatrix<SuperFunction>::identity(2).map([](const SuperFunction& e) { return e * SuperFunction(2); }));
  CHECK(h(2, 3) == SuperFunction(-2));
  CHECK(h(3, 2) == SuperFunction(2));
  CHECK(h.B() == DenseMatrix<SuperFunction>(2, 2));

  CHECK_THROWS_AS(hessian_at(P("x1", 1, 0), origin(1, 0)), std::domain_error);
}

TEST_CASE("Hessian is super-symmetric and tangentially trivial") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    // even S vanishing to second order at the origin: products of vanishing functions
    SuperFunction a = random_function(rng, trial % 2, true), b = random_function(rng, trial % 2, true);
    SuperFunction s = a * b + random_function(rng, 0, true) * random_function(rng, 0, true);
    SuperMatrix h = hessian_at(s, origin(2, 2));
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col) {
        const bool sign = r >= 2 && col >= 2;
        CHECK(h(r, col) == (sign ? -h(col, r) : h(col, r)));
      }
  }
  // N = {x2 = 0, th2 = 0}; the second derivatives involving tangential directions vanish on N.
  CoordinateSubmanifold n{2, 2, {1}, {1}};
  SuperFunction s = P("x2^2*exp(x1) + x2*th2*th1 + 3*th1*th2*x2^2");
  SuperMatrix h = hessian_at(s, n);
  CHECK(h(0, 0) == P("2*exp(x1)"));
  for (int t : {0, 2})
    for (int k = 0; k < 4; ++k)
      CHECK(restrict_to(diff_coordinate(diff_coordinate(s, 2, k), 2, t), n).is_zero());
}

TEST_CASE("linearization of a vector field along its zero locus") {
  SuperMatrix l11 = linearize_at(field(1, 1, {"th1", "x1"}), origin(1, 1));
  CHECK(l11(0, 1) == SuperFunction(1));
  CHECK(l11(1, 0) == SuperFunction(-1));

  SuperMatrix l = linearize_at(dh_field(), origin(2, 2));
  CHECK(l.parity() == 1);
  CHECK(l.B() == DenseMatrix<SuperFunction>::identity(2));
  CHECK(l(2, 1) == SuperFunction(1));
  CHECK(l(3, 0) == SuperFunction(-1));
  CHECK(l(2, 0).is_zero());
  CHECK(berezinian_odd(l).coefficient == SuperFunction(1));

  CHECK_THROWS_AS(linearize_at(field(1, 1, {"th1", "1"}), origin(1, 1)), std::domain_error);
}

TEST_CASE("linearization of Q squared is the square of the linearization") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    SuperVectorField q = random_field(rng, 1, true);
    SuperMatrix l = linearize_at(q, origin(2, 2));
    CHECK(l * l == linearize_at(square(q), origin(2, 2)));
  }
  SuperMatrix l = linearize_at(dh_field(), origin(2, 2));
  CHECK(l * l == linearize_at(square(dh_field()), origin(2, 2)));
}

TEST_CASE("vanishing locus classification") {
  VanishingLocusReport dh = vanishing_locus(dh_field(), nullptr);
  CHECK(dh.is_coordinate_locus());
  CHECK(dh.locus.normal_even == std::vector<int>{0, 1});
  CHECK(dh.locus.normal_odd == std::vector<int>{0, 1});
  CHECK(dh.nondegenerate);
  CHECK(dh.ber_l_iprime == SuperFunction(1));

  VanishingLocusReport deg = vanishing_locus(field(1, 1, {"th1", "0"}), nullptr);
  CHECK(deg.is_coordinate_locus());
  CHECK(deg.locus.codim_even() == 0);
  CHECK(deg.locus.codim_odd() == 1);
  CHECK_FALSE(deg.nondegenerate);

  VanishingLocusReport zero = vanishing_locus(SuperVectorField(2, 2), nullptr);
  CHECK(zero.locus.codim_even() == 0);
  CHECK(zero.locus.codim_odd() == 0);
  CHECK(zero.nondegenerate);

  // quadratic vanishing: right locus, but the linearization is zero
  VanishingLocusReport flat = vanishing_locus(field(1, 1, {"x1*th1", "x1^2"}), nullptr);
  CHECK_FALSE(flat.nondegenerate);

  CoordinateSubmanifold wrong{2, 2, {0}, {0}};
  VanishingLocusReport bad = vanishing_locus(dh_field(), &wrong);
  CHECK_FALSE(bad.generators_in_ideal);
}
