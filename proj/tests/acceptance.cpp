// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "superloc/localization.hpp"
#include "superloc/morse.hpp"
#include "superloc/parse.hpp"
#include "superloc/scenario_io.hpp"

using namespace superloc;

namespace {

constexpr double kPi = std::numbers::pi;
std::string g_scenarios;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Scenario load_one(const std::string& file) {
  auto all = load_scenarios(g_scenarios + "/" + file);
  if (all.size() != 1) throw std::runtime_error(file + ": expected one scenario");
  return all.front();
}

// ---- independent oracles ----

double bump_value(double u) { return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; }

// composite Simpson for f on [a, b]
Complex simpson(const std::function<Complex(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  Complex sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

// -integral of exp(-(x^2+y^2)/2) on [-12, 12]^2, trapezoid: the top coefficient of the golden density
double golden_oracle() {
  const int n = 2400;
  const double h = 24.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -12.0 + i * h;
    s += (i == 0 || i == n ? 0.5 : 1.0) * std::exp(-x * x / 2);
  }
  return -(s * h) * (s * h);
}

// integral over R of f(x) exp(i lambda x^2) through the library
Complex oscillatory_1d(const std::string& amplitude, double lambda, double lo, double hi) {
  const CoordinateNames names = CoordinateNames::defaults(1, 0);
  Density mu{1, 0, parse_expression(amplitude, names), 1};
  mu.coefficient = mu.coefficient * exp_even(scale(parse_expression("x1^2", names), Number(Complex(0.0, lambda))));
  QuadratureConfig config;
  config.kind = QuadratureConfig::Kind::Box;
  config.box = {{lo, hi}};
  config.tol = 1e-11;
  return berezin_integrate(mu, config);
}

// ---- criteria ----

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = load_one("golden.json");
  const Complex direct = berezin_integrate(sc.mu, sc.quadrature);
  const LocalizationResult loc = localization_rhs(sc, build_sigma(sc));
  const double elapsed = seconds_since(t0);
  const double oracle = golden_oracle();
  const double rel = std::abs(direct - loc.value) / std::abs(direct);
  const double orc = std::abs(direct - oracle) / std::abs(oracle);
  const bool ok = rel <= 1e-6 && orc <= 1e-6 && std::abs(std::abs(direct) - 2 * kPi) <= 1e-6 && elapsed < 5.0;
  return {ok, "direct=" + fmt("%.10f", direct.real()) + " rhs=" + fmt("%.10f", loc.value.real()) +
                  " rel=" + fmt("%.2e", rel) + " oracle_rel=" + fmt("%.2e", orc) + " time=" + fmt("%.2fs", elapsed)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = load_one("golden.json");
  const SuperFunction sigma = build_sigma(sc);
  const Complex z0 = z_lambda(sc, sigma, 0.0);
  double worst = 0.0;
  for (double lambda : {0.0, 1.0, 10.0, 100.0})
    worst = std::max(worst, std::abs(z_lambda(sc, sigma, lambda) - z0) / std::abs(z0));
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-5 && elapsed < 30.0, "max |Z-Z0|/|Z0|=" + fmt("%.2e", worst) + " time=" + fmt("%.2fs", elapsed)};
}

Outcome criterion3() {
  const std::vector<double> grid = {50, 100, 200, 400};
  std::vector<double> remainders;
  double oracle_gap = 0.0;
  const CoordinateSubmanifold origin{1, 0, {0}, {}};
  const Density mu{1, 0, parse_expression("bump(x1)", CoordinateNames::defaults(1, 0)), 1};
  const SuperFunction s = parse_expression("x1^2", CoordinateNames::defaults(1, 0));
  std::string detail;
  for (double lambda : grid) {
    const Complex z = oscillatory_1d("bump(x1)", lambda, -1.0, 1.0);
    const Complex ref =
        simpson([&](double x) { return bump_value(x) * std::exp(Complex(0.0, lambda * x * x)); }, -1.0, 1.0, 400000);
    oracle_gap = std::max(oracle_gap, std::abs(z - ref));
    QuadratureConfig config;
    const Complex lead = stationary_phase_rhs(mu, s, origin, lambda, config).value;
    remainders.push_back(std::abs(z - lead));
    detail += fmt("%.3g", remainders.back()) + " ";
  }
  const auto slope = log_log_slope(grid, remainders);
  const bool ok = slope && *slope <= -1.4 && oracle_gap <= 1e-9;
  return {ok, "remainders=" + detail + "slope=" + fmt("%.3f", slope.value_or(NAN)) +
                  " simpson_gap=" + fmt("%.1e", oracle_gap)};
}

Outcome criterion4() {
  // supp mu = (3/4, 5/4), away from the critical point x = 0 of S = x^2
  const std::vector<double> grid = {50, 100, 200, 400};
  std::vector<double> values;
  double oracle_rel = 0.0;
  std::string detail;
  for (double lambda : grid) {
    const Complex z = oscillatory_1d("bump(4*(x1 - 1))", lambda, 0.75, 1.25);
    const Complex ref = simpson(
        [&](double x) { return bump_value(4 * (x - 1)) * std::exp(Complex(0.0, lambda * x * x)); }, 0.75, 1.25, 200000);
    oracle_rel = std::max(oracle_rel, std::abs(z - ref) / std::abs(ref));
    values.push_back(std::abs(z));
    detail += fmt("%.3g", values.back()) + " ";
  }
  const auto slope = log_log_slope(grid, values);
  const bool ok = slope && *slope <= -2.0 && oracle_rel <= 1e-6;
  return {ok, "|Z|=" + detail + "slope=" + fmt("%.3f", slope.value_or(NAN)) + " simpson_rel=" + fmt("%.1e", oracle_rel)};
}

SuperFunction random_element(std::mt19937& rng, int parity, bool with_body, int n = 4) {
  std::uniform_int_distribution<int> c(-3, 3), keep(0, 1);
  SuperFunction f;
  for (OddMask mask = 0; mask < (OddMask{1} << n); ++mask) {
    if (mask_size(mask) % 2 != parity) continue;
    if (mask == 0 && !with_body) continue;
    if (mask != 0 && keep(rng)) continue;
    f += SuperFunction::monomial(mask, ScalarExpr(c(rng)));
  }
  return f;
}

SuperMatrix random_even_2_2(std::mt19937& rng) {
  for (;;) {
    SuperMatrix f(2, 2, 2, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) f(i, j) = random_element(rng, (i < 2) == (j < 2) ? 0 : 1, true);
    auto body_det = [](const DenseMatrix<SuperFunction>& m) {
      return determinant(m.map([](const SuperFunction& e) { return e.body().constant_term().exact(); }));
    };
    if (body_det(f.A()) != 0 && body_det(f.D()) != 0) return f;
  }
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(5);
  int failures = 0, checks = 0;
  auto expect = [&](bool b) {
    ++checks;
    failures += !b;
  };

  for (int trial = 0; trial < 100; ++trial) {
    const SuperMatrix f = random_even_2_2(rng), g = random_even_2_2(rng);
    const SuperFunction bf = berezinian_even(f), bg = berezinian_even(g);
    expect(berezinian_even(f * g) == bf * bg);
    expect(berezinian_even(supertranspose(f)) == bf);
    expect(bf.is_exact());
  }

  std::uniform_int_distribution<int> c(-5, 5);
  for (int n : {4, 6})
    for (int trial = 0; trial < 10; ++trial) {
      DenseMatrix<Rational> a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          a(i, j) = c(rng);
          a(j, i) = -a(i, j);
        }
      const Rational pf = pfaffian(a);
      expect(pf * pf == determinant(a));
    }

  const Rational squares[] = {1, 4, 9, Rational(1, 4), Rational(9, 16)};
  for (int trial = 0; trial < 20; ++trial) {
    SuperFunction f = random_element(rng, 0, false);
    f += SuperFunction(ScalarExpr(Number(squares[trial % 5])));
    const SuperFunction r = sqrt_positive(f);
    expect(r.is_exact() && r * r == f);
  }

  const CoordinateNames names = CoordinateNames::defaults(2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const int pf = trial % 2, pg = (trial / 2) % 2;
    SuperFunction f = random_element(rng, pf, pf == 0) * parse_expression("1 + x1 - x1*x2^2", names);
    SuperFunction g = random_element(rng, pg, pg == 0) * parse_expression("x2 + 2*x1^2", names);
    for (int k = 0; k < 4; ++k) {
      const SuperFunction rhs = diff_odd(f, k) * g + (pf ? -(f * diff_odd(g, k)) : f * diff_odd(g, k));
      expect(diff_odd(f * g, k) == rhs);
    }
    for (int a = 0; a < 2; ++a) expect(diff_even(f * g, a) == diff_even(f, a) * g + f * diff_even(g, a));
  }
  const double elapsed = seconds_since(t0);
  return {failures == 0 && elapsed < 10.0,
          std::to_string(checks - failures) + "/" + std::to_string(checks) + " exact checks, time=" + fmt("%.2fs", elapsed)};
}

Outcome criterion6() {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> c(-3, 3), pick(0, 3);
  const int m = 2, n = 4;
  const CoordinateNames names = CoordinateNames::defaults(m, n);
  CoordinateSubmanifold origin{m, n, {0, 1}, {0, 1, 2, 3}};
  const SuperFunction standard = parse_expression("x1^2 - x2^2 + th1*th2 + th3*th4", names);
  const SuperFunction x[2] = {SuperFunction::even_coordinate(0), SuperFunction::even_coordinate(1)};
  int done = 0, good = 0, skipped = 0;
  std::string first_failure;
  while (done < 20) {
    SuperFunction pert;
    for (OddMask mask = 0; mask < 16; ++mask) {
      if (mask_size(mask) == 2 && pick(rng) == 0) pert += SuperFunction::monomial(mask, ScalarExpr(c(rng)));
      if (mask_size(mask) == 2)
        for (int a = 0; a < 2; ++a)
          for (int b = a; b < 2; ++b)
            if (pick(rng) == 0) pert += scale(x[a] * x[b] * SuperFunction::monomial(mask, ScalarExpr(1)), Number(c(rng)));
      if (mask_size(mask) == 4 && pick(rng) == 0) pert += SuperFunction::monomial(mask, ScalarExpr(c(rng)));
    }
    const SuperFunction s = standard + pert;
    // a perturbation that makes the odd Hessian singular is not a Morse perturbation
    const SuperMatrix h = hessian_at(s, origin);
    const DenseMatrix<SuperFunction> hd = h.D();
    if (pfaffian(hd.map([](const SuperFunction& e) { return e.body().constant_term().exact(); })) == 0) {
      ++skipped;
      continue;
    }
    ++done;
    try {
      const MorseNormalForm nf = normalize_jet(s, origin, 3);
      const bool ok = nf.odd_sector_standard && nf.odd_residual.is_zero() && nf.normalized == nf.standard &&
                      nf.change.pull(s) == nf.normalized;
      good += ok;
      if (!ok && first_failure.empty()) first_failure = format_super(s, names);
    } catch (const std::exception& e) {
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  return {good == 20, std::to_string(good) + "/20 normalized exactly (" + std::to_string(skipped) +
                          " degenerate draws skipped)" + (first_failure.empty() ? "" : "; first failure: " + first_failure)};
}

Outcome criterion7() {
  const Scenario sc = load_one("golden.json");
  const LocalizationResult loc = localization_rhs(sc, build_sigma(sc), false);
  std::string detail;
  bool ok = loc.identities.size() == 5;
  for (const auto& c : loc.identities) {
    ok = ok && c.holds && c.residual == 0.0;
    detail += c.key.substr(c.key.find('.') + 1) + (c.holds ? "=ok " : "=FAILED ");
  }
  return {ok, detail + "(l=" + std::to_string(loc.l) + ", o=" + std::to_string(loc.o) + ")"};
}

Outcome criterion8() {
  const Scenario sc = load_one("golden.json");
  const SuperFunction sigma = build_sigma(sc);
  const SuperFunction g0 = build_invariant_cutoff(sc, sigma, 1, 2);
  const bool closed = apply_vf(sc.q, g0).is_zero();
  const Complex plain = berezin_integrate(sc.mu, sc.quadrature);
  Density cut = sc.mu;
  cut.coefficient = sc.mu.coefficient * g0;
  QuadratureConfig config;
  config.kind = QuadratureConfig::Kind::Box;
  config.box = {{-2.0, 2.0}, {-2.0, 2.0}};
  config.tol = 1e-9;
  const Complex with_cut = berezin_integrate(cut, config);
  const double rel = std::abs(with_cut - plain) / std::abs(plain);
  return {closed && rel <= 1e-6, std::string("Q g0 = 0: ") + (closed ? "yes" : "no") + " int(mu g0)=" +
                                     fmt("%.10f", with_cut.real()) + " rel=" + fmt("%.2e", rel)};
}

Outcome criterion9() {
  const Scenario sc = load_one("product.json");
  const Scenario golden = load_one("golden.json");
  const Complex direct = berezin_integrate(sc.mu, sc.quadrature);
  const LocalizationResult loc = localization_rhs(sc, build_sigma(sc));
  // factorization oracle: the product integral is the square of the factor integral
  const Complex factor = berezin_integrate(golden.mu, golden.quadrature);
  const Complex oracle = factor * factor;
  const double body = std::real(eval_scalar(restrict_to(sc.mu.coefficient, *sc.locus).body(), std::vector<double>(4, 0.0)));
  const Complex closed_form = std::pow(-2 * kPi, loc.l) * body;
  const double r1 = std::abs(direct - loc.value) / std::abs(oracle);
  const double r2 = std::abs(direct - oracle) / std::abs(oracle);
  const double r3 = std::abs(loc.value - closed_form) / std::abs(closed_form);
  const bool ok = loc.l == 2 && r1 <= 1e-5 && r2 <= 1e-5 && r3 <= 1e-5;
  return {ok, "direct=" + fmt("%.8f", direct.real()) + " rhs=" + fmt("%.8f", loc.value.real()) +
                  " (-2pi)^2*body=" + fmt("%.8f", closed_form.real()) + " max_rel=" + fmt("%.1e", std::max({r1, r2, r3}))};
}

}  // namespace

int main(int argc, char** argv) {
  g_scenarios = argc > 1 ? argv[1] : "scenarios";
  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9};
  int failed = 0;
  for (int i = 0; i < 9; ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
