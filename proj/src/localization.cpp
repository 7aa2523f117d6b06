#include "superloc/localization.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace superloc {

namespace {

constexpr double kPi = std::numbers::pi;

using Key = std::pair<OddMask, Monomial>;
struct KeyLess {
  bool operator()(const Key& a, const Key& b) const {
    if (a.first != b.first) return a.first < b.first;
    return compare(a.second, b.second) < 0;
  }
};
using Flat = std::map<Key, Number, KeyLess>;

Flat flatten(const SuperFunction& f) {
  Flat out;
  for (const auto& [mask, e] : f.components())
    for (const auto& [mono, c] : e.terms()) out.emplace(Key{mask, mono}, c);
  return out;
}

double flat_norm(const Flat& v) {
  double worst = 0.0;
  for (const auto& [k, c] : v) worst = std::max(worst, abs(c));
  return worst;
}

void axpy(Flat& y, const Number& a, const Flat& x) {
  for (const auto& [k, c] : x) {
    auto [it, inserted] = y.emplace(k, Number(0));
    it->second -= a * c;
    if (it->second.is_zero()) y.erase(it);
  }
}

bool exact_everywhere(const Flat& v) {
  for (const auto& [k, c] : v)
    if (!c.is_exact()) return false;
  return true;
}

IdentityCheck check_zero(std::string key, const SuperFunction& f, double tol) {
  IdentityCheck c{std::move(key), f.is_zero(), max_abs_coefficient(f)};
  if (!c.holds && !f.is_exact()) c.holds = c.residual <= tol;
  return c;
}

IdentityCheck check_zero(std::string key, const SuperMatrix& f, double tol) {
  IdentityCheck c{std::move(key), true, 0.0};
  bool exact = true;
  for (int i = 0; i < f.full().rows(); ++i)
    for (int j = 0; j < f.full().cols(); ++j) {
      const SuperFunction& e = f(i, j);
      if (!e.is_zero()) c.holds = false;
      exact = exact && e.is_exact();
      c.residual = std::max(c.residual, max_abs_coefficient(e));
    }
  if (!c.holds && !exact) c.holds = c.residual <= tol;
  return c;
}

IdentityCheck check_close(std::string key, Complex value, Complex reference, double tol) {
  const double residual = std::abs(value - reference) / std::max(1.0, std::abs(reference));
  return {std::move(key), residual <= tol, residual};
}

int signature_at_origin(const SuperMatrix& h, int m) {
  const int k = h.p_target();
  if (k == 0) return 0;
  std::vector<double> origin(m, 0.0);
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = eval_scalar(h(i, j).body(), origin).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  int sig = 0;
  for (int i = 0; i < k; ++i) {
    const double ev = solver.eigenvalues()(i);
    if (std::abs(ev) <= 1e-12 * scale) throw std::domain_error("reduced Hessian is degenerate");
    sig += ev > 0 ? 1 : -1;
  }
  return sig;
}

OddMask mask_of(const std::vector<int>& idx) {
  OddMask out = 0;
  for (int a : idx) out |= OddMask{1} << a;
  return out;
}

Complex integrate_over(const Density& d, const QuadratureConfig& config) { return berezin_integrate(d, config); }

}  // namespace

SuperVectorField rotation_generator(int m, int n, const std::vector<RotationPlane>& planes) {
  SuperVectorField r(m, n);
  for (const auto& p : planes) {
    const int bound = p.odd ? n : m;
    if (p.a < 0 || p.b < 0 || p.a >= bound || p.b >= bound || p.a == p.b)
      throw std::invalid_argument("rotation plane needs two distinct coordinates of the same parity");
    auto coord = [&](int i) { return p.odd ? SuperFunction::odd_coordinate(i) : SuperFunction::even_coordinate(i); };
    auto& slot = p.odd ? r.odd : r.even;
    slot[p.a] -= scale(coord(p.b), p.weight);
    slot[p.b] += scale(coord(p.a), p.weight);
  }
  return r;
}

void validate_scenario(const Scenario& sc) {
  if (sc.q.m != sc.m || sc.q.n != sc.n) throw ParseError("Q", "dimensions do not match dims");
  int parity = 0;
  try {
    parity = sc.q.parity();
  } catch (const std::exception&) {
    throw ParseError("Q", "vector field is not homogeneous");
  }
  if (parity != 1 && !sc.q.is_zero()) throw ParseError("Q", "vector field must be odd");
  if (sc.mu.m != sc.m || sc.mu.n != sc.n) throw ParseError("mu", "dimensions do not match dims");
  if (!sc.mu.coefficient.is_even()) throw ParseError("mu.coefficient", "density coefficient must be even");

  const SuperVectorField q2 = square(sc.q);
  SuperVectorField rot;
  try {
    rot = rotation_generator(sc.m, sc.n, sc.rotation);
  } catch (const std::invalid_argument& e) {
    throw ParseError("rotation_action", e.what());
  }
  const SuperVectorField diff = q2 - rot;
  if (!diff.is_zero()) {
    double worst = 0.0;
    bool exact = true;
    for (int k = 0; k < sc.m + sc.n; ++k) {
      worst = std::max(worst, max_abs_coefficient(diff.coefficient(k)));
      exact = exact && diff.coefficient(k).is_exact();
    }
    if (exact || worst > sc.tol.identity) {
      if (sc.rotation.empty())
        throw ParseError("rotation_action", "Q^2 is nonzero and no compact rotation action is declared");
      throw ParseError("rotation_action", "Q^2 differs from the declared rotation generator");
    }
  }

  const Density lq = lie_derivative_density(sc.q, sc.mu);
  if (!lq.coefficient.is_zero() &&
      (lq.coefficient.is_exact() || max_abs_coefficient(lq.coefficient) > sc.tol.identity))
    throw ParseError("mu", "density is not Q-invariant (L_Q mu != 0)");

  if (sc.locus) {
    try {
      sc.locus->validate();
    } catch (const std::exception& e) {
      throw ParseError("N", e.what());
    }
  }
  if (sc.sigma && !sc.sigma->is_odd() && !sc.sigma->is_zero()) throw ParseError("sigma", "sigma must be odd");
  if (sc.phase && !sc.phase->is_even()) throw ParseError("S", "phase must be even");
  if (sc.cutoff && !(sc.cutoff->first > 0 && sc.cutoff->first < sc.cutoff->second))
    throw ParseError("cutoff", "need 0 < r < R");
}

SuperFunction torus_average(const SuperFunction& f, const SuperVectorField& rotation, int max_dimension) {
  if (rotation.is_zero() || f.is_zero()) return f;
  struct Row {
    Flat vec;
    std::vector<Number> combo;
    Key pivot;
  };
  std::vector<SuperFunction> krylov = {f};
  std::vector<Row> rows;
  const double scale0 = std::max(1.0, flat_norm(flatten(f)));
  std::vector<Number> poly;
  for (int d = 0; d <= max_dimension; ++d) {
    Flat v = flatten(krylov[d]);
    std::vector<Number> combo(d + 1, Number(0));
    combo[d] = Number(1);
    for (const auto& row : rows) {
      auto it = v.find(row.pivot);
      if (it == v.end()) continue;
      const Number factor = it->second / row.vec.at(row.pivot);
      axpy(v, factor, row.vec);
      for (std::size_t j = 0; j < row.combo.size(); ++j) combo[j] -= factor * row.combo[j];
    }
    const bool dependent = v.empty() || (!exact_everywhere(v) && flat_norm(v) <= 1e-11 * scale0);
    if (dependent) {
      poly = std::move(combo);
      break;
    }
    Key pivot = v.begin()->first;
    double best = -1.0;
    for (const auto& [k, c] : v)
      if (abs(c) > best * (1.0 + 1e-12)) {
        best = abs(c);
        pivot = k;
        if (c.is_exact()) break;
      }
    rows.push_back({std::move(v), std::move(combo), pivot});
    krylov.push_back(apply_vf(rotation, krylov[d]));
  }
  if (poly.empty()) throw std::domain_error("rotation average did not close within the Krylov limit");

  // p(R) f = 0 with p monic; for a semisimple action p(t) = t q(t) or q(t), q(0) != 0.
  auto negligible = [&](const Number& c) { return c.is_zero() || (!c.is_exact() && abs(c) <= 1e-11); };
  if (!negligible(poly[0])) return SuperFunction();
  if (poly.size() < 2 || negligible(poly[1])) throw std::domain_error("rotation field is not semisimple on sigma");
  SuperFunction out;
  for (std::size_t j = 1; j < poly.size(); ++j)
    if (!poly[j].is_zero()) out += scale(krylov[j - 1], poly[j] / poly[1]);
  return out;
}

SuperFunction build_sigma(const Scenario& sc) {
  const SuperVectorField rot = rotation_generator(sc.m, sc.n, sc.rotation);
  if (sc.sigma) {
    const SuperFunction r = apply_vf(rot, *sc.sigma);
    if (!r.is_zero() && (r.is_exact() || max_abs_coefficient(r) > sc.tol.identity))
      throw ParseError("sigma", "sigma is not invariant under Q^2");
    return *sc.sigma;
  }
  SuperFunction s0;
  for (int a = 0; a < sc.n; ++a) s0 += sc.q.odd[a] * SuperFunction::odd_coordinate(a);
  return torus_average(s0, rot);
}

SuperFunction build_invariant_cutoff(const Scenario& sc, const SuperFunction& sigma, const Rational& r,
                                     const Rational& big_r) {
  const SuperFunction qs = apply_vf(sc.q, sigma);
  const ScalarExpr s0 = qs.body();
  const SuperFunction psi = qs.soul();
  const Rational lo = r * r, hi = big_r * big_r;
  const SuperFunction chi(ScalarExpr::step(lo, hi, s0));
  const SuperFunction q_s0 = apply_vf(sc.q, SuperFunction(s0));

  // (Q sigma)^{-1} Q(chi) = sum_k (-1)^k psi^k chi'(s0) s0^{-k-1} Q(s0)
  SuperFunction series;
  SuperFunction psi_k(1);
  for (int k = 0; !psi_k.is_zero(); ++k) {
    const SuperFunction d(ScalarExpr::special(SpecialKind::Step, s0, 1, k + 1, lo, hi));
    series += scale(psi_k * d, Number(k % 2 == 0 ? 1 : -1));
    psi_k = psi_k * psi;
  }
  return chi - sigma * series * q_s0;
}

Complex z_lambda(const Scenario& sc, const SuperFunction& sigma, double lambda) {
  Density d = sc.mu;
  if (lambda != 0.0) {
    const SuperFunction qs = apply_vf(sc.q, sigma);
    d.coefficient = sc.mu.coefficient * exp_even(scale(qs, Number(Complex(0.0, lambda))));
  }
  return berezin_integrate(d, sc.quadrature);
}

Density contract_density(const BerLineElement& element, int orientation, const Density& mu,
                         const CoordinateSubmanifold& sub, const CoordinateNames* names) {
  sub.validate();
  if (mu.m != sub.m || mu.n != sub.n) throw std::invalid_argument("density and submanifold on different dimensions");
  if (names && !element.basis.empty()) {
    std::vector<std::string> expected;
    for (int i : sub.normal_even) expected.push_back(names->even.at(i));
    for (int a : sub.normal_odd) expected.push_back(names->odd.at(a));
    if (element.basis != expected) throw std::invalid_argument("Berezinian basis is not adapted to the submanifold");
  }
  const OddMask tangent = mask_of(sub.tangent_odd());
  const OddMask normal = mask_of(sub.normal_odd);
  const int sign = orientation * koszul_sign(tangent, normal);
  Density out;
  out.m = sub.m - sub.codim_even();
  out.n = sub.n - sub.codim_odd();
  out.orientation = mu.orientation;
  out.coefficient = scale(pull_to_submanifold(element.coefficient * mu.coefficient, sub), Number(sign));
  return out;
}

QuadratureConfig restrict_config(const QuadratureConfig& config, const CoordinateSubmanifold& sub) {
  QuadratureConfig out = config;
  if (!config.box.empty()) {
    out.box.clear();
    for (int i : sub.tangent_even()) out.box.push_back(config.box.at(i));
  }
  return out;
}

StationaryPhaseTerm stationary_phase_rhs(const Density& mu, const SuperFunction& s, const CoordinateSubmanifold& sub,
                                         double lambda, const QuadratureConfig& config) {
  if (!(lambda > 0.0)) throw std::invalid_argument("stationary phase needs lambda > 0");
  const SuperMatrix h = hessian_at(s, sub);
  StationaryPhaseTerm out;
  out.k = sub.codim_even();
  if (sub.codim_odd() % 2 != 0) throw std::domain_error("odd codimension of the critical submanifold is odd");
  out.l = sub.codim_odd() / 2;
  out.signature = signature_at_origin(h, sub.m);

  std::vector<double> origin(sub.m, 0.0);
  out.critical_value = eval_scalar(restrict_to(s, sub).body(), origin);

  const FormBerezinian fb = ber_of_form(h);
  const BerLineElement root = sqrt_ber_line(fb.ber_inv);
  out.or01 = or01_of_form(h).sign;
  const Density on_n = contract_density(root, out.or01 * root.orientation, mu, sub);
  out.integral_over_n = integrate_over(on_n, restrict_config(config, sub));

  const Complex i(0.0, 1.0);
  out.prefactor = std::exp(i * lambda * out.critical_value) * std::exp(i * (kPi / 4.0) * double(out.signature)) *
                  std::pow(2.0 * kPi / lambda, out.k / 2.0) * std::pow(-i * lambda, out.l);
  out.value = out.prefactor * out.integral_over_n;
  return out;
}

CoordinateSubmanifold resolve_locus(const Scenario& sc) {
  const VanishingLocusReport report = vanishing_locus(sc.q, sc.locus ? &*sc.locus : nullptr);
  if (!report.is_coordinate_locus() || !report.nondegenerate) {
    std::string why = "vanishing locus of Q is not a nondegenerate coordinate subsupermanifold";
    for (const auto& p : report.problems) why += "; " + p;
    throw std::domain_error(why);
  }
  return report.locus;
}

LocalizationResult localization_rhs(const Scenario& sc, const SuperFunction& sigma, bool integrate) {
  const CoordinateSubmanifold sub = resolve_locus(sc);
  const int k = sub.codim_even();
  if (k != sub.codim_odd() || k % 2 != 0)
    throw std::domain_error("localization needs a normal bundle of dimension 2l|2l");
  LocalizationResult out;
  out.l = k / 2;
  const double tol = sc.tol.identity;

  const SuperMatrix lin = linearize_at(sc.q, sub);
  const BerLineElement ber_l = berezinian_odd(lin);
  out.ber_l = ber_l.coefficient;
  const BerLineElement root = sqrt_ber_line(ber_l);

  // o from the even automorphism Q^2 on the odd normal directions
  const SuperMatrix lin2 = linearize_at(square(sc.q), sub);
  Eigen::MatrixXd e(k, k);
  std::vector<double> origin(sc.m, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) e(i, j) = eval_scalar(lin2(k + i, k + j).body(), origin).real();
  out.o = k == 0 ? 1 : or_compact_auto(e).sign;

  const SuperFunction qs = apply_vf(sc.q, sigma);
  const SuperMatrix h = hessian_at(qs, sub);
  const SuperMatrix hh = form_hat(h);
  out.or01 = or01_of_form(h).sign;
  out.signature = signature_at_origin(h, sc.m);

  out.identities.push_back(check_zero("identities.HL_eq_minus_LstH", hh * lin + supertranspose(lin) * hh, tol));
  {
    const DenseMatrix<SuperFunction> av = hh.A() * lin.B() - lin.C().transpose() * hh.D();
    out.identities.push_back(
        check_zero("identities.AV_eq_WtD", SuperMatrix::from_full(av, av.rows(), 0), tol));
  }
  out.identities.push_back(check_zero("identities.ber_HLIprime_eq_1",
                                      berezinian_even(hh * lin * SuperMatrix::odd_identity(k)) - SuperFunction(1), tol));
  out.identities.push_back({"identities.or01_H_eq_sign_o", out.or01 == (out.l % 2 == 0 ? 1 : -1) * out.o,
                            double(out.or01 - (out.l % 2 == 0 ? 1 : -1) * out.o)});
  out.identities.push_back({"identities.sgn_Hred_eq_2l", out.signature == 2 * out.l,
                            double(out.signature - 2 * out.l)});

  if (integrate) {
    const Density on_n = contract_density(root, out.o * root.orientation, sc.mu, sub, &sc.names);
    out.integral_over_n = integrate_over(on_n, restrict_config(sc.quadrature, sub));
    out.value = std::pow(-2.0 * kPi, out.l) * out.integral_over_n;
  }
  return out;
}

LocalizationReport verify_scenario(const Scenario& sc, const VerifyOptions& options) {
  LocalizationReport rep;
  rep.id = sc.id;
  const double tol = sc.tol.identity;
  auto fail = [&](const std::string& what, const std::exception& e) { rep.errors.push_back(what + ": " + e.what()); };

  try {
    rep.sigma = build_sigma(sc);
  } catch (const std::exception& e) {
    fail("sigma", e);
    return rep;
  }
  rep.q_sigma = apply_vf(sc.q, rep.sigma);
  rep.identities.push_back(
      check_zero("identities.Q2_sigma_eq_0", apply_vf(square(sc.q), rep.sigma), tol));
  if (!sc.sigma) {
    SuperFunction norm;
    for (int a = 0; a < sc.n; ++a) norm += SuperFunction(sc.q.odd[a].body() * sc.q.odd[a].body());
    rep.identities.push_back(
        check_zero("identities.Qsigma_body_eq_norm_b", SuperFunction(rep.q_sigma.body()) - norm, tol));
  }

  std::optional<CoordinateSubmanifold> sub;
  try {
    sub = resolve_locus(sc);
  } catch (const std::exception& e) {
    fail("N", e);
  }

  if (!options.exact_only) {
    try {
      rep.direct = berezin_integrate(sc.mu, sc.quadrature);
    } catch (const std::exception& e) {
      fail("direct_integral", e);
    }
    if (options.with_samples) {
      try {
        for (double lambda : sc.lambda_grid) {
          LambdaSample s;
          s.lambda = lambda;
          s.z = z_lambda(sc, rep.sigma, lambda);
          if (sub && lambda > 0.0) s.leading = stationary_phase_rhs(sc.mu, rep.q_sigma, *sub, lambda, sc.quadrature).value;
          rep.samples.push_back(s);
        }
      } catch (const std::exception& e) {
        fail("z_lambda", e);
      }
      if (!rep.samples.empty()) {
        const Complex z0 = rep.direct.value_or(rep.samples.front().z);
        double worst = 0.0;
        for (const auto& s : rep.samples) worst = std::max(worst, std::abs(s.z - z0) / std::max(1.0, std::abs(z0)));
        rep.identities.push_back({"identities.dZ_dlambda_eq_0", worst <= sc.tol.constancy, worst});
      }
    }
  }

  if (sub) {
    try {
      rep.localization = localization_rhs(sc, rep.sigma, !options.exact_only);
      for (const auto& c : rep.localization->identities) rep.identities.push_back(c);
      if (rep.direct)
        rep.identities.push_back(
            check_close("checks.localization", rep.localization->value, *rep.direct, sc.tol.localization));
    } catch (const std::exception& e) {
      fail("localization", e);
    }
  }

  if (sc.cutoff) {
    try {
      const SuperFunction g0 = build_invariant_cutoff(sc, rep.sigma, sc.cutoff->first, sc.cutoff->second);
      rep.identities.push_back(check_zero("identities.Q_cutoff_eq_0", apply_vf(sc.q, g0), tol));
      if (!options.exact_only && rep.direct) {
        Density d = sc.mu;
        d.coefficient = sc.mu.coefficient * g0;
        QuadratureConfig config = sc.quadrature;
        const double big = sc.cutoff->second.convert_to<double>();
        // support of chi(s0) for s0 = |x|^2
        config.box.assign(sc.m, {-big, big});
        config.kind = QuadratureConfig::Kind::Box;
        config.tol = std::max(config.tol, sc.tol.cutoff * 1e-3);
        rep.cutoff_integral = berezin_integrate(d, config);
        rep.identities.push_back(check_close("checks.cutoff", *rep.cutoff_integral, *rep.direct, sc.tol.cutoff));
      }
    } catch (const std::exception& e) {
      fail("cutoff", e);
    }
  }

  rep.pass = rep.errors.empty();
  for (const auto& c : rep.identities) rep.pass = rep.pass && c.holds;
  return rep;
}

}  // namespace superloc
