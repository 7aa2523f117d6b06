#include "superloc/morse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace superloc {

namespace {

using Vec = std::vector<Number>;

bool all_exact(const DenseMatrix<Number>& s) {
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j)
      if (!s(i, j).is_exact()) return false;
  return true;
}

Number form(const DenseMatrix<Number>& s, const Vec& u, const Vec& v) {
  Number acc(0);
  for (int i = 0; i < s.rows(); ++i) {
    if (u[i].is_zero()) continue;
    for (int j = 0; j < s.cols(); ++j)
      if (!v[j].is_zero() && !s(i, j).is_zero()) acc += u[i] * s(i, j) * v[j];
  }
  return acc;
}

void axpy(Vec& w, const Number& a, const Vec& v) {
  if (a.is_zero()) return;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += a * v[i];
}

double max_entry(const DenseMatrix<Number>& s) {
  double m = 0.0;
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j) m = std::max(m, abs(s(i, j)));
  return m;
}

bool negligible(const Number& x, bool exact, double scale) {
  return exact ? x.is_zero() : abs(x) <= 1e-12 * std::max(scale, 1.0);
}

SuperFunction linear_image(const DenseMatrix<Number>& p, int row, const std::vector<int>& coords, bool odd) {
  SuperFunction out;
  for (int c = 0; c < p.cols(); ++c) {
    if (p(row, c).is_zero()) continue;
    SuperFunction coord = odd ? SuperFunction::odd_coordinate(coords[c]) : SuperFunction::even_coordinate(coords[c]);
    out += scale(coord, p(row, c));
  }
  return out;
}

CoordinateStep identity_step(int m, int n, std::string kind, int level) {
  CoordinateStep step{std::move(kind), level, {}, {}};
  for (int i = 0; i < m; ++i) step.even_images.push_back(SuperFunction::even_coordinate(i));
  for (int a = 0; a < n; ++a) step.odd_images.push_back(SuperFunction::odd_coordinate(a));
  return step;
}

bool is_identity_matrix(const DenseMatrix<Number>& p) {
  for (int i = 0; i < p.rows(); ++i)
    for (int j = 0; j < p.cols(); ++j)
      if (!(p(i, j) == Number(i == j ? 1 : 0))) return false;
  return true;
}

DenseMatrix<Number> invert(DenseMatrix<Number> a) {
  const int n = a.rows();
  DenseMatrix<Number> inv = DenseMatrix<Number>::identity(n);
  const bool exact = all_exact(a);
  const double scale = max_entry(a);
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    for (int r = k; r < n; ++r)
      if (!negligible(a(r, k), exact, scale) && (piv < 0 || (!exact && abs(a(r, k)) > abs(a(piv, k))))) {
        piv = r;
        if (exact) break;
      }
    if (piv < 0) throw std::domain_error("singular linear coordinate change");
    for (int c = 0; c < n; ++c) {
      std::swap(a(k, c), a(piv, c));
      std::swap(inv(k, c), inv(piv, c));
    }
    const Number d = a(k, k);
    for (int c = 0; c < n; ++c) {
      a(k, c) /= d;
      inv(k, c) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == k || a(r, k).is_zero()) continue;
      const Number f = a(r, k);
      for (int c = 0; c < n; ++c) {
        a(r, c) -= f * a(k, c);
        inv(r, c) -= f * inv(k, c);
      }
    }
  }
  return inv;
}

ScalarExpr term_expr(const Monomial& mono, const Number& c) {
  ScalarExpr::TermMap t;
  t.emplace(mono, c);
  return ScalarExpr::from_terms(std::move(t));
}

bool is_polynomial(const SuperFunction& f) {
  return std::all_of(f.components().begin(), f.components().end(),
                     [](const auto& kv) { return kv.second.is_polynomial(); });
}

}  // namespace

DenseMatrix<Number> symplectic_basis(const DenseMatrix<Number>& s) {
  if (!s.is_square()) throw std::invalid_argument("symplectic_normalize needs a square matrix");
  const int r = s.rows();
  const bool exact = all_exact(s);
  const double scale = max_entry(s);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j)
      if (!negligible(s(i, j) + s(j, i), exact, scale))
        throw std::invalid_argument("symplectic_normalize needs a skew-symmetric matrix");
  if (r % 2) throw std::domain_error("degenerate skew form: odd dimension");

  std::vector<Vec> remaining;
  for (int i = 0; i < r; ++i) {
    Vec v(r, Number(0));
    v[i] = Number(1);
    remaining.push_back(std::move(v));
  }
  DenseMatrix<Number> t(r, r);
  const Number half(Rational(1, 2));
  int col = 0;
  while (!remaining.empty()) {
    Vec e = remaining.front();
    int partner = -1;
    Number best(0);
    for (std::size_t b = 1; b < remaining.size(); ++b) {
      Number w = form(s, e, remaining[b]);
      if (negligible(w, exact, scale)) continue;
      if (partner < 0 || (!exact && abs(w) > abs(best))) {
        partner = static_cast<int>(b);
        best = w;
        if (exact) break;
      }
    }
    if (partner < 0) throw std::domain_error("degenerate skew form");
    Vec f = remaining[partner];
    const Number factor = -half / best;
    for (auto& x : f) x *= factor;
    remaining.erase(remaining.begin() + partner);
    remaining.erase(remaining.begin());
    // omega(e, f) = -1/2; project the rest onto the complement of span(e, f)
    for (auto& w : remaining) {
      const Number we = form(s, w, e), wf = form(s, w, f);
      axpy(w, Number(2) * wf, e);
      axpy(w, Number(-2) * we, f);
    }
    for (int i = 0; i < r; ++i) {
      t(i, col) = e[i];
      t(i, col + 1) = f[i];
    }
    col += 2;
  }
  return t;
}

SymplecticNormalization symplectic_normalize(const DenseMatrix<ScalarExpr>& s,
                                             std::span<const std::vector<double>> samples) {
  SymplecticNormalization out;
  out.constant = true;
  for (int i = 0; i < s.rows() && out.constant; ++i)
    for (int j = 0; j < s.cols(); ++j)
      if (!s(i, j).is_constant() && !s(i, j).is_zero()) {
        out.constant = false;
        break;
      }
  if (out.constant) {
    out.exact = symplectic_basis(s.map([](const ScalarExpr& e) { return e.constant_term(); }));
    out.at_samples.assign(samples.size(), out.exact);
    return out;
  }
  for (const auto& x : samples)
    out.at_samples.push_back(symplectic_basis(s.map([&x](const ScalarExpr& e) {
      Complex v = eval_scalar(e, x);
      return v.imag() == 0.0 ? Number(v.real()) : Number(v);
    })));
  return out;
}

SymmetricNormalization diagonalize_symmetric(const DenseMatrix<Number>& q0) {
  if (!q0.is_square()) throw std::invalid_argument("diagonalize_symmetric needs a square matrix");
  const int r = q0.rows();
  DenseMatrix<Number> q = q0, p = DenseMatrix<Number>::identity(r);
  const bool exact = all_exact(q0);
  const double scale = max_entry(q0);
  auto add_to = [&](int k, int j) {  // basis vector k += basis vector j
    for (int i = 0; i < r; ++i) p(i, k) += p(i, j);
    for (int i = 0; i < r; ++i) q(k, i) += q(j, i);
    for (int i = 0; i < r; ++i) q(i, k) += q(i, j);
  };
  auto swap_basis = [&](int k, int j) {
    for (int i = 0; i < r; ++i) std::swap(p(i, k), p(i, j));
    for (int i = 0; i < r; ++i) std::swap(q(k, i), q(j, i));
    for (int i = 0; i < r; ++i) std::swap(q(i, k), q(i, j));
  };
  for (int k = 0; k < r; ++k) {
    if (negligible(q(k, k), exact, scale)) {
      int j = k + 1;
      while (j < r && negligible(q(j, j), exact, scale)) ++j;
      if (j < r) {
        swap_basis(k, j);
      } else {
        j = k + 1;
        while (j < r && negligible(q(k, j), exact, scale)) ++j;
        if (j == r) throw std::domain_error("degenerate Hessian on the normal bundle");
        add_to(k, j);
      }
    }
    const Number d = q(k, k);
    for (int j = k + 1; j < r; ++j) {
      if (q(k, j).is_zero()) continue;
      const Number f = q(k, j) / d;
      for (int i = 0; i < r; ++i) p(i, j) -= f * p(i, k);
      for (int i = 0; i < r; ++i) q(j, i) -= f * q(k, i);
      for (int i = 0; i < r; ++i) q(i, j) -= f * q(i, k);
    }
  }
  SymmetricNormalization out;
  std::vector<int> order(r);
  std::vector<int> sign(r);
  for (int k = 0; k < r; ++k) {
    sign[k] = q(k, k).sign();
    const Number root = sqrt(sign[k] < 0 ? -q(k, k) : q(k, k));
    for (int i = 0; i < r; ++i) p(i, k) /= root;
    order[k] = k;
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sign[a] > sign[b]; });
  out.p = DenseMatrix<Number>(r, r);
  for (int c = 0; c < r; ++c) {
    for (int i = 0; i < r; ++i) out.p(i, c) = p(i, order[c]);
    out.signs.push_back(sign[order[c]]);
  }
  return out;
}

SuperFunction CoordinateChange::pull(const SuperFunction& f) const {
  SuperFunction g = f;
  for (const auto& step : steps) g = pullback(g, step.even_images, step.odd_images);
  return g;
}

CoordinateStep CoordinateChange::composed() const {
  CoordinateStep total = identity_step(m, n, "composed", 0);
  for (const auto& step : steps) {
    for (auto& e : total.even_images) e = pullback(e, step.even_images, step.odd_images);
    for (auto& o : total.odd_images) o = pullback(o, step.even_images, step.odd_images);
  }
  return total;
}

CoordinateStep truncated_inverse(const CoordinateStep& step, int m, int n) {
  CoordinateStep inv = identity_step(m, n, step.kind + "-inverse", step.level);
  if (step.kind == "even-linear" || step.kind == "odd-linear") {
    const bool odd = step.kind == "odd-linear";
    const int size = odd ? n : m;
    const auto& images = odd ? step.odd_images : step.even_images;
    DenseMatrix<Number> a(size, size);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        SuperFunction d = odd ? diff_odd(images[r], c) : diff_even(images[r], c);
        a(r, c) = d.body().constant_term();
      }
    DenseMatrix<Number> b = invert(a);
    std::vector<int> coords(size);
    for (int i = 0; i < size; ++i) coords[i] = i;
    auto& out = odd ? inv.odd_images : inv.even_images;
    for (int r = 0; r < size; ++r) out[r] = linear_image(b, r, coords, odd);
    return inv;
  }
  for (int i = 0; i < m; ++i)
    inv.even_images[i] = SuperFunction::even_coordinate(i) * SuperFunction(2) - step.even_images[i];
  for (int a = 0; a < n; ++a)
    inv.odd_images[a] = SuperFunction::odd_coordinate(a) * SuperFunction(2) - step.odd_images[a];
  return inv;
}

int filtration_order(const SuperFunction& f, const std::vector<int>& axes) {
  int best = -1;
  for (const auto& [mask, coeff] : f.components())
    for (const auto& [mono, c] : coeff.terms()) {
      int d = mask_size(mask);
      for (int a : axes) d += mono.power(a);
      if (best < 0 || d < best) best = d;
    }
  return best;
}

int odd_degree(const SuperFunction& f) {
  int best = -1;
  for (const auto& [mask, coeff] : f.components())
    if (best < 0 || mask_size(mask) < best) best = mask_size(mask);
  return best;
}

bool in_ideal_squared(const SuperFunction& f, const CoordinateSubmanifold& sub) {
  if (!restrict_to(f, sub).is_zero()) return false;
  for (int k : sub.normal_indices())
    if (!restrict_to(diff_coordinate(f, sub.m, k), sub).is_zero()) return false;
  return true;
}

MorseNormalForm normalize_jet(const SuperFunction& s, const CoordinateSubmanifold& sub, int a_max) {
  sub.validate();
  if (!is_polynomial(s)) throw std::invalid_argument("normalize_jet needs a polynomial function");
  if (!s.is_even()) throw std::invalid_argument("normalize_jet needs an even function");
  if (s.max_even_axis() >= sub.m || s.max_odd_index() >= sub.n)
    throw std::invalid_argument("function uses coordinates outside the chart");
  const int m = sub.m, n = sub.n;
  const auto& ne = sub.normal_even;
  const auto& no = sub.normal_odd;
  const int k = sub.codim_even(), l2 = sub.codim_odd();
  if (l2 % 2) throw std::domain_error("degenerate Hessian on the normal bundle: odd codimension is odd");

  MorseNormalForm out;
  out.change.m = m;
  out.change.n = n;
  SuperMatrix h = hessian_at(s, sub);
  out.critical_value = s.body().constant_term();

  SuperFunction cur = s;
  auto apply = [&](CoordinateStep step) {
    cur = pullback(cur, step.even_images, step.odd_images);
    out.change.steps.push_back(std::move(step));
  };

  // Classical part: diagonalize the body Hessian at the origin.
  DenseMatrix<Number> qa(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) qa(r, c) = h(r, c).body().constant_term() * Number(Rational(1, 2));
  SymmetricNormalization diag = diagonalize_symmetric(qa);
  out.signs = diag.signs;
  if (!is_identity_matrix(diag.p)) {
    CoordinateStep step = identity_step(m, n, "even-linear", 0);
    for (int r = 0; r < k; ++r) step.even_images[ne[r]] = linear_image(diag.p, r, ne, false);
    apply(std::move(step));
    out.trace.push_back("even-linear: body Hessian diagonalized");
  }

  // Odd block: theta^T (H_odd / 2) theta form brought to the standard pairs.
  DenseMatrix<Number> qd(l2, l2);
  for (int r = 0; r < l2; ++r)
    for (int c = 0; c < l2; ++c) qd(r, c) = h(k + r, k + c).body().constant_term() * Number(Rational(1, 2));
  DenseMatrix<Number> t;
  try {
    t = symplectic_basis(qd);
  } catch (const std::domain_error&) {
    throw std::domain_error("degenerate Hessian on the normal bundle");
  }
  if (!is_identity_matrix(t)) {
    CoordinateStep step = identity_step(m, n, "odd-linear", 0);
    for (int r = 0; r < l2; ++r) step.odd_images[no[r]] = linear_image(t, r, no, true);
    apply(std::move(step));
    out.trace.push_back("odd-linear: symplectic basis of the odd Hessian");
  }

  out.standard = SuperFunction(ScalarExpr(out.critical_value));
  for (int b = 0; b < k; ++b) {
    SuperFunction x = SuperFunction::even_coordinate(ne[b]);
    out.standard += scale(x * x, Number(out.signs[b]));
  }
  for (int j = 0; j + 1 < l2; j += 2)
    out.standard += SuperFunction::odd_coordinate(no[j]) * SuperFunction::odd_coordinate(no[j + 1]);

  const OddMask normal_odd_mask = [&] {
    OddMask mk = 0;
    for (int a : no) mk |= OddMask{1} << a;
    return mk;
  }();
  constexpr int kMaxIterations = 64;
  bool settled = true;
  for (int a = 1; a < a_max && 2 * a <= n && settled; ++a) {
    const int level = 2 * a;
    int iter = 0;
    for (; iter < kMaxIterations; ++iter) {
      SuperFunction r = cur - out.standard;
      SuperFunction::Components level_part;
      for (const auto& [mask, coeff] : r.components()) {
        const int d = mask_size(mask);
        if (d > 0 && d < level) throw std::logic_error("normal form lost a lower filtration level");
        if (d == level) level_part.emplace(mask, coeff);
      }
      if (level_part.empty()) break;
      if (!in_ideal_squared(r, sub)) throw std::logic_error("residual left the square of the ideal of N");

      std::vector<SuperFunction> g(n);
      DenseMatrix<SuperFunction> f(k, k);
      bool have_g = false;
      for (const auto& [mask, coeff] : level_part)
        for (const auto& [mono, c] : coeff.terms()) {
          // Terms with two normal even factors go to the F-step; the rest must
          // carry a normal odd factor and go to the G-step.
          int normal_x = 0;
          for (int b = 0; b < k; ++b) normal_x += mono.power(ne[b]);
          const OddMask hit = mask & normal_odd_mask;
          if (normal_x < 2) {
            if (!hit) throw std::logic_error("term outside the square of the ideal of N");
            const int i = __builtin_ctz(hit);
            const OddMask rest = mask & ~(OddMask{1} << i);
            g[i] += scale(SuperFunction::monomial(rest, term_expr(mono, c)),
                          Number(koszul_sign(rest, OddMask{1} << i)));
            have_g = true;
            continue;
          }
          Monomial reduced = mono;
          int picked[2] = {-1, -1};
          for (int& slot : picked)
            for (int b = 0; b < k; ++b)
              if (reduced.power(ne[b]) > 0) {
                reduced.powers[ne[b]] -= 1;
                slot = b;
                break;
              }
          if (picked[1] < 0) throw std::logic_error("term outside the square of the ideal of N");
          while (!reduced.powers.empty() && reduced.powers.back() == 0) reduced.powers.pop_back();
          SuperFunction hterm = SuperFunction::monomial(mask, term_expr(reduced, c));
          if (picked[0] == picked[1]) {
            f(picked[0], picked[0]) += hterm;
          } else {
            SuperFunction half = scale(hterm, Number(Rational(1, 2)));
            f(picked[0], picked[1]) += half;
            f(picked[1], picked[0]) += half;
          }
        }

      if (have_g) {
        CoordinateStep step = identity_step(m, n, "G", level);
        for (int j = 0; j + 1 < l2; j += 2) {
          const int i1 = no[j], i2 = no[j + 1];
          step.odd_images[i1] = SuperFunction::odd_coordinate(i1) - g[i2];
          step.odd_images[i2] = SuperFunction::odd_coordinate(i2) + g[i1];
        }
        apply(std::move(step));
        out.trace.push_back("G: level " + std::to_string(level));
      } else {
        CoordinateStep step = identity_step(m, n, "F", level);
        for (int b = 0; b < k; ++b) {
          SuperFunction corr;
          for (int c = 0; c < k; ++c)
            if (!f(b, c).is_zero()) corr += SuperFunction::even_coordinate(ne[c]) * f(b, c);
          step.even_images[ne[b]] -= scale(corr, Number(Rational(out.signs[b], 2)));
        }
        apply(std::move(step));
        out.trace.push_back("F: level " + std::to_string(level));
      }
    }
    if (iter == kMaxIterations) {
      settled = false;
      out.trace.push_back("level " + std::to_string(level) + " did not settle");
    }
  }

  out.normalized = cur;
  SuperFunction diff = cur - out.standard;
  out.even_remainder = diff.body();
  out.odd_residual = diff - SuperFunction(diff.body());
  out.odd_sector_standard = out.odd_residual.is_zero();
  return out;
}

}  // namespace superloc
