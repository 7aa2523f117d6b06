#include "superloc/calculus.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace superloc {

namespace {

void check_dims(const SuperVectorField& v, const SuperVectorField& w) {
  if (v.m != w.m || v.n != w.n) throw std::invalid_argument("vector fields on different dimensions");
}

void check_function_fits(const SuperFunction& f, int m, int n, const char* what) {
  if (f.max_even_axis() >= m || f.max_odd_index() >= n)
    throw std::invalid_argument(std::string(what) + " uses a coordinate outside R^{" + std::to_string(m) + "|" +
                                std::to_string(n) + "}");
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

OddMask mask_of(const std::vector<int>& indices) {
  OddMask mask = 0;
  for (int a : indices) mask |= OddMask{1} << a;
  return mask;
}

// Applies even-axis images and an odd index renumbering (order preserving) to f,
// dropping components that meet `killed`.
SuperFunction transform(const SuperFunction& f, std::span<const ScalarExpr> images, OddMask killed,
                        const std::vector<int>& odd_target) {
  SuperFunction::Components out;
  for (const auto& [mask, coeff] : f.components()) {
    if (mask & killed) continue;
    ScalarExpr c = substitute_all(coeff, images);
    if (c.is_zero()) continue;
    OddMask target = 0;
    for (int a = 0; a < 32; ++a)
      if (mask & (OddMask{1} << a)) target |= OddMask{1} << odd_target[a];
    out[target] += c;
  }
  return SuperFunction::from_components(std::move(out));
}

Complex body_at_origin(const SuperFunction& f, int m) {
  std::vector<double> origin(std::max(m, f.max_even_axis() + 1), 0.0);
  return eval_scalar(f.body(), origin);
}

}  // namespace

SuperVectorField SuperVectorField::partial_even(int m, int n, int axis) {
  SuperVectorField v(m, n);
  v.even.at(axis) = SuperFunction(1);
  return v;
}

SuperVectorField SuperVectorField::partial_odd(int m, int n, int index) {
  SuperVectorField v(m, n);
  v.odd.at(index) = SuperFunction(1);
  return v;
}

int SuperVectorField::parity() const {
  int p = -1;
  auto visit = [&p](const SuperFunction& c, int coordinate_parity) {
    if (c.is_zero()) return;
    if (!c.is_even() && !c.is_odd()) throw std::domain_error("vector field is not homogeneous");
    int q = (c.parity() + coordinate_parity) % 2;
    if (p >= 0 && p != q) throw std::domain_error("vector field is not homogeneous");
    p = q;
  };
  for (const auto& a : even) visit(a, 0);
  for (const auto& b : odd) visit(b, 1);
  return p < 0 ? 0 : p;
}

bool SuperVectorField::is_zero() const {
  return std::all_of(even.begin(), even.end(), [](const auto& c) { return c.is_zero(); }) &&
         std::all_of(odd.begin(), odd.end(), [](const auto& c) { return c.is_zero(); });
}

SuperVectorField operator+(const SuperVectorField& v, const SuperVectorField& w) {
  check_dims(v, w);
  SuperVectorField r = v;
  for (int k = 0; k < v.m + v.n; ++k) r.coefficient(k) += w.coefficient(k);
  return r;
}

SuperVectorField operator-(const SuperVectorField& v, const SuperVectorField& w) {
  check_dims(v, w);
  SuperVectorField r = v;
  for (int k = 0; k < v.m + v.n; ++k) r.coefficient(k) -= w.coefficient(k);
  return r;
}

bool operator==(const SuperVectorField& v, const SuperVectorField& w) {
  return v.m == w.m && v.n == w.n && v.even == w.even && v.odd == w.odd;
}

SuperVectorField scale(const SuperVectorField& v, const Number& c) {
  SuperVectorField r = v;
  for (int k = 0; k < v.m + v.n; ++k) r.coefficient(k) = scale(v.coefficient(k), c);
  return r;
}

SuperVectorField multiply(const SuperFunction& f, const SuperVectorField& v) {
  SuperVectorField r = v;
  for (int k = 0; k < v.m + v.n; ++k) r.coefficient(k) = f * v.coefficient(k);
  return r;
}

SuperFunction diff_coordinate(const SuperFunction& f, int m, int k) {
  return k < m ? diff_even(f, k) : diff_odd(f, k - m);
}

SuperFunction apply_vf(const SuperVectorField& v, const SuperFunction& f) {
  SuperFunction out;
  for (int k = 0; k < v.m + v.n; ++k) {
    const SuperFunction& c = v.coefficient(k);
    if (c.is_zero()) continue;
    out += c * diff_coordinate(f, v.m, k);
  }
  return out;
}

SuperVectorField bracket(const SuperVectorField& v, const SuperVectorField& w) {
  check_dims(v, w);
  const int sign = (v.parity() * w.parity()) % 2 ? -1 : 1;
  SuperVectorField r(v.m, v.n);
  for (int k = 0; k < v.m + v.n; ++k) {
    SuperFunction vw = apply_vf(v, w.coefficient(k));
    SuperFunction wv = apply_vf(w, v.coefficient(k));
    r.coefficient(k) = sign < 0 ? vw + wv : vw - wv;
  }
  return r;
}

SuperVectorField square(const SuperVectorField& q) {
  if (q.is_zero()) return SuperVectorField(q.m, q.n);
  if (q.parity() != 1) throw std::domain_error("square of a vector field needs an odd field");
  return scale(bracket(q, q), Number(Rational(1, 2)));
}

Density lie_derivative_density(const SuperVectorField& v, const Density& mu) {
  if (v.m != mu.m || v.n != mu.n) throw std::invalid_argument("vector field and density on different dimensions");
  const bool odd_sign_plus = v.parity() == 1;
  SuperFunction even_part, odd_part;
  for (int i = 0; i < v.m; ++i)
    if (!v.even[i].is_zero()) even_part += diff_even(v.even[i] * mu.coefficient, i);
  for (int a = 0; a < v.n; ++a)
    if (!v.odd[a].is_zero()) odd_part += diff_odd(v.odd[a] * mu.coefficient, a);
  Density out = mu;
  out.coefficient = odd_sign_plus ? even_part + odd_part : even_part - odd_part;
  return out;
}

QuadratureResult berezin_integrate_detailed(const Density& mu, const QuadratureConfig& config) {
  if (mu.n > 31) throw std::invalid_argument("too many odd coordinates");
  check_function_fits(mu.coefficient, mu.m, mu.n, "density");
  const OddMask top = mu.n == 0 ? 0 : (OddMask{1} << mu.n) - 1;
  ScalarExpr integrand = mu.coefficient.component(top);
  if (mu.orientation < 0) integrand = -integrand;
  if (mu.m == 0) return {eval_scalar(integrand, {}), 0.0, 1, false};
  return integrate_even_detailed(integrand, mu.m, config);
}

Complex berezin_integrate(const Density& mu, const QuadratureConfig& config) {
  return berezin_integrate_detailed(mu, config).value;
}

void CoordinateSubmanifold::validate() const {
  auto check = [](const std::vector<int>& idx, int bound, const char* kind) {
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument(std::string("repeated normal ") + kind + " coordinate");
    for (int a : idx)
      if (a < 0 || a >= bound) throw std::invalid_argument(std::string("normal ") + kind + " coordinate out of range");
  };
  check(normal_even, m, "even");
  check(normal_odd, n, "odd");
}

std::vector<int> CoordinateSubmanifold::tangent_even() const {
  std::vector<int> t;
  for (int i = 0; i < m; ++i)
    if (!contains(normal_even, i)) t.push_back(i);
  return t;
}

std::vector<int> CoordinateSubmanifold::tangent_odd() const {
  std::vector<int> t;
  for (int a = 0; a < n; ++a)
    if (!contains(normal_odd, a)) t.push_back(a);
  return t;
}

std::vector<int> CoordinateSubmanifold::normal_indices() const {
  std::vector<int> k = normal_even;
  for (int a : normal_odd) k.push_back(m + a);
  return k;
}

SuperFunction restrict_to(const SuperFunction& f, const CoordinateSubmanifold& sub) {
  const int axes = std::max(sub.m, f.max_even_axis() + 1);
  std::vector<ScalarExpr> images(axes);
  for (int a = 0; a < axes; ++a) images[a] = contains(sub.normal_even, a) ? ScalarExpr(0) : ScalarExpr::coordinate(a);
  std::vector<int> odd_target(32);
  for (int a = 0; a < 32; ++a) odd_target[a] = a;
  return transform(f, images, mask_of(sub.normal_odd), odd_target);
}

SuperFunction pull_to_submanifold(const SuperFunction& f, const CoordinateSubmanifold& sub) {
  check_function_fits(f, sub.m, sub.n, "function");
  std::vector<ScalarExpr> images(sub.m, ScalarExpr(0));
  const auto te = sub.tangent_even();
  for (std::size_t t = 0; t < te.size(); ++t) images[te[t]] = ScalarExpr::coordinate(static_cast<int>(t));
  std::vector<int> odd_target(32, 0);
  const auto to = sub.tangent_odd();
  for (std::size_t t = 0; t < to.size(); ++t) odd_target[to[t]] = static_cast<int>(t);
  return transform(f, images, mask_of(sub.normal_odd), odd_target);
}

SuperMatrix hessian_at(const SuperFunction& s, const CoordinateSubmanifold& sub) {
  sub.validate();
  check_function_fits(s, sub.m, sub.n, "function");
  for (int k = 0; k < sub.m + sub.n; ++k)
    if (!restrict_to(diff_coordinate(s, sub.m, k), sub).is_zero())
      throw std::domain_error("submanifold is not critical: dS does not vanish on it");
  const auto idx = sub.normal_indices();
  const int k = sub.codim_even(), l = sub.codim_odd();
  SuperMatrix h(k, l, k, l);
  for (int c = 0; c < k + l; ++c) {
    SuperFunction dc = diff_coordinate(s, sub.m, idx[c]);
    for (int r = 0; r < k + l; ++r) h(r, c) = restrict_to(diff_coordinate(dc, sub.m, idx[r]), sub);
  }
  return h;
}

SuperMatrix linearize_at(const SuperVectorField& w, const CoordinateSubmanifold& sub) {
  sub.validate();
  if (w.m != sub.m || w.n != sub.n) throw std::invalid_argument("vector field and submanifold on different dimensions");
  for (int j = 0; j < w.m + w.n; ++j)
    if (!restrict_to(w.coefficient(j), sub).is_zero())
      throw std::domain_error("vector field does not vanish on the submanifold");
  const int pw = w.parity();
  const auto idx = sub.normal_indices();
  const int k = sub.codim_even(), l = sub.codim_odd();
  SuperMatrix lin(k, l, k, l);
  for (int c = 0; c < k + l; ++c) {
    const int pk = idx[c] >= sub.m ? 1 : 0;
    const bool negate = (pw * pk) % 2 == 0;
    for (int r = 0; r < k + l; ++r) {
      SuperFunction e = restrict_to(diff_coordinate(w.coefficient(idx[r]), sub.m, idx[c]), sub);
      lin(r, c) = negate ? -e : e;
    }
  }
  return lin;
}

VanishingLocusReport vanishing_locus(const SuperVectorField& q, const CoordinateSubmanifold* declared) {
  VanishingLocusReport report;
  if (q.parity() != 1 && !q.is_zero()) throw std::domain_error("vanishing locus needs an odd vector field");

  // Linear parts of the generators at the origin. Coefficients of d/dx are odd and
  // can only be linear in odd coordinates; coefficients of d/dtheta are even and
  // can only be linear in even coordinates.
  Eigen::MatrixXcd odd_jac(q.m, q.n), even_jac(q.n, q.m);
  for (int i = 0; i < q.m; ++i)
    for (int a = 0; a < q.n; ++a) odd_jac(i, a) = body_at_origin(diff_odd(q.even[i], a), q.m);
  for (int b = 0; b < q.n; ++b)
    for (int i = 0; i < q.m; ++i) even_jac(b, i) = body_at_origin(diff_even(q.odd[b], i), q.m);

  CoordinateSubmanifold& n = report.locus;
  n.m = q.m;
  n.n = q.n;
  if (declared) {
    n = *declared;
    n.validate();
  } else {
    for (int i = 0; i < q.m; ++i)
      if (even_jac.col(i).norm() > 0) n.normal_even.push_back(i);
    for (int a = 0; a < q.n; ++a)
      if (odd_jac.col(a).norm() > 0) n.normal_odd.push_back(a);
  }

  report.generators_in_ideal = true;
  for (int k = 0; k < q.m + q.n; ++k)
    if (!restrict_to(q.coefficient(k), n).is_zero()) {
      report.generators_in_ideal = false;
      report.problems.push_back("Q(" + std::string(k < q.m ? "x" : "th") + std::to_string((k < q.m ? k : k - q.m) + 1) +
                                ") does not vanish on the locus");
    }

  auto rank_on = [](const Eigen::MatrixXcd& jac, const std::vector<int>& cols) {
    if (cols.empty()) return 0L;
    Eigen::MatrixXcd sub(jac.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = jac.col(cols[c]);
    if (sub.rows() == 0) return 0L;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(sub);
    lu.setThreshold(1e-12);
    return static_cast<long>(lu.rank());
  };
  report.normals_reached = rank_on(even_jac, n.normal_even) == n.codim_even() &&
                           rank_on(odd_jac, n.normal_odd) == n.codim_odd();
  if (!report.normals_reached) report.problems.push_back("generators do not cut out the normal coordinates to first order");

  if (!report.generators_in_ideal) return report;
  if (n.codim_even() != n.codim_odd()) {
    report.problems.push_back("linearization is not square: codimension " + std::to_string(n.codim_even()) + "|" +
                              std::to_string(n.codim_odd()));
    return report;
  }
  if (n.codim_even() == 0) {
    report.ber_l_iprime = SuperFunction(1);
    report.nondegenerate = true;
    return report;
  }
  SuperMatrix lin = linearize_at(q, n);
  try {
    report.ber_l_iprime = berezinian_odd(lin).coefficient;
    report.nondegenerate = std::abs(body_at_origin(report.ber_l_iprime, q.m)) > 1e-12;
  } catch (const std::exception&) {
    // zero or body-singular odd block
    report.nondegenerate = false;
  }
  if (!report.nondegenerate) report.problems.push_back("linearization is degenerate on the normal bundle");
  return report;
}

}  // namespace superloc
