#include "superloc/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace superloc {

namespace {

constexpr int kNodesPerPanel = 8;
constexpr double kPointsPerPeriod = 16.0;
constexpr long kMaxEvaluationsPerLevel = 1L << 25;

using Rule = std::pair<std::vector<double>, std::vector<double>>;

// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
Rule golub_welsch(int n, const std::function<double(int)>& offdiag_sq, double mu0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(offdiag_sq(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule rule;
  rule.first.resize(n);
  rule.second.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.first[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    rule.second[i] = mu0 * v0 * v0;
  }
  return rule;
}

const Rule& cached_rule(std::map<int, Rule>& cache, int n, const std::function<Rule()>& make) {
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make()).first;
  return it->second;
}

// Splits P into -x^T M x + b^T x + c. Returns false unless P is a polynomial of degree <= 2.
bool quadratic_parts(const ScalarExpr& p, int m, Eigen::MatrixXcd* M, Eigen::VectorXcd* b, Complex* c) {
  if (!p.is_polynomial() || p.polynomial_degree() > 2 || p.max_axis() >= m) return false;
  *M = Eigen::MatrixXcd::Zero(m, m);
  *b = Eigen::VectorXcd::Zero(m);
  *c = 0.0;
  for (const auto& [mono, coeff] : p.terms()) {
    Complex v = coeff.to_complex();
    std::vector<int> axes;
    for (int a = 0; a < static_cast<int>(mono.powers.size()); ++a)
      for (int k = 0; k < mono.powers[a]; ++k) axes.push_back(a);
    if (axes.empty()) {
      *c += v;
    } else if (axes.size() == 1) {
      (*b)(axes[0]) += v;
    } else if (axes[0] == axes[1]) {
      (*M)(axes[0], axes[0]) -= v;
    } else {
      (*M)(axes[0], axes[1]) -= v / 2.0;
      (*M)(axes[1], axes[0]) -= v / 2.0;
    }
  }
  return true;
}

bool is_gaussian_term(const Monomial& mono, int m) {
  if (!mono.specials.empty() || !mono.exp_arg || m == 0) return false;
  Eigen::MatrixXcd M;
  Eigen::VectorXcd b;
  Complex c;
  if (!quadratic_parts(*mono.exp_arg, m, &M, &b, &c)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(M.real());
  return llt.info() == Eigen::Success;
}

// Integral of coeff * x^powers * exp(P) over R^m with Re P negative definite.
Complex integrate_gaussian(const Monomial& mono, const Number& coeff, int m, int max_order, long* evaluations) {
  Eigen::MatrixXcd M;
  Eigen::VectorXcd b;
  Complex c;
  quadratic_parts(*mono.exp_arg, m, &M, &b, &c);
  // -x^T M x + b^T x = -(x - x0)^T M (x - x0) + b^T x0 / 2, x0 = M^{-1} b / 2
  Eigen::VectorXcd x0 = M.partialPivLu().solve(b) / 2.0;
  Complex shift = c + (b.transpose() * x0)(0) / 2.0;

  // Complex symmetric LDL^T without pivoting; pivots have positive real part.
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Identity(m, m);
  Eigen::VectorXcd d(m);
  Eigen::MatrixXcd S = M;
  for (int k = 0; k < m; ++k) {
    d(k) = S(k, k);
    for (int i = k + 1; i < m; ++i) L(i, k) = S(i, k) / d(k);
    for (int i = k + 1; i < m; ++i)
      for (int j = k + 1; j < m; ++j) S(i, j) -= L(i, k) * S(k, j);
  }
  // x = x0 + L^{-T} diag(1/sqrt(d)) w, dx = prod(1/sqrt(d)) dw
  Eigen::MatrixXcd T = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(m, m));
  Complex jac = 1.0;
  for (int k = 0; k < m; ++k) {
    Complex r = std::sqrt(d(k));
    T.col(k) /= r;
    jac /= r;
  }

  int degree = mono.degree();
  int order = std::max(1, std::min(max_order, degree / 2 + 2));
  const auto& [nodes, weights] = gauss_hermite_rule(order);
  std::vector<int> idx(m, 0);
  Complex sum = 0.0;
  Eigen::VectorXcd w(m);
  for (;;) {
    double weight = 1.0;
    for (int k = 0; k < m; ++k) {
      w(k) = nodes[idx[k]];
      weight *= weights[idx[k]];
    }
    Eigen::VectorXcd x = x0 + T * w;
    Complex v = weight;
    for (int a = 0; a < static_cast<int>(mono.powers.size()); ++a)
      for (int k = 0; k < mono.powers[a]; ++k) v *= x(a);
    sum += v;
    ++*evaluations;
    int k = 0;
    while (k < m && ++idx[k] == order) idx[k++] = 0;
    if (k == m) break;
  }
  return coeff.to_complex() * std::exp(shift) * jac * sum;
}

// Largest |grad Im P| over a coarse grid of the box, P ranging over exponent arguments.
std::vector<double> oscillation_rates(const ScalarExpr& e, std::span<const std::pair<double, double>> box) {
  const int m = static_cast<int>(box.size());
  std::vector<double> rate(m, 0.0);
  std::vector<std::vector<ScalarExpr>> grads;
  for (const auto& [mono, coeff] : e.terms()) {
    if (!mono.exp_arg) continue;
    std::vector<ScalarExpr> g;
    for (int a = 0; a < m; ++a) g.push_back(diff_scalar(*mono.exp_arg, a));
    grads.push_back(std::move(g));
  }
  if (grads.empty() || m == 0) return rate;
  const int samples = m == 1 ? 65 : (m == 2 ? 17 : 9);
  std::vector<int> idx(m, 0);
  std::vector<double> x(m);
  for (;;) {
    for (int a = 0; a < m; ++a)
      x[a] = box[a].first + (box[a].second - box[a].first) * idx[a] / (samples - 1.0);
    for (const auto& g : grads)
      for (int a = 0; a < m; ++a) rate[a] = std::max(rate[a], std::abs(eval_scalar(g[a], x).imag()));
    int k = 0;
    while (k < m && ++idx[k] == samples) idx[k++] = 0;
    if (k == m) break;
  }
  return rate;
}

Complex tensor_gauss_legendre(const std::function<Complex(std::span<const double>)>& f,
                              std::span<const std::pair<double, double>> box, const std::vector<int>& panels,
                              double* l1, long* evaluations) {
  const int m = static_cast<int>(box.size());
  const auto& [gx, gw] = gauss_legendre_rule(kNodesPerPanel);
  std::vector<std::vector<double>> nodes(m), weights(m);
  for (int a = 0; a < m; ++a) {
    double h = (box[a].second - box[a].first) / panels[a];
    for (int p = 0; p < panels[a]; ++p) {
      double mid = box[a].first + (p + 0.5) * h;
      for (int q = 0; q < kNodesPerPanel; ++q) {
        nodes[a].push_back(mid + 0.5 * h * gx[q]);
        weights[a].push_back(0.5 * h * gw[q]);
      }
    }
  }
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> x(m);
  Complex sum = 0.0;
  *l1 = 0.0;
  for (;;) {
    double w = 1.0;
    for (int a = 0; a < m; ++a) {
      x[a] = nodes[a][idx[a]];
      w *= weights[a][idx[a]];
    }
    Complex v = f(x);
    sum += w * v;
    *l1 += w * std::abs(v);
    ++*evaluations;
    int k = 0;
    while (k < m && ++idx[k] == nodes[k].size()) idx[k++] = 0;
    if (k == m) break;
  }
  return sum;
}

}  // namespace

QuadratureConfig QuadratureConfig::from_environment() {
  QuadratureConfig config;
  if (const char* env = std::getenv("SUPERLOC_QUAD_POINTS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 512) config.points = static_cast<int>(v);
  }
  return config;
}

const Rule& gauss_hermite_rule(int n) {
  static std::map<int, Rule> cache;
  return cached_rule(cache, n, [n] {
    return golub_welsch(n, [](int k) { return k / 2.0; }, std::sqrt(std::numbers::pi));
  });
}

const Rule& gauss_legendre_rule(int n) {
  static std::map<int, Rule> cache;
  return cached_rule(cache, n, [n] {
    return golub_welsch(n, [](int k) { return k * k / (4.0 * k * k - 1.0); }, 2.0);
  });
}

QuadratureResult integrate_box(const std::function<Complex(std::span<const double>)>& f,
                               std::span<const std::pair<double, double>> box, double tol,
                               std::vector<int> panels, int max_nodes_per_axis) {
  const int m = static_cast<int>(box.size());
  QuadratureResult result;
  result.used_box = true;
  if (m == 0) {
    result.value = f({});
    result.evaluations = 1;
    return result;
  }
  panels.resize(m, 1);
  for (int& p : panels) p = std::max(p, 1);
  double l1 = 0.0;
  Complex previous = tensor_gauss_legendre(f, box, panels, &l1, &result.evaluations);
  for (;;) {
    long total = 1;
    for (int a = 0; a < m; ++a) {
      panels[a] *= 2;
      if (panels[a] * kNodesPerPanel > max_nodes_per_axis) {
        throw std::runtime_error("quadrature did not converge within the node budget");
      }
      total *= panels[a] * kNodesPerPanel;
    }
    if (total > kMaxEvaluationsPerLevel) throw std::runtime_error("quadrature did not converge within the node budget");
    Complex current = tensor_gauss_legendre(f, box, panels, &l1, &result.evaluations);
    double change = std::abs(current - previous);
    if (change <= tol * std::max(std::abs(current), 1e-6 * l1) || change <= 1e-15 * l1) {
      result.value = current;
      result.error_estimate = change;
      return result;
    }
    previous = current;
  }
}

QuadratureResult integrate_even_detailed(const ScalarExpr& e, int m, const QuadratureConfig& config) {
  if (e.max_axis() >= m) throw std::invalid_argument("integrand uses more even axes than the domain has");
  QuadratureResult result;
  if (m == 0) {
    result.value = eval_scalar(e, {});
    result.evaluations = 1;
    return result;
  }
  ScalarExpr::TermMap rest;
  Complex gaussian = 0.0;
  for (const auto& [mono, coeff] : e.terms()) {
    bool gaussian_ok = config.kind != QuadratureConfig::Kind::Box && is_gaussian_term(mono, m);
    if (gaussian_ok) {
      gaussian += integrate_gaussian(mono, coeff, m, config.points, &result.evaluations);
    } else if (config.kind == QuadratureConfig::Kind::GaussHermite) {
      throw std::domain_error("Gauss-Hermite quadrature requested for a term without a decaying Gaussian");
    } else {
      rest.emplace(mono, coeff);
    }
  }
  result.value = gaussian;
  if (rest.empty()) return result;
  if (config.box.size() != static_cast<std::size_t>(m)) {
    throw std::domain_error("integrand does not decay and no finite box is configured");
  }
  ScalarExpr remainder = ScalarExpr::from_terms(std::move(rest));
  std::vector<double> rate = oscillation_rates(remainder, config.box);
  std::vector<int> panels(m);
  for (int a = 0; a < m; ++a) {
    double length = config.box[a].second - config.box[a].first;
    double periods = length * rate[a] / (2.0 * std::numbers::pi);
    panels[a] = std::max(2, static_cast<int>(std::ceil(periods * kPointsPerPeriod / kNodesPerPanel)));
  }
  QuadratureResult box = integrate_box([&](std::span<const double> x) { return eval_scalar(remainder, x); },
                                       config.box, config.tol, panels, config.max_nodes_per_axis);
  result.value += box.value;
  result.error_estimate = box.error_estimate;
  result.evaluations += box.evaluations;
  result.used_box = true;
  return result;
}

Complex integrate_even(const ScalarExpr& e, int m, const QuadratureConfig& config) {
  return integrate_even_detailed(e, m, config).value;
}

}  // namespace superloc
