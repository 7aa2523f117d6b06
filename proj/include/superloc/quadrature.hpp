#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "superloc/scalar_expr.hpp"

namespace superloc {

struct QuadratureConfig {
  enum class Kind {
    Auto,          // Gauss-Hermite for Gaussian terms, box for the rest
    GaussHermite,  // every term must carry a decaying Gaussian
    Box,           // everything on the box
  };

  Kind kind = Kind::Auto;
  /// Integration box per even axis; empty means "no box".
  std::vector<std::pair<double, double>> box;
  /// Upper bound on the Gauss-Hermite order per axis.
  int points = 64;
  double tol = 1e-8;
  /// Cap on Gauss-Legendre nodes per axis before giving up.
  int max_nodes_per_axis = 1 << 16;

  /// Defaults, with `points` taken from SUPERLOC_QUAD_POINTS when set.
  static QuadratureConfig from_environment();
};

struct QuadratureResult {
  Complex value;
  /// |last refinement - previous| for the box part; 0 when only Gaussian terms occurred.
  double error_estimate = 0.0;
  long evaluations = 0;
  bool used_box = false;
};

/// Nodes and weights of the n-point rule for weight exp(-t^2) on R.
const std::pair<std::vector<double>, std::vector<double>>& gauss_hermite_rule(int n);
/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_rule(int n);

/// Integral over R^m of a scalar expression.
///
/// Terms c * x^a * exp(P) with P quadratic and Re P negative definite in its
/// quadratic part are integrated by Gauss-Hermite after completing the square,
/// with complex nodes when P is complex. Everything else is integrated on the
/// configured box by composite Gauss-Legendre with panel doubling.
QuadratureResult integrate_even_detailed(const ScalarExpr& e, int m, const QuadratureConfig& config);
Complex integrate_even(const ScalarExpr& e, int m, const QuadratureConfig& config);

/// Composite tensor Gauss-Legendre on a box with panel doubling until the
/// relative change drops below `tol`. `initial_panels` sets the starting mesh per axis.
QuadratureResult integrate_box(const std::function<Complex(std::span<const double>)>& f,
                               std::span<const std::pair<double, double>> box, double tol,
                               std::vector<int> initial_panels, int max_nodes_per_axis);

}  // namespace superloc
