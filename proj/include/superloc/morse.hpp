#pragma once

#include <span>
#include <string>
#include <vector>

#include "superloc/calculus.hpp"
#include "superloc/dense_matrix.hpp"
#include "superloc/super_function.hpp"

namespace superloc {

/// Symplectic Gram-Schmidt on a constant skew matrix: T with T^t S T equal to
/// 1/2 blockdiag((0 -1; 1 0), ...). Pivoting takes the lowest-index partner
/// (largest magnitude when the entries are floating).
DenseMatrix<Number> symplectic_basis(const DenseMatrix<Number>& s);

struct SymplecticNormalization {
  /// Set when every entry of S is constant; then `exact` holds T.
  bool constant = false;
  DenseMatrix<Number> exact;
  /// T at each sample point (all equal to `exact` in the constant case).
  std::vector<DenseMatrix<Number>> at_samples;
};

/// Pointwise symplectic normalization of a skew matrix of body functions.
SymplecticNormalization symplectic_normalize(const DenseMatrix<ScalarExpr>& s,
                                             std::span<const std::vector<double>> samples);

/// Congruence diagonalization of a symmetric matrix: P with P^t Q P = diag(signs),
/// positive signs first. Entries are exact when the square roots involved are.
struct SymmetricNormalization {
  DenseMatrix<Number> p;
  std::vector<int> signs;
};
SymmetricNormalization diagonalize_symmetric(const DenseMatrix<Number>& q);

/// One substitution: every old coordinate written in the new coordinates.
struct CoordinateStep {
  std::string kind;  // "even-linear", "odd-linear", "G", "F"
  int level = 0;     // J-degree of the eliminated terms (0 for the linear steps)
  std::vector<SuperFunction> even_images;
  std::vector<SuperFunction> odd_images;
};

/// Composition of substitutions, applied in order: the first step expresses the
/// original coordinates in terms of the next chart, and so on.
struct CoordinateChange {
  int m = 0;
  int n = 0;
  std::vector<CoordinateStep> steps;

  /// f expressed in the final coordinates.
  SuperFunction pull(const SuperFunction& f) const;
  /// Original coordinates as functions of the final ones.
  CoordinateStep composed() const;
  bool is_identity() const { return steps.empty(); }
};

/// new = old - (image - coordinate), i.e. the first-order inverse of a step.
/// Linear steps are inverted exactly.
CoordinateStep truncated_inverse(const CoordinateStep& step, int m, int n);

/// Minimum over terms of (number of odd factors + degree in the given even axes);
/// -1 for zero.
int filtration_order(const SuperFunction& f, const std::vector<int>& axes);

/// Smallest number of odd factors over all nonzero components; -1 for zero.
int odd_degree(const SuperFunction& f);

/// True when f vanishes on `sub` together with its normal first derivatives.
bool in_ideal_squared(const SuperFunction& f, const CoordinateSubmanifold& sub);

struct MorseNormalForm {
  CoordinateChange change;
  SuperFunction normalized;  // S in the final coordinates
  SuperFunction standard;    // S(p) + sum signs * x^2 + sum theta theta over normal pairs
  Number critical_value;
  std::vector<int> signs;    // per normal even coordinate, in the order of sub.normal_even
  SuperFunction odd_residual;  // part of normalized - standard with odd factors
  ScalarExpr even_remainder;   // body of normalized - standard (third order and up)
  bool odd_sector_standard = false;
  std::vector<std::string> trace;
};

/// Normal form of a polynomial even S near the origin on its nondegenerate critical
/// coordinate submanifold: terms with up to 2 a_max - 1 odd factors are brought to
/// the standard form; a_max > n/2 clears the whole odd sector.
MorseNormalForm normalize_jet(const SuperFunction& s, const CoordinateSubmanifold& sub, int a_max);

}  // namespace superloc
