#pragma once

#include <string>
#include <vector>

#include "superloc/quadrature.hpp"
#include "superloc/super_function.hpp"
#include "superloc/super_matrix.hpp"

namespace superloc {

/// V = sum_i a^i d/dx^i + sum_alpha b^alpha d/dtheta^alpha, coefficients on the left.
struct SuperVectorField {
  int m = 0;
  int n = 0;
  std::vector<SuperFunction> even;  // a^i
  std::vector<SuperFunction> odd;   // b^alpha

  SuperVectorField() = default;
  SuperVectorField(int m_, int n_) : m(m_), n(n_), even(m_), odd(n_) {}
  static SuperVectorField partial_even(int m, int n, int axis);
  static SuperVectorField partial_odd(int m, int n, int index);

  /// Coefficient of the K-th coordinate field, even coordinates first.
  const SuperFunction& coefficient(int k) const { return k < m ? even[k] : odd[k - m]; }
  SuperFunction& coefficient(int k) { return k < m ? even[k] : odd[k - m]; }

  /// 0 or 1; throws for inhomogeneous fields. The zero field is even.
  int parity() const;
  bool is_zero() const;

  friend SuperVectorField operator+(const SuperVectorField& v, const SuperVectorField& w);
  friend SuperVectorField operator-(const SuperVectorField& v, const SuperVectorField& w);
  friend bool operator==(const SuperVectorField& v, const SuperVectorField& w);
};

SuperVectorField scale(const SuperVectorField& v, const Number& c);
/// f * V, coefficient-wise on the left.
SuperVectorField multiply(const SuperFunction& f, const SuperVectorField& v);

SuperFunction apply_vf(const SuperVectorField& v, const SuperFunction& f);
/// [V, W] = VW - (-1)^{p(V)p(W)} WV.
SuperVectorField bracket(const SuperVectorField& v, const SuperVectorField& w);
/// Q^2 = [Q, Q] / 2 for odd Q.
SuperVectorField square(const SuperVectorField& q);

/// mu = f [dx^1 ... dx^m dtheta^1 ... dtheta^n], with an orientation sign relative to
/// the chart's standard orientation. g * mu has coefficient g f.
struct Density {
  int m = 0;
  int n = 0;
  SuperFunction coefficient;
  int orientation = 1;
};

/// Superdivergence: coefficient sum_i d_i(a^i f) + (-1)^{p(V)+1} sum_alpha d_alpha(b^alpha f).
Density lie_derivative_density(const SuperVectorField& v, const Density& mu);

/// orientation * integral over R^m of the coefficient of theta^1...theta^n.
Complex berezin_integrate(const Density& mu, const QuadratureConfig& config);
QuadratureResult berezin_integrate_detailed(const Density& mu, const QuadratureConfig& config);

/// Coordinate subsupermanifold through the origin: the listed coordinates vanish on it.
struct CoordinateSubmanifold {
  int m = 0;
  int n = 0;
  std::vector<int> normal_even;
  std::vector<int> normal_odd;

  void validate() const;
  std::vector<int> tangent_even() const;
  std::vector<int> tangent_odd() const;
  int codim_even() const { return static_cast<int>(normal_even.size()); }
  int codim_odd() const { return static_cast<int>(normal_odd.size()); }
  /// Normal coordinate fields in order: even normals, then odd normals (as ambient K indices).
  std::vector<int> normal_indices() const;
};

/// f|_N in ambient coordinates: normal even coordinates set to 0, normal odd ones to 0.
SuperFunction restrict_to(const SuperFunction& f, const CoordinateSubmanifold& sub);
/// f|_N rewritten in the coordinates of N (tangent coordinates renumbered in order).
SuperFunction pull_to_submanifold(const SuperFunction& f, const CoordinateSubmanifold& sub);
/// Left derivative along ambient coordinate K (even first).
SuperFunction diff_coordinate(const SuperFunction& f, int m, int k);

/// Matrix H_{JK} = d_J d_K S |_N over normal directions (even normals first).
SuperMatrix hessian_at(const SuperFunction& s, const CoordinateSubmanifold& sub);

/// Matrix of [W, d_K] = -(-1)^{p(W)p(K)} sum_J d_K(W^J) d_J restricted to N and
/// projected to normal directions; column K holds the image of d_K.
SuperMatrix linearize_at(const SuperVectorField& w, const CoordinateSubmanifold& sub);

struct VanishingLocusReport {
  CoordinateSubmanifold locus;
  bool generators_in_ideal = false;
  bool normals_reached = false;
  bool nondegenerate = false;
  SuperFunction ber_l_iprime;
  std::vector<std::string> problems;

  bool is_coordinate_locus() const { return generators_in_ideal && normals_reached; }
};

/// Checks that the ideal generated by Q(x^i), Q(theta^alpha) is the coordinate ideal of
/// `declared` (discovered from the linear parts of the generators when null), then
/// checks that the linearization is an automorphism of the normal bundle.
VanishingLocusReport vanishing_locus(const SuperVectorField& q, const CoordinateSubmanifold* declared);

}  // namespace superloc
