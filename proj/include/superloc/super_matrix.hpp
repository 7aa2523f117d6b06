#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "superloc/dense_matrix.hpp"
#include "superloc/super_function.hpp"

namespace superloc {

/// Morphism R^{p|q} -> R^{p'|q'} in block form (A B; C D).
///
/// Column k holds the coordinates of the image of the k-th basis vector,
/// even basis vectors first. The stored matrix is the full
/// (p'+q') x (p+q) array; blocks are views computed on demand.
class SuperMatrix {
 public:
  SuperMatrix() = default;
  SuperMatrix(int p_target, int q_target, int p_source, int q_source);
  static SuperMatrix from_blocks(const DenseMatrix<SuperFunction>& a, const DenseMatrix<SuperFunction>& b,
                                 const DenseMatrix<SuperFunction>& c, const DenseMatrix<SuperFunction>& d);
  static SuperMatrix from_full(DenseMatrix<SuperFunction> full, int p_target, int p_source);
  static SuperMatrix identity(int p, int q);
  /// I' = (0 id; id 0) on R^{p|p}.
  static SuperMatrix odd_identity(int p);

  int p_target() const { return pt_; }
  int q_target() const { return qt_; }
  int p_source() const { return ps_; }
  int q_source() const { return qs_; }
  bool is_square() const { return pt_ == ps_ && qt_ == qs_; }

  DenseMatrix<SuperFunction> A() const { return full_.block(0, 0, pt_, ps_); }
  DenseMatrix<SuperFunction> B() const { return full_.block(0, ps_, pt_, qs_); }
  DenseMatrix<SuperFunction> C() const { return full_.block(pt_, 0, qt_, ps_); }
  DenseMatrix<SuperFunction> D() const { return full_.block(pt_, ps_, qt_, qs_); }
  const DenseMatrix<SuperFunction>& full() const { return full_; }
  SuperFunction& operator()(int r, int c) { return full_(r, c); }
  const SuperFunction& operator()(int r, int c) const { return full_(r, c); }

  /// 0 even, 1 odd; throws for inhomogeneous matrices. The zero matrix is even.
  int parity() const;
  bool is_homogeneous() const;
  /// Entry-wise bodies.
  DenseMatrix<ScalarExpr> body() const;

  friend SuperMatrix operator*(const SuperMatrix& f, const SuperMatrix& g);
  friend SuperMatrix operator+(const SuperMatrix& f, const SuperMatrix& g);
  friend SuperMatrix operator-(const SuperMatrix& f, const SuperMatrix& g);
  friend bool operator==(const SuperMatrix& f, const SuperMatrix& g) {
    return f.pt_ == g.pt_ && f.ps_ == g.ps_ && f.full_ == g.full_;
  }

 private:
  int pt_ = 0, qt_ = 0, ps_ = 0, qs_ = 0;
  DenseMatrix<SuperFunction> full_;
};

/// Even F: (A^t C^t; -B^t D^t). Odd F: (A^t -C^t; B^t D^t).
SuperMatrix supertranspose(const SuperMatrix& f);
/// Pi F = (D C; B A).
SuperMatrix parity_swap(const SuperMatrix& f);

/// Inverse of a square even matrix with invertible body (body inverse plus Neumann series).
SuperMatrix inverse(const SuperMatrix& f);
/// Inverse over a commutative ring whose elements have invertible pivots.
DenseMatrix<SuperFunction> inverse_even_entries(const DenseMatrix<SuperFunction>& m);

/// Ber(F) = det(A - B D^{-1} C) det(D)^{-1}.
SuperFunction berezinian_even(const SuperMatrix& f);

/// Orientation type (i, j) and the sign of the declared basis in it.
struct OrientationClass {
  int i = 0;
  int j = 0;
  int sign = 1;
};

/// Element c * b (x) ... (x) b of Ber(M)^{(x) power} or its dual, with b the
/// Berezinian basis element of the labeled coordinate basis.
struct BerLineElement {
  SuperFunction coefficient;
  std::vector<std::string> basis;
  int power = 1;
  bool dual = false;
  /// (1,1)-orientation tag relative to the labeled basis, when the element carries one.
  bool has_orientation = false;
  int orientation = 1;
};

/// Ber(E) = Ber(E I') b (x) b for odd E on R^{p|p}.
BerLineElement berezinian_odd(const SuperMatrix& e, std::vector<std::string> basis = {});

/// sgn(det(D11)^i det(D22)^j) of the bodies, evaluated at `point` (origin when empty).
int orientation_ij(const SuperMatrix& d, int i, int j, std::span<const double> point = {});

/// The even morphism B-hat with B-hat^st equal to the form matrix B.
SuperMatrix form_hat(const SuperMatrix& form);

struct FormBerezinian {
  BerLineElement ber;      // in Ber(M*)^{(x)2}
  BerLineElement ber_inv;  // in Ber(M)^{(x)2}, reciprocal coefficient
};

/// Ber(B) = Ber(B-hat) for an even nondegenerate bilinear form given by its matrix.
FormBerezinian ber_of_form(const SuperMatrix& form, std::vector<std::string> basis = {});

/// (0,1)-orientation of a form: sign of pfaff of the body of the odd-odd block.
OrientationClass or01_of_form(const SuperMatrix& form, std::span<const double> point = {});

/// Orientation of R^k from an automorphism of compact type: sgn pfaff(gE) for a
/// positive-definite g with gE skew. `g_used`, when non-null, receives g.
OrientationClass or_compact_auto(const Eigen::MatrixXd& e, Eigen::MatrixXd* g_used = nullptr);

/// sqrt(f b (x) b) = sqrt|f| b (x) or_{(1,1)}(b).
BerLineElement sqrt_ber_line(const BerLineElement& v, std::span<const double> point = {});

/// Sign of the real body of f at `point` (origin when empty); throws when it vanishes.
int body_sign(const SuperFunction& f, std::span<const double> point = {});

}  // namespace superloc
