#include "superloc/super_matrix.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <stdexcept>

namespace superloc {

namespace {

std::vector<double> point_or_origin(std::span<const double> point, int needed) {
  std::vector<double> x(point.begin(), point.end());
  if (static_cast<int>(x.size()) < needed) x.resize(needed, 0.0);
  return x;
}

double body_value(const SuperFunction& f, std::span<const double> point) {
  std::vector<double> x = point_or_origin(point, f.body().max_axis() + 1);
  Complex v = eval_scalar(f.body(), x);
  return v.real();
}

Eigen::MatrixXd body_matrix(const DenseMatrix<SuperFunction>& m, std::span<const double> point) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = body_value(m(i, j), point);
  return out;
}

// Gauss-Jordan over the commutative ring of scalar expressions, pivoting on invertible elements.
DenseMatrix<ScalarExpr> invert_scalar_matrix(DenseMatrix<ScalarExpr> a) {
  const int n = a.rows();
  DenseMatrix<ScalarExpr> inv = DenseMatrix<ScalarExpr>::identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (is_invertible_scalar(a(r, col))) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw std::domain_error("matrix body is singular or has no invertible pivot in the grammar");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    ScalarExpr p = invert_scalar(a(col, col));
    for (int c = 0; c < n; ++c) {
      a(col, c) *= p;
      inv(col, c) *= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || a(r, col).is_zero()) continue;
      ScalarExpr factor = a(r, col);
      for (int c = 0; c < n; ++c) {
        a(r, c) -= factor * a(col, c);
        inv(r, c) -= factor * inv(col, c);
      }
    }
  }
  return inv;
}

// m^{-1} = sum_k (-m0^{-1} N)^k m0^{-1} with m0 the body and N the nilpotent rest.
DenseMatrix<SuperFunction> neumann_inverse(const DenseMatrix<SuperFunction>& m,
                                           const DenseMatrix<SuperFunction>& body_inverse) {
  const int n = m.rows();
  DenseMatrix<SuperFunction> nil(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) nil(i, j) = m(i, j).soul();
  DenseMatrix<SuperFunction> step = -(body_inverse * nil);
  DenseMatrix<SuperFunction> term = body_inverse;
  DenseMatrix<SuperFunction> sum = body_inverse;
  DenseMatrix<SuperFunction> zero(n, n);
  for (int k = 0; k < 64; ++k) {
    term = step * term;
    if (term == zero) return sum;
    sum += term;
  }
  throw std::logic_error("Neumann series did not terminate");
}

DenseMatrix<SuperFunction> lift(const DenseMatrix<ScalarExpr>& m) {
  return m.map([](const ScalarExpr& e) { return SuperFunction(e); });
}

}  // namespace

SuperMatrix::SuperMatrix(int p_target, int q_target, int p_source, int q_source)
    : pt_(p_target), qt_(q_target), ps_(p_source), qs_(q_source), full_(p_target + q_target, p_source + q_source) {}

SuperMatrix SuperMatrix::from_blocks(const DenseMatrix<SuperFunction>& a, const DenseMatrix<SuperFunction>& b,
                                     const DenseMatrix<SuperFunction>& c, const DenseMatrix<SuperFunction>& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols()) {
    throw std::invalid_argument("inconsistent supermatrix block shapes");
  }
  SuperMatrix f(a.rows(), c.rows(), a.cols(), b.cols());
  f.full_.set_block(0, 0, a);
  f.full_.set_block(0, a.cols(), b);
  f.full_.set_block(a.rows(), 0, c);
  f.full_.set_block(a.rows(), a.cols(), d);
  return f;
}

SuperMatrix SuperMatrix::from_full(DenseMatrix<SuperFunction> full, int p_target, int p_source) {
  SuperMatrix f(p_target, full.rows() - p_target, p_source, full.cols() - p_source);
  f.full_ = std::move(full);
  return f;
}

SuperMatrix SuperMatrix::identity(int p, int q) {
  return from_full(DenseMatrix<SuperFunction>::identity(p + q), p, p);
}

SuperMatrix SuperMatrix::odd_identity(int p) {
  SuperMatrix f(p, p, p, p);
  for (int i = 0; i < p; ++i) {
    f.full_(i, p + i) = SuperFunction(1);
    f.full_(p + i, i) = SuperFunction(1);
  }
  return f;
}

bool SuperMatrix::is_homogeneous() const {
  try {
    parity();
    return true;
  } catch (const std::domain_error&) {
    return false;
  }
}

int SuperMatrix::parity() const {
  bool can_be_even = true, can_be_odd = true;
  for (int i = 0; i < full_.rows(); ++i)
    for (int j = 0; j < full_.cols(); ++j) {
      const SuperFunction& e = full_(i, j);
      if (e.is_zero()) continue;
      bool diagonal_block = (i < pt_) == (j < ps_);
      bool even = e.is_even(), odd = e.is_odd();
      if (diagonal_block) {
        can_be_even &= even;
        can_be_odd &= odd;
      } else {
        can_be_even &= odd;
        can_be_odd &= even;
      }
    }
  if (can_be_even) return 0;
  if (can_be_odd) return 1;
  throw std::domain_error("supermatrix is not homogeneous");
}

DenseMatrix<ScalarExpr> SuperMatrix::body() const {
  return full_.map([](const SuperFunction& f) { return f.body(); });
}

SuperMatrix operator*(const SuperMatrix& f, const SuperMatrix& g) {
  if (f.ps_ != g.pt_ || f.qs_ != g.qt_) throw std::invalid_argument("supermatrix product dimension mismatch");
  return SuperMatrix::from_full(f.full_ * g.full_, f.pt_, g.ps_);
}

SuperMatrix operator+(const SuperMatrix& f, const SuperMatrix& g) {
  if (f.pt_ != g.pt_ || f.ps_ != g.ps_) throw std::invalid_argument("supermatrix sum dimension mismatch");
  return SuperMatrix::from_full(f.full_ + g.full_, f.pt_, f.ps_);
}

SuperMatrix operator-(const SuperMatrix& f, const SuperMatrix& g) {
  if (f.pt_ != g.pt_ || f.ps_ != g.ps_) throw std::invalid_argument("supermatrix difference dimension mismatch");
  return SuperMatrix::from_full(f.full_ - g.full_, f.pt_, f.ps_);
}

SuperMatrix supertranspose(const SuperMatrix& f) {
  bool odd = f.parity() == 1;
  DenseMatrix<SuperFunction> a = f.A().transpose(), b = f.B().transpose(), c = f.C().transpose(),
                             d = f.D().transpose();
  if (odd) {
    return SuperMatrix::from_blocks(a, -c, b, d);
  }
  return SuperMatrix::from_blocks(a, c, -b, d);
}

SuperMatrix parity_swap(const SuperMatrix& f) { return SuperMatrix::from_blocks(f.D(), f.C(), f.B(), f.A()); }

DenseMatrix<SuperFunction> inverse_even_entries(const DenseMatrix<SuperFunction>& m) {
  if (!m.is_square()) throw std::invalid_argument("inverse of a non-square matrix");
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!m(i, j).is_even()) throw std::invalid_argument("inverse_even_entries needs even entries");
  DenseMatrix<ScalarExpr> body = m.map([](const SuperFunction& f) { return f.body(); });
  return neumann_inverse(m, lift(invert_scalar_matrix(body)));
}

SuperMatrix inverse(const SuperMatrix& f) {
  if (!f.is_square()) throw std::invalid_argument("inverse of a non-square supermatrix");
  if (f.parity() != 0) throw std::invalid_argument("inverse is implemented for even supermatrices");
  const int p = f.p_source(), q = f.q_source();
  DenseMatrix<ScalarExpr> a0 = f.A().map([](const SuperFunction& e) { return e.body(); });
  DenseMatrix<ScalarExpr> d0 = f.D().map([](const SuperFunction& e) { return e.body(); });
  DenseMatrix<SuperFunction> body_inv(p + q, p + q);
  body_inv.set_block(0, 0, lift(invert_scalar_matrix(a0)));
  body_inv.set_block(p, p, lift(invert_scalar_matrix(d0)));
  return SuperMatrix::from_full(neumann_inverse(f.full(), body_inv), p, p);
}

SuperFunction berezinian_even(const SuperMatrix& f) {
  if (!f.is_square()) throw std::invalid_argument("Berezinian of a non-square supermatrix");
  if (f.parity() != 0) throw std::invalid_argument("berezinian_even needs an even supermatrix");
  DenseMatrix<SuperFunction> d_inv = inverse_even_entries(f.D());
  SuperFunction det_schur = determinant(f.A() - f.B() * d_inv * f.C());
  SuperFunction det_d = determinant(f.D());
  return det_schur * inverse_even(det_d);
}

BerLineElement berezinian_odd(const SuperMatrix& e, std::vector<std::string> basis) {
  if (!e.is_square() || e.p_source() != e.q_source()) {
    throw std::invalid_argument("odd Berezinian needs a square p|p supermatrix");
  }
  if (e.parity() != 1) throw std::invalid_argument("berezinian_odd needs an odd supermatrix");
  BerLineElement out;
  out.coefficient = berezinian_even(e * SuperMatrix::odd_identity(e.p_source()));
  out.basis = std::move(basis);
  out.power = 2;
  return out;
}

int orientation_ij(const SuperMatrix& d, int i, int j, std::span<const double> point) {
  if (!d.is_square() || d.parity() != 0) throw std::invalid_argument("orientation needs a square even matrix");
  int sign = 1;
  auto block_sign = [&](const DenseMatrix<SuperFunction>& blk) {
    if (blk.rows() == 0) return 1;
    double det = body_matrix(blk, point).determinant();
    if (det == 0.0) throw std::domain_error("body-singular diagonal block");
    return det > 0 ? 1 : -1;
  };
  if (i) sign *= block_sign(d.A());
  if (j) sign *= block_sign(d.D());
  return sign;
}

SuperMatrix form_hat(const SuperMatrix& form) {
  if (!form.is_square()) throw std::invalid_argument("bilinear form must be square");
  if (form.parity() != 0) throw std::invalid_argument("bilinear form must be even");
  return SuperMatrix::from_blocks(form.A().transpose(), -form.C().transpose(), form.B().transpose(),
                                  form.D().transpose());
}

FormBerezinian ber_of_form(const SuperMatrix& form, std::vector<std::string> basis) {
  SuperFunction ber = berezinian_even(form_hat(form));
  FormBerezinian out;
  out.ber.coefficient = ber;
  out.ber.basis = basis;
  out.ber.power = 2;
  out.ber.dual = true;
  out.ber_inv.coefficient = inverse_even(ber);
  out.ber_inv.basis = std::move(basis);
  out.ber_inv.power = 2;
  return out;
}

OrientationClass or01_of_form(const SuperMatrix& form, std::span<const double> point) {
  if (!form.is_square() || form.parity() != 0) throw std::invalid_argument("or01 needs an even square form");
  Eigen::MatrixXd d = body_matrix(form.D(), point);
  const int q = static_cast<int>(d.rows());
  DenseMatrix<double> skew(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) skew(i, j) = d(i, j);
  double pf = pfaffian(skew);
  if (pf == 0.0) throw std::domain_error("odd-odd block of the form is degenerate");
  return OrientationClass{0, 1, pf > 0 ? 1 : -1};
}

OrientationClass or_compact_auto(const Eigen::MatrixXd& e, Eigen::MatrixXd* g_used) {
  const int k = static_cast<int>(e.rows());
  if (e.cols() != k) throw std::invalid_argument("automorphism must be square");
  if (k % 2) throw std::domain_error("automorphism of compact type on an odd-dimensional space is singular");
  if (std::abs(e.determinant()) < 1e-12) throw std::domain_error("automorphism is not invertible");

  // Symmetric basis S_{ab}, a <= b; linear map g -> g E + E^t g.
  std::vector<Eigen::MatrixXd> basis;
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
      s(a, b) = s(b, a) = 1.0;
      basis.push_back(s);
    }
  const int dim = static_cast<int>(basis.size());
  Eigen::MatrixXd op(k * k, dim);
  for (int c = 0; c < dim; ++c) {
    Eigen::MatrixXd img = basis[c] * e + e.transpose() * basis[c];
    op.col(c) = Eigen::Map<Eigen::VectorXd>(img.data(), k * k);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
  lu.setThreshold(1e-10);
  Eigen::MatrixXd kernel = lu.kernel();
  if (lu.dimensionOfKernel() == 0) throw std::domain_error("no symmetric g makes gE skew: E is not of compact type");

  // Average (e^{tE})^t e^{tE} over a grid, then project onto the kernel.
  Eigen::MatrixXd g0 = Eigen::MatrixXd::Zero(k, k);
  for (int s = 0; s < 200; ++s) {
    Eigen::MatrixXd flow = (0.1 * s * e).exp();
    g0 += flow.transpose() * flow;
  }
  g0 /= 200.0;
  Eigen::VectorXd target(dim);
  for (int c = 0; c < dim; ++c) target(c) = g0.cwiseProduct(basis[c]).sum();
  Eigen::MatrixXd gram(kernel.cols(), kernel.cols());
  Eigen::VectorXd rhs(kernel.cols());
  auto as_matrix = [&](const Eigen::VectorXd& coords) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
    for (int c = 0; c < dim; ++c) g += coords(c) * basis[c];
    return g;
  };
  for (int i = 0; i < kernel.cols(); ++i) {
    Eigen::MatrixXd gi = as_matrix(kernel.col(i));
    rhs(i) = gi.cwiseProduct(g0).sum();
    for (int j = 0; j < kernel.cols(); ++j) gram(i, j) = gi.cwiseProduct(as_matrix(kernel.col(j))).sum();
  }
  Eigen::MatrixXd g = as_matrix(kernel * gram.ldlt().solve(rhs));
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("no positive-definite g makes gE skew: E is not of compact type");
  }
  Eigen::MatrixXd ge = g * e;
  DenseMatrix<double> skew(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) skew(i, j) = i == j ? 0.0 : (i < j ? 0.5 * (ge(i, j) - ge(j, i)) : 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < i; ++j) skew(i, j) = -skew(j, i);
  if (g_used) *g_used = g;
  double pf = pfaffian(skew);
  return OrientationClass{1, 0, pf > 0 ? 1 : -1};
}

int body_sign(const SuperFunction& f, std::span<const double> point) {
  double v = body_value(f, point);
  if (v == 0.0) throw std::domain_error("body vanishes; sign undefined");
  return v > 0 ? 1 : -1;
}

BerLineElement sqrt_ber_line(const BerLineElement& v, std::span<const double> point) {
  if (v.power != 2) throw std::invalid_argument("square root needs a tensor-square element");
  int s = body_sign(v.coefficient, point);
  BerLineElement out;
  out.coefficient = sqrt_positive(s > 0 ? v.coefficient : -v.coefficient);
  out.basis = v.basis;
  out.power = 1;
  out.dual = v.dual;
  out.has_orientation = true;
  out.orientation = 1;
  return out;
}

}  // namespace superloc
