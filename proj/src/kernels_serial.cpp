#include "kernel_rows.hpp"
#include "sgcn/errors.hpp"
#include "sgcn/kernels.hpp"

namespace sgcn::kernels::serial {

void spmm(const SparseMatrix& a, const Matrix& x, Matrix& out) {
  if (a.cols() != x.rows()) throw ShapeError("spmm: row count mismatch");
  out.resize(a.rows(), x.cols());
  for (Index i = 0; i < a.rows(); ++i) detail::spmm_row(a, x, out, i);
}

void band_apply(const DenseMatrix& basis, const Vector& scale, const Matrix& x, Matrix& out) {
  if (basis.rows() != x.rows() || scale.size() != basis.cols())
    throw ShapeError("band_apply: shape mismatch");
  Matrix coef(basis.cols(), x.cols());
  for (Index j = 0; j < basis.cols(); ++j) detail::band_coef_row(basis, scale, x, coef, j);
  out.resize(basis.rows(), x.cols());
  for (Index i = 0; i < basis.rows(); ++i) detail::band_out_row(basis, coef, out, i);
}

void dense_apply(const DenseMatrix& a, const Matrix& x, Matrix& out) {
  if (a.cols() != x.rows()) throw ShapeError("dense_apply: row count mismatch");
  out.resize(a.rows(), x.cols());
  for (Index i = 0; i < a.rows(); ++i) detail::dense_row(a, x, out, i);
}

void project_out(const DenseMatrix& q, Index count, Vector& v) {
  if (q.rows() != v.size()) throw ShapeError("project_out: row count mismatch");
  Vector coeffs(count);
  for (Index j = 0; j < count; ++j) coeffs[j] = detail::column_dot(q, j, v);
  for (Index i = 0; i < v.size(); ++i) detail::subtract_row(q, count, coeffs, v, i);
}

void accumulate_outer(const Matrix& left, const Matrix& right, DenseMatrix& acc) {
  if (left.cols() != right.cols() || acc.rows() != left.rows() || acc.cols() != right.rows())
    throw ShapeError("accumulate_outer: shape mismatch");
  for (Index j = 0; j < right.rows(); ++j) detail::outer_column(left, right, acc, j);
}

}  // namespace sgcn::kernels::serial
