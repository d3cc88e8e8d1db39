#include "sgcn/kernels.hpp"

#include "kernel_rows.hpp"
#include "sgcn/errors.hpp"

namespace sgcn::kernels {

namespace {

void check_rows(Index expected, Index actual, const char* what) {
  if (expected != actual) throw ShapeError(std::string(what) + ": row count mismatch");
}

}  // namespace

void spmm(const SparseMatrix& a, const Matrix& x, Matrix& out) {
  check_rows(a.cols(), x.rows(), "spmm");
  out.resize(a.rows(), x.cols());
  const Index n = a.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) detail::spmm_row(a, x, out, i);
}

void band_apply(const DenseMatrix& basis, const Vector& scale, const Matrix& x, Matrix& out) {
  check_rows(basis.rows(), x.rows(), "band_apply");
  if (scale.size() != basis.cols()) throw ShapeError("band_apply: scale length mismatch");
  const Index m = basis.cols();
  const Index n = basis.rows();
  Matrix coef(m, x.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < m; ++j) detail::band_coef_row(basis, scale, x, coef, j);
  out.resize(n, x.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) detail::band_out_row(basis, coef, out, i);
}

void dense_apply(const DenseMatrix& a, const Matrix& x, Matrix& out) {
  check_rows(a.cols(), x.rows(), "dense_apply");
  out.resize(a.rows(), x.cols());
  const Index n = a.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) detail::dense_row(a, x, out, i);
}

void project_out(const DenseMatrix& q, Index count, Vector& v) {
  check_rows(q.rows(), v.size(), "project_out");
  Vector coeffs(count);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < count; ++j) coeffs[j] = detail::column_dot(q, j, v);
  const Index n = v.size();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) detail::subtract_row(q, count, coeffs, v, i);
}

void accumulate_outer(const Matrix& left, const Matrix& right, DenseMatrix& acc) {
  if (left.cols() != right.cols() || acc.rows() != left.rows() || acc.cols() != right.rows())
    throw ShapeError("accumulate_outer: shape mismatch");
  const Index m = right.rows();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < m; ++j) detail::outer_column(left, right, acc, j);
}

}  // namespace sgcn::kernels
