#pragma once

// Per-row bodies shared by the parallel kernels and the serial reference.
// Keeping one definition guarantees both paths perform the same arithmetic
// in the same order.

#include "sgcn/linalg.hpp"

namespace sgcn::kernels::detail {

inline void spmm_row(const SparseMatrix& a, const Matrix& x, Matrix& out, Index i) {
  const Index* outer = a.outerIndexPtr();
  const Index* inner = a.innerIndexPtr();
  const double* values = a.valuePtr();
  const Index cols = x.cols();
  double* dst = out.data() + i * cols;
  for (Index c = 0; c < cols; ++c) dst[c] = 0.0;
  for (Index p = outer[i]; p < outer[i + 1]; ++p) {
    const double w = values[p];
    const double* src = x.data() + inner[p] * cols;
    for (Index c = 0; c < cols; ++c) dst[c] += w * src[c];
  }
}

// coef(j, :) = scale[j] * sum_i basis(i, j) * x(i, :)
inline void band_coef_row(const DenseMatrix& basis, const Vector& scale, const Matrix& x,
                          Matrix& coef, Index j) {
  const Index n = basis.rows();
  const Index cols = x.cols();
  const double* u = basis.data() + j * n;
  double* dst = coef.data() + j * cols;
  for (Index c = 0; c < cols; ++c) dst[c] = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double w = u[i];
    const double* src = x.data() + i * cols;
    for (Index c = 0; c < cols; ++c) dst[c] += w * src[c];
  }
  const double s = scale[j];
  for (Index c = 0; c < cols; ++c) dst[c] *= s;
}

// out(i, :) = sum_j basis(i, j) * coef(j, :)
inline void band_out_row(const DenseMatrix& basis, const Matrix& coef, Matrix& out, Index i) {
  const Index m = basis.cols();
  const Index cols = coef.cols();
  double* dst = out.data() + i * cols;
  for (Index c = 0; c < cols; ++c) dst[c] = 0.0;
  for (Index j = 0; j < m; ++j) {
    const double w = basis(i, j);
    const double* src = coef.data() + j * cols;
    for (Index c = 0; c < cols; ++c) dst[c] += w * src[c];
  }
}

inline void dense_row(const DenseMatrix& a, const Matrix& x, Matrix& out, Index i) {
  const Index n = a.cols();
  const Index cols = x.cols();
  double* dst = out.data() + i * cols;
  for (Index c = 0; c < cols; ++c) dst[c] = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double w = a(i, k);
    if (w == 0.0) continue;
    const double* src = x.data() + k * cols;
    for (Index c = 0; c < cols; ++c) dst[c] += w * src[c];
  }
}

inline double column_dot(const DenseMatrix& q, Index j, const Vector& v) {
  const Index n = q.rows();
  const double* col = q.data() + j * n;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += col[i] * v[i];
  return s;
}

inline void subtract_row(const DenseMatrix& q, Index count, const Vector& coeffs, Vector& v,
                         Index i) {
  double s = 0.0;
  for (Index j = 0; j < count; ++j) s += q(i, j) * coeffs[j];
  v[i] -= s;
}

// acc(:, j) += left * right(j, :)^T
inline void outer_column(const Matrix& left, const Matrix& right, DenseMatrix& acc, Index j) {
  const Index n = left.rows();
  const Index cols = left.cols();
  const double* r = right.data() + j * cols;
  double* dst = acc.data() + j * acc.rows();
  for (Index i = 0; i < n; ++i) {
    const double* l = left.data() + i * cols;
    double s = 0.0;
    for (Index c = 0; c < cols; ++c) s += l[c] * r[c];
    dst[i] += s;
  }
}

}  // namespace sgcn::kernels::detail
