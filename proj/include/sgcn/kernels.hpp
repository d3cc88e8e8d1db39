#pragma once

// Data-parallel inner loops. Every kernel in `sgcn::kernels` is OpenMP
// parallel over independent output rows (or columns) with a fixed
// per-element reduction order, so results are bit-identical to the serial
// reference in `sgcn::kernels::serial` regardless of thread count. The
// serial versions exist for tests and the benchmark.

#include "sgcn/linalg.hpp"

namespace sgcn::kernels {

// out = a * x, a sparse (CSR), x node-major.
void spmm(const SparseMatrix& a, const Matrix& x, Matrix& out);

// out = basis * diag(scale) * basis^T * x. basis is N x m, column-major.
void band_apply(const DenseMatrix& basis, const Vector& scale, const Matrix& x, Matrix& out);

// out = a * x for dense column-major a.
void dense_apply(const DenseMatrix& a, const Matrix& x, Matrix& out);

// v -= Q Q^T v over the first `count` columns of q (classical Gram-Schmidt,
// one pass). Callers repeat it for full reorthogonalization.
void project_out(const DenseMatrix& q, Index count, Vector& v);

// acc += left * right^T, with left and right node-major N x c.
void accumulate_outer(const Matrix& left, const Matrix& right, DenseMatrix& acc);

namespace serial {
void spmm(const SparseMatrix& a, const Matrix& x, Matrix& out);
void band_apply(const DenseMatrix& basis, const Vector& scale, const Matrix& x, Matrix& out);
void dense_apply(const DenseMatrix& a, const Matrix& x, Matrix& out);
void project_out(const DenseMatrix& q, Index count, Vector& v);
void accumulate_outer(const Matrix& left, const Matrix& right, DenseMatrix& acc);
}  // namespace serial

}  // namespace sgcn::kernels
