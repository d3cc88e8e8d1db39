#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>

namespace sgcn {

using Index = Eigen::Index;

// Node-major activations and features: one row per node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Vector = Eigen::VectorXd;

// Column-major storage for eigenvector bases and dense N x N operators.
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

// A linear map on node signals, applied to every column of a node-major
// matrix at once.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index size() const = 0;
  virtual Matrix apply(const Matrix& x) const = 0;
  // Operators in this library are symmetric unless they say otherwise.
  virtual Matrix apply_transpose(const Matrix& x) const { return apply(x); }
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Index n) : n_(n) {}
  Index size() const override { return n_; }
  Matrix apply(const Matrix& x) const override { return x; }

 private:
  Index n_;
};

// Explicit dense matrix. Not assumed symmetric: used for perturbed copies
// of the propagation operator in finite-difference checks.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(DenseMatrix m) : m_(std::move(m)) {}
  Index size() const override { return m_.rows(); }
  Matrix apply(const Matrix& x) const override;
  Matrix apply_transpose(const Matrix& x) const override;
  const DenseMatrix& matrix() const { return m_; }

 private:
  DenseMatrix m_;
};

}  // namespace sgcn
