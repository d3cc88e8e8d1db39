#include "sgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgcn/errors.hpp"
#include "sgcn/kernels.hpp"

namespace sgcn {

Graph Graph::from_edge_list(Index n, std::span<const Edge> pairs) {
  if (n < 0) throw InputError("from_edge_list: negative node count");
  Graph g;
  g.n_ = n;
  g.edges_.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw InputError("from_edge_list: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") has an endpoint outside [0, " + std::to_string(n) + ")");
    }
    g.edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.degrees_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [u, v] : g.edges_) {
    ++g.degrees_[u];
    if (u != v) ++g.degrees_[v];
  }
  return g;
}

Graph Graph::relabeled(std::span<const Index> perm) const {
  if (static_cast<Index>(perm.size()) != n_) throw InputError("relabeled: permutation size");
  std::vector<Edge> mapped;
  mapped.reserve(edges_.size());
  for (const auto& [u, v] : edges_) mapped.emplace_back(perm[u], perm[v]);
  return from_edge_list(n_, mapped);
}

PropagationOperator::PropagationOperator(SparseMatrix sparse) : sparse_(std::move(sparse)) {
  sparse_.makeCompressed();
  if (sparse_.rows() <= kDenseThreshold) dense_ = DenseMatrix(sparse_);
}

Matrix PropagationOperator::apply(const Matrix& x) const {
  Matrix out;
  kernels::spmm(sparse_, x, out);
  return out;
}

const DenseMatrix& PropagationOperator::dense() const {
  if (!dense_) {
    throw CapabilityError("propagation operator with N = " + std::to_string(size()) +
                          " is stored sparse-only (dense threshold " +
                          std::to_string(kDenseThreshold) + ")");
  }
  return *dense_;
}

PropagationOperator normalized_operator(const Graph& g) {
  const Index n = g.num_nodes();
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    const Index d = g.degrees()[i];
    if (d > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(d));
  }

  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) + 2 * g.edges().size());
  for (Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 0.5);
  for (const auto& [u, v] : g.edges()) {
    const double w = 0.5 * inv_sqrt[u] * inv_sqrt[v];
    triplets.emplace_back(u, v, w);
    if (u != v) triplets.emplace_back(v, u, w);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return PropagationOperator(std::move(a));
}

Matrix DenseOperator::apply(const Matrix& x) const {
  Matrix out;
  kernels::dense_apply(m_, x, out);
  return out;
}

Matrix DenseOperator::apply_transpose(const Matrix& x) const {
  Matrix out;
  const DenseMatrix t = m_.transpose();
  kernels::dense_apply(t, x, out);
  return out;
}

}  // namespace sgcn
