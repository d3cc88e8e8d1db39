#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sgcn/linalg.hpp"

namespace sgcn {

using Edge = std::pair<Index, Index>;

// Undirected, unweighted graph. Edges are stored once as (u, v) with u <= v,
// sorted lexicographically.
class Graph {
 public:
  Graph() = default;

  // Duplicate pairs, including (u, v) next to (v, u), collapse to one edge.
  // Self-loops are kept and count once toward the degree.
  // Throws InputError if an index is outside [0, n).
  static Graph from_edge_list(Index n, std::span<const Edge> pairs);

  Index num_nodes() const { return n_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Index>& degrees() const { return degrees_; }

  // Returns a copy with node i renamed to perm[i].
  Graph relabeled(std::span<const Index> perm) const;

  bool operator==(const Graph&) const = default;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  std::vector<Index> degrees_;
};

// Storage switches to sparse-only above this node count.
inline constexpr Index kDenseThreshold = 5000;

// The GCN smoothing operator 0.5 * (I + D^{-1/2} A D^{-1/2}).
//
// Always keeps a CSR copy for products; additionally materializes the dense
// matrix when N <= kDenseThreshold. For an isolated node the D^{-1/2}
// entry is taken as 0, so its row is 0.5 * e_i.
class PropagationOperator final : public LinearOperator {
 public:
  explicit PropagationOperator(SparseMatrix sparse);

  Index size() const override { return sparse_.rows(); }
  Matrix apply(const Matrix& x) const override;

  const SparseMatrix& sparse() const { return sparse_; }
  bool has_dense() const { return dense_.has_value(); }
  // Throws CapabilityError when the operator is stored sparse-only.
  const DenseMatrix& dense() const;

 private:
  SparseMatrix sparse_;
  std::optional<DenseMatrix> dense_;
};

PropagationOperator normalized_operator(const Graph& g);

}  // namespace sgcn
