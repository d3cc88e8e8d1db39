#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sgcn/graph.hpp"
#include "sgcn/linalg.hpp"

namespace sgcn {

// Eigenpairs of the propagation operator in descending eigenvalue order.
// Index 0 is the largest eigenvalue, i.e. the lowest Laplacian frequency.
//
// A truncated decomposition stores a contiguous window of the spectrum:
// column c holds global index first_index + c.
struct SpectralDecomposition {
  Vector values;         // descending
  DenseMatrix vectors;   // dimension x values.size(), orthonormal columns
  Index dimension = 0;   // N
  Index first_index = 0;

  Index count() const { return values.size(); }
  Index last_index() const { return first_index + count() - 1; }
  bool complete() const { return count() == dimension; }
  bool covers(Index k1, Index k2) const { return k1 >= first_index && k2 <= last_index(); }

  // Maximal runs of stored global indices whose eigenvalues agree within tol.
  // Only runs of length >= 2 are reported.
  std::vector<std::pair<Index, Index>> ties(double tol = 1e-9) const;
};

enum class SpectrumSide { Top, Bottom };

struct LanczosOptions {
  double tol = 1e-8;
  // Iteration budget is min(N, budget_per_pair * k + budget_base).
  Index budget_per_pair = 10;
  Index budget_base = 200;
  std::uint64_t seed = 0x5eed;
};

// Full dense eigendecomposition. Throws CapabilityError above the dense
// threshold; use eig_truncated there.
SpectralDecomposition eig_full(const PropagationOperator& op);

// k extremal eigenpairs by Lanczos with full reorthogonalization. The bottom
// end is found by iterating on (I - A) and mapping lambda -> 1 - lambda.
// Every returned pair satisfies ||A u - lambda u||_2 < tol, otherwise
// ConvergenceError carries the best residual reached.
SpectralDecomposition eig_truncated(const LinearOperator& op, Index k, SpectrumSide side,
                                    const LanczosOptions& options = {});

// Factored sum of lambda_k u_k u_k^T over an inclusive range of global
// descending indices.
class BandOperator final : public LinearOperator {
 public:
  BandOperator(Index first, Index last, Vector values, DenseMatrix vectors, bool splits_tie);

  Index size() const override { return vectors_.rows(); }
  Matrix apply(const Matrix& x) const override;

  Index first() const { return first_; }
  Index last() const { return last_; }
  Index rank() const { return values_.size(); }
  // True when a band boundary falls strictly inside a group of tied
  // eigenvalues, making the band basis-dependent.
  bool splits_tie() const { return splits_tie_; }
  const Vector& values() const { return values_; }
  const DenseMatrix& vectors() const { return vectors_; }

  DenseMatrix to_dense() const;

 private:
  Index first_;
  Index last_;
  Vector values_;
  DenseMatrix vectors_;
  bool splits_tie_;
};

// Throws RangeError when [k1, k2] is empty or not covered by d.
BandOperator band_project(const SpectralDecomposition& d, Index k1, Index k2);

struct SpectrumEntry {
  Index index;
  double eigenvalue;
};

std::vector<SpectrumEntry> spectrum_report(const SpectralDecomposition& d);

}  // namespace sgcn
