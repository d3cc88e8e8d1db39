#pragma once

#include <cstdint>
#include <vector>

#include "sgcn/graph.hpp"
#include "sgcn/linalg.hpp"

namespace sgcn {

struct GraphBundle;

struct SbmSpec {
  std::vector<Index> block_sizes;
  DenseMatrix prob_matrix;  // r x r, symmetric, entries in [0, 1]
  std::uint64_t seed = 0;

  // Throws InputError on asymmetric or out-of-range probabilities.
  void validate() const;
  Index num_nodes() const;
  // Community of each node, blocks laid out contiguously.
  std::vector<Index> communities() const;
};

// r equal blocks, p within a block and q across.
SbmSpec planted_partition(Index blocks, Index block_size, double p, double q, std::uint64_t seed);

struct SbmSample {
  Graph graph;
  std::vector<Index> communities;
};

// Each unordered pair i < j carries an edge independently with probability
// prob_matrix[c_i][c_j]; no self-loops. Row i draws from its own stream
// derive_seed(seed, i), so rows are sampled in parallel and the result does
// not depend on thread count.
SbmSample sample_sbm(const SbmSpec& spec);

// Reference sampler: same streams, one row at a time.
SbmSample sample_sbm_serial(const SbmSpec& spec);

// Block-constant matrix E[A] with entry prob_matrix[c_i][c_j], including
// the diagonal.
DenseMatrix expected_adjacency(const SbmSpec& spec);

// (p - q) / (p + q): ratio of the two dominant eigenvalues of the
// two-block expected adjacency. Throws DomainError unless 0 <= q < p <= 1.
double spectral_gap(double p, double q);

// Features for synthetic node classification: class c has mean
// separation * e_c in the first r coordinates, plus isotropic unit noise
// in all `dim` coordinates.
struct FeatureSpec {
  Index dim = 16;
  // <= 0 selects the separation whose Bayes accuracy is bayes_target.
  double separation = 0.0;
  double bayes_target = 0.85;
  std::uint64_t seed = 1;
};

// Bayes accuracy of argmax_c x_c for r classes with means separation * e_c
// and unit isotropic noise: integral of phi(z) Phi(z + s)^(r - 1) dz.
double onehot_bayes_accuracy(double separation, Index classes);

// Inverse of onehot_bayes_accuracy in the separation argument.
double separation_for_accuracy(double target, Index classes);

Matrix community_features(const std::vector<Index>& communities, Index classes,
                          const FeatureSpec& spec);

struct SplitFractions {
  double train = 0.4;
  double val = 0.2;  // test gets the remainder
};

// Samples an SBM graph, draws features, and splits nodes by a seeded shuffle.
GraphBundle make_sbm_bundle(const SbmSpec& spec, const FeatureSpec& features,
                            const SplitFractions& split = {}, std::uint64_t split_seed = 7);

}  // namespace sgcn
