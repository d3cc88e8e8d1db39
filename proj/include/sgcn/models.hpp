#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sgcn/dataset_io.hpp"
#include "sgcn/graph.hpp"
#include "sgcn/neural.hpp"
#include "sgcn/spectral.hpp"

namespace sgcn {

enum class ModelKind { Gcn, Mlp };
enum class Normalization { None, PerNode, PerFeature };

struct Propagation {
  enum class Kind { Full, Band, Identity };
  Kind kind = Kind::Full;
  Index first = 0;  // inclusive band bounds, descending-index convention
  Index last = 0;

  static Propagation full() { return {}; }
  static Propagation identity() { return {Kind::Identity, 0, 0}; }
  static Propagation band(Index first, Index last) { return {Kind::Band, first, last}; }
  bool operator==(const Propagation&) const = default;
};

struct ModelConfig {
  ModelKind kind = ModelKind::Gcn;
  // Propagation depth of a GCN is hidden_layers + 1.
  int hidden_layers = 2;
  Index hidden_size = 128;
  double dropout = 0.5;
  bool input_dropout = true;
  double lr = 0.01;
  double weight_decay = 1e-3;
  bool decoupled_weight_decay = false;
  int epochs = 800;
  int patience = 400;
  // Ignored for MLPs, which never propagate.
  Propagation propagation;
  // Eigenvector augmentation of the MLP input (0 disables).
  Index augment_k = 0;
  bool augment_include_dominant = false;
  Normalization normalization = Normalization::None;
  std::uint64_t seed = 0;

  int depth() const { return hidden_layers + 1; }
  // Throws InputError on an inconsistent configuration.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

std::string to_string(ModelKind kind);
std::string to_string(Normalization n);
std::string to_string(const Propagation& p);

// Graph bundle plus lazily computed operator and spectrum, shared
// read-only across training runs. Spectrum access is thread-safe.
class Workspace {
 public:
  explicit Workspace(GraphBundle bundle);

  const GraphBundle& bundle() const { return bundle_; }
  const PropagationOperator& op() const { return op_; }
  Index num_nodes() const { return bundle_.num_nodes(); }

  // Full decomposition; CapabilityError above the dense threshold.
  const SpectralDecomposition& spectrum() const;
  // A decomposition covering global indices [0, k): the full one when
  // available, otherwise a cached Lanczos solve.
  const SpectralDecomposition& top(Index k) const;
  // Covers [N - k, N).
  const SpectralDecomposition& bottom(Index k) const;

 private:
  GraphBundle bundle_;
  PropagationOperator op_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const SpectralDecomposition> full_;
  mutable std::shared_ptr<const SpectralDecomposition> top_;
  mutable std::shared_ptr<const SpectralDecomposition> bottom_;
  mutable std::vector<std::shared_ptr<const SpectralDecomposition>> retired_;
};

struct ForwardOptions {
  double dropout = 0.0;
  bool input_dropout = true;
  bool training = false;
  std::uint64_t seed = 0;
};

// Records the forward pass on `tape`: for each layer, dropout (on the input
// layer only if input_dropout) -> propagate (skipped when prop is null) ->
// affine -> ReLU except after the last layer. Returns the logits variable.
Var record_forward(Tape& tape, Var x, const LinearOperator* prop, std::span<const Var> weights,
                   std::span<const Var> biases, const ForwardOptions& options,
                   DenseMatrix* operator_grad = nullptr);

Matrix gcn_forward(const Matrix& x, const LinearOperator& prop,
                   std::span<const LayerParams> layers, const ForwardOptions& options = {});
Matrix mlp_forward(const Matrix& x, std::span<const LayerParams> layers,
                   const ForwardOptions& options = {});

// [X, u_s, ..., u_{s+k-1}] with s = 1 (s = 0 when include_dominant).
// The appended block is optionally L2-normalized per row (PerNode) or
// standardized per column (PerFeature). Throws RangeError when the
// decomposition does not cover the requested eigenvectors.
Matrix augment_features(const Matrix& x, const SpectralDecomposition& d, Index k,
                        Normalization normalization, bool include_dominant = false);

// Number of eigenvectors for a spectrum fraction: max(1, round(f * N)),
// capped at the eigenvectors available for augmentation.
Index fraction_to_count(double fraction, Index n);
Index augment_count(double fraction, Index n, bool include_dominant);

// Fraction of masked rows whose argmax (lowest index on ties) equals the
// label. Throws DomainError on an empty mask.
double evaluate_accuracy(const Matrix& logits, std::span<const Index> labels,
                         std::span<const Index> mask);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_acc = 0.0;
  double test_acc = 0.0;
  double initial_test_acc = 0.0;
  std::vector<LayerParams> best_params;
  std::vector<LayerParams> initial_params;
  double wall_seconds = 0.0;

  // Everything except wall-clock time.
  bool same_result(const TrainReport& o) const;
};

std::vector<LayerParams> init_layers(Index in_dim, Index hidden_size, int hidden_layers,
                                     Index classes, std::uint64_t seed);

// Model inputs and propagation operator for a configuration. Keeps the
// band operator alive alongside the features it will be applied to.
struct PreparedModel {
  Matrix features;
  std::unique_ptr<LinearOperator> owned_prop;
  const LinearOperator* prop = nullptr;  // null for an MLP
};

PreparedModel prepare_model(const Workspace& ws, const ModelConfig& cfg);

// Full-batch training on the train split, keeping the weights with the best
// validation accuracy (ties: lower validation loss) and stopping once
// `patience` epochs pass without improvement.
TrainReport train(const Workspace& ws, const ModelConfig& cfg);
TrainReport train(const GraphBundle& bundle, const ModelConfig& cfg);

struct GridSpec {
  std::vector<double> lrs{0.01, 0.001};
  std::vector<int> hidden_layers{1, 2, 3, 4};
  std::vector<double> dropouts{0.0, 0.2, 0.4, 0.6, 0.8};
  // Percent of the spectrum: augmentation size for an MLP, low band for a GCN.
  std::vector<double> frequencies{0.1, 0.2, 0.4, 0.7, 1, 2, 3, 6, 10, 15, 20, 30, 50, 80, 100};
  std::vector<Normalization> normalizations{Normalization::None, Normalization::PerFeature};

  std::size_t cardinality() const;
};

struct GridRow {
  ModelConfig config;
  double frequency = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  int best_epoch = 0;
};

struct GridResult {
  ModelConfig best;
  std::vector<GridRow> rows;  // in grid enumeration order
  std::size_t best_row = 0;
};

std::vector<std::pair<ModelConfig, double>> expand_grid(const ModelConfig& base, const GridSpec& grid,
                                                        Index n);

// Exhaustive search selected by validation accuracy; ties go to the smaller
// frequency, then the smaller model (fewer layers), then enumeration order.
GridResult grid_search(const Workspace& ws, const ModelConfig& base, const GridSpec& grid);

}  // namespace sgcn
