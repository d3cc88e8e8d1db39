#include "sgcn/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "sgcn/errors.hpp"
#include "sgcn/rng.hpp"

namespace sgcn {

void ModelConfig::validate() const {
  if (hidden_layers < 1) throw InputError("hidden_layers must be >= 1");
  if (hidden_size < 1) throw InputError("hidden_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("dropout must lie in [0, 1)");
  if (lr < 0.0) throw InputError("lr must be >= 0");
  if (weight_decay < 0.0) throw InputError("weight_decay must be >= 0");
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (patience < 1 || patience > epochs) throw InputError("patience must lie in [1, epochs]");
  if (augment_k < 0) throw InputError("augment_k must be >= 0");
  if (propagation.kind == Propagation::Kind::Band && propagation.first > propagation.last)
    throw InputError("band must satisfy first <= last");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Gcn ? "gcn" : "mlp"; }

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::None: return "none";
    case Normalization::PerNode: return "per-node";
    case Normalization::PerFeature: return "per-feature";
  }
  return "none";
}

std::string to_string(const Propagation& p) {
  switch (p.kind) {
    case Propagation::Kind::Full: return "full";
    case Propagation::Kind::Identity: return "identity";
    case Propagation::Kind::Band:
      return "band[" + std::to_string(p.first) + "," + std::to_string(p.last) + "]";
  }
  return "full";
}

Workspace::Workspace(GraphBundle bundle)
    : bundle_(std::move(bundle)), op_(normalized_operator(bundle_.graph)) {
  bundle_.validate();
}

const SpectralDecomposition& Workspace::spectrum() const {
  std::lock_guard lock(mutex_);
  if (!full_) full_ = std::make_shared<const SpectralDecomposition>(eig_full(op_));
  return *full_;
}

const SpectralDecomposition& Workspace::top(Index k) const {
  if (op_.has_dense() || k >= num_nodes()) return spectrum();
  std::lock_guard lock(mutex_);
  if (!top_ || top_->count() < k) {
    auto fresh = std::make_shared<const SpectralDecomposition>(eig_truncated(op_, k, SpectrumSide::Top));
    // Earlier references handed out stay valid: retire, never free, smaller solves.
    retired_.push_back(std::move(top_));
    top_ = std::move(fresh);
  }
  return *top_;
}

const SpectralDecomposition& Workspace::bottom(Index k) const {
  if (op_.has_dense() || k >= num_nodes()) return spectrum();
  std::lock_guard lock(mutex_);
  if (!bottom_ || bottom_->count() < k) {
    auto fresh =
        std::make_shared<const SpectralDecomposition>(eig_truncated(op_, k, SpectrumSide::Bottom));
    retired_.push_back(std::move(bottom_));
    bottom_ = std::move(fresh);
  }
  return *bottom_;
}

Var record_forward(Tape& tape, Var x, const LinearOperator* prop, std::span<const Var> weights,
                   std::span<const Var> biases, const ForwardOptions& options,
                   DenseMatrix* operator_grad) {
  if (weights.size() != biases.size() || weights.empty())
    throw ShapeError("record_forward: need matching, non-empty weight and bias lists");
  Var h = x;
  const std::size_t layers = weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    if (l > 0 || options.input_dropout)
      h = tape.dropout(h, options.dropout, options.training, derive_seed(options.seed, l));
    if (prop) h = tape.propagate(h, *prop, operator_grad);
    h = tape.affine(h, weights[l], biases[l]);
    if (l + 1 < layers) h = tape.relu(h);
  }
  return h;
}

namespace {

struct LayerVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

LayerVars push_layers(Tape& tape, std::span<const LayerParams> layers, bool trainable) {
  LayerVars v;
  for (const auto& p : layers) {
    v.weights.push_back(trainable ? tape.variable(p.weight) : tape.constant(p.weight));
    v.biases.push_back(trainable ? tape.variable(p.bias) : tape.constant(p.bias));
  }
  return v;
}

void check_chain(const Matrix& x, std::span<const LayerParams> layers) {
  Index width = x.cols();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].in_dim() != width) {
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       std::to_string(layers[l].in_dim()) + " inputs, receives " +
                       std::to_string(width));
    }
    width = layers[l].out_dim();
  }
}

Matrix run_forward(const Matrix& x, const LinearOperator* prop, std::span<const LayerParams> layers,
                   const ForwardOptions& options) {
  check_chain(x, layers);
  Tape tape;
  const Var in = tape.constant(x);
  const LayerVars v = push_layers(tape, layers, false);
  return tape.value(record_forward(tape, in, prop, v.weights, v.biases, options));
}

}  // namespace

Matrix gcn_forward(const Matrix& x, const LinearOperator& prop, std::span<const LayerParams> layers,
                   const ForwardOptions& options) {
  if (prop.size() != x.rows()) throw ShapeError("gcn_forward: operator size differs from N");
  return run_forward(x, &prop, layers, options);
}

Matrix mlp_forward(const Matrix& x, std::span<const LayerParams> layers,
                   const ForwardOptions& options) {
  return run_forward(x, nullptr, layers, options);
}

Matrix augment_features(const Matrix& x, const SpectralDecomposition& d, Index k,
                        Normalization normalization, bool include_dominant) {
  if (k < 0) throw InputError("augment_features: negative k");
  if (k == 0) return x;
  if (d.dimension != x.rows()) throw ShapeError("augment_features: decomposition dimension");
  const Index start = include_dominant ? 0 : 1;
  if (!d.covers(start, start + k - 1)) {
    throw RangeError("augment_features: eigenvectors [" + std::to_string(start) + ", " +
                     std::to_string(start + k - 1) + "] not in the decomposition");
  }
  Matrix block = d.vectors.middleCols(start - d.first_index, k);
  switch (normalization) {
    case Normalization::None: break;
    case Normalization::PerNode:
      for (Index i = 0; i < block.rows(); ++i) {
        const double norm = block.row(i).norm();
        if (norm > 0.0) block.row(i) /= norm;
      }
      break;
    case Normalization::PerFeature:
      for (Index j = 0; j < block.cols(); ++j) {
        const double mean = block.col(j).mean();
        block.col(j).array() -= mean;
        const double sd = std::sqrt(block.col(j).squaredNorm() / static_cast<double>(block.rows()));
        if (sd > 0.0) block.col(j) /= sd;
      }
      break;
  }
  Matrix out(x.rows(), x.cols() + k);
  out.leftCols(x.cols()) = x;
  out.rightCols(k) = block;
  return out;
}

Index fraction_to_count(double fraction, Index n) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("fraction must lie in (0, 1]");
  const auto k = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<Index>(k, 1, n);
}

Index augment_count(double fraction, Index n, bool include_dominant) {
  return std::min(fraction_to_count(fraction, n), include_dominant ? n : n - 1);
}

double evaluate_accuracy(const Matrix& logits, std::span<const Index> labels,
                         std::span<const Index> mask) {
  if (mask.empty()) throw DomainError("evaluate_accuracy: empty mask");
  const std::vector<Index> pred = argmax_rows(logits);
  std::size_t hits = 0;
  for (Index i : mask) hits += pred[i] == labels[static_cast<std::size_t>(i)];
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

bool TrainReport::same_result(const TrainReport& o) const {
  return epochs == o.epochs && best_epoch == o.best_epoch && best_val_acc == o.best_val_acc &&
         test_acc == o.test_acc && initial_test_acc == o.initial_test_acc &&
         best_params == o.best_params && initial_params == o.initial_params;
}

std::vector<LayerParams> init_layers(Index in_dim, Index hidden_size, int hidden_layers,
                                     Index classes, std::uint64_t seed) {
  std::vector<LayerParams> layers;
  Index width = in_dim;
  for (int l = 0; l < hidden_layers; ++l) {
    layers.push_back(glorot_layer(width, hidden_size, derive_seed(seed, l)));
    width = hidden_size;
  }
  layers.push_back(glorot_layer(width, classes, derive_seed(seed, hidden_layers)));
  return layers;
}

PreparedModel prepare_model(const Workspace& ws, const ModelConfig& cfg) {
  cfg.validate();
  const GraphBundle& b = ws.bundle();
  const Index n = ws.num_nodes();
  PreparedModel pm;

  if (cfg.kind == ModelKind::Mlp) {
    if (cfg.augment_k > 0) {
      const Index start = cfg.augment_include_dominant ? 0 : 1;
      pm.features = augment_features(b.features, ws.top(start + cfg.augment_k), cfg.augment_k,
                                     cfg.normalization, cfg.augment_include_dominant);
    } else {
      pm.features = b.features;
    }
    return pm;
  }

  pm.features = b.features;
  const Propagation& p = cfg.propagation;
  switch (p.kind) {
    case Propagation::Kind::Full: pm.prop = &ws.op(); break;
    case Propagation::Kind::Identity:
      pm.owned_prop = std::make_unique<IdentityOperator>(n);
      pm.prop = pm.owned_prop.get();
      break;
    case Propagation::Kind::Band: {
      if (p.first < 0 || p.last >= n)
        throw RangeError("band " + to_string(p) + " outside [0, " + std::to_string(n) + ")");
      if (p.first == 0 && p.last == n - 1) {
        // The whole spectrum is the operator itself.
        pm.prop = &ws.op();
        break;
      }
      const SpectralDecomposition& d = p.first == 0       ? ws.top(p.last + 1)
                                       : p.last == n - 1 ? ws.bottom(n - p.first)
                                                         : ws.spectrum();
      pm.owned_prop = std::make_unique<BandOperator>(band_project(d, p.first, p.last));
      pm.prop = pm.owned_prop.get();
      break;
    }
  }
  return pm;
}

namespace {

struct Evaluation {
  double train_acc;
  double val_loss;
  double val_acc;
  double test_acc;
};

Evaluation evaluate(const PreparedModel& pm, const GraphBundle& b,
                    std::span<const LayerParams> layers) {
  Tape tape;
  const Var in = tape.constant(pm.features);
  const LayerVars v = push_layers(tape, layers, false);
  const Var logits = record_forward(tape, in, pm.prop, v.weights, v.biases, ForwardOptions{});
  const Var val_loss = tape.softmax_xent(logits, b.labels, b.val);
  const Matrix& z = tape.value(logits);
  return {evaluate_accuracy(z, b.labels, b.train), tape.scalar(val_loss),
          evaluate_accuracy(z, b.labels, b.val), evaluate_accuracy(z, b.labels, b.test)};
}

}  // namespace

TrainReport train(const Workspace& ws, const ModelConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const GraphBundle& b = ws.bundle();
  if (b.train.empty() || b.val.empty() || b.test.empty())
    throw DomainError("train: train, validation and test splits must be non-empty");

  const PreparedModel pm = prepare_model(ws, cfg);
  std::vector<LayerParams> layers = init_layers(pm.features.cols(), cfg.hidden_size,
                                                cfg.hidden_layers, b.num_classes,
                                                derive_seed(cfg.seed, 0x1a7e5));
  AdamState adam;
  adam.config.lr = cfg.lr;
  adam.config.weight_decay = cfg.weight_decay;
  adam.config.decoupled = cfg.decoupled_weight_decay;

  TrainReport report;
  report.initial_params = layers;
  report.initial_test_acc = evaluate(pm, b, layers).test_acc;
  report.best_params = layers;
  report.best_val_acc = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<Matrix*> param_ptrs;
  for (auto& p : layers) {
    param_ptrs.push_back(&p.weight);
    param_ptrs.push_back(&p.bias);
  }

  const ForwardOptions train_options{cfg.dropout, cfg.input_dropout, true, 0};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    const Var in = tape.constant(pm.features);
    const LayerVars v = push_layers(tape, layers, true);
    ForwardOptions fo = train_options;
    fo.seed = derive_seed(cfg.seed, 0x10000 + static_cast<std::uint64_t>(epoch));
    const Var logits = record_forward(tape, in, pm.prop, v.weights, v.biases, fo);
    const Var loss = tape.softmax_xent(logits, b.labels, b.train);
    tape.backward(loss);

    std::vector<Matrix> grads;
    grads.reserve(param_ptrs.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      grads.push_back(tape.grad(v.weights[l]));
      grads.push_back(tape.grad(v.biases[l]));
    }
    adam_step(param_ptrs, grads, adam);

    const Evaluation e = evaluate(pm, b, layers);
    report.epochs.push_back({epoch, tape.scalar(loss), e.train_acc, e.val_loss, e.val_acc, e.test_acc});
    if (e.val_acc > report.best_val_acc ||
        (e.val_acc == report.best_val_acc && e.val_loss < best_val_loss)) {
      report.best_val_acc = e.val_acc;
      best_val_loss = e.val_loss;
      report.best_epoch = epoch;
      report.test_acc = e.test_acc;
      report.best_params = layers;
    }
    if (epoch - report.best_epoch >= cfg.patience) break;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

TrainReport train(const GraphBundle& bundle, const ModelConfig& cfg) {
  return train(Workspace(bundle), cfg);
}

std::size_t GridSpec::cardinality() const {
  return lrs.size() * hidden_layers.size() * dropouts.size() * frequencies.size() *
         normalizations.size();
}

std::vector<std::pair<ModelConfig, double>> expand_grid(const ModelConfig& base, const GridSpec& grid,
                                                        Index n) {
  std::vector<std::pair<ModelConfig, double>> out;
  out.reserve(grid.cardinality());
  for (double lr : grid.lrs)
    for (int layers : grid.hidden_layers)
      for (double dropout : grid.dropouts)
        for (double freq : grid.frequencies)
          for (Normalization norm : grid.normalizations) {
            ModelConfig c = base;
            c.lr = lr;
            c.hidden_layers = layers;
            c.dropout = dropout;
            c.normalization = norm;
            const double fraction = freq / 100.0;
            if (c.kind == ModelKind::Mlp) {
              c.augment_k = augment_count(fraction, n, c.augment_include_dominant);
            } else {
              const Index k = fraction_to_count(fraction, n);
              c.propagation = k == n ? Propagation::full() : Propagation::band(0, k - 1);
            }
            out.emplace_back(c, freq);
          }
  return out;
}

GridResult grid_search(const Workspace& ws, const ModelConfig& base, const GridSpec& grid) {
  const auto configs = expand_grid(base, grid, ws.num_nodes());
  if (configs.empty()) throw InputError("grid_search: empty grid");
  GridResult result;
  result.rows.resize(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());

  const auto count = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const TrainReport r = train(ws, configs[i].first);
      result.rows[i] = {configs[i].first, configs[i].second, r.best_val_acc, r.test_acc,
                        r.best_epoch};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    const GridRow& a = result.rows[i];
    const GridRow& b = result.rows[best];
    if (a.val_acc != b.val_acc) {
      if (a.val_acc > b.val_acc) best = i;
    } else if (a.frequency != b.frequency) {
      if (a.frequency < b.frequency) best = i;
    } else if (a.config.hidden_layers < b.config.hidden_layers) {
      best = i;
    }
  }
  result.best_row = best;
  result.best = result.rows[best].config;
  return result;
}

}  // namespace sgcn
