#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sgcn/linalg.hpp"

namespace sgcn {

struct LayerParams {
  Matrix weight;  // in_dim x out_dim
  Matrix bias;    // 1 x out_dim

  Index in_dim() const { return weight.rows(); }
  Index out_dim() const { return weight.cols(); }
  bool operator==(const LayerParams& o) const;
};

// Glorot-uniform weights, limit sqrt(6 / (fan_in + fan_out)); zero bias.
LayerParams glorot_layer(Index in_dim, Index out_dim, std::uint64_t seed);

// Handle to a node of a Tape.
struct Var {
  std::size_t id;
};

// Wengert list for reverse-mode differentiation of the handful of
// operations a GCN needs. Values are node-major matrices; the loss is 1x1.
//
// Operators passed to propagate() are held by reference and must outlive
// the tape's backward() call.
class Tape {
 public:
  // Leaf that receives no gradient.
  Var constant(Matrix value);
  // Leaf that receives a gradient.
  Var variable(Matrix value);

  // x W + 1 b^T. `bias` is a 1 x out variable.
  Var affine(Var x, Var weight, Var bias);
  Var relu(Var x);
  // Inverted dropout: each entry is kept with probability 1 - rate and
  // scaled by 1 / (1 - rate). The identity when training is false or
  // rate is 0. Throws DomainError unless 0 <= rate < 1.
  Var dropout(Var x, double rate, bool training, std::uint64_t seed);
  // op * x. When operator_grad is non-null, backward() accumulates
  // d loss / d op (an N x N matrix, entries treated independently) into it.
  Var propagate(Var x, const LinearOperator& op, DenseMatrix* operator_grad = nullptr);
  // Mean over masked rows of -log softmax(logits)[label]. Throws
  // DomainError for an empty mask and InputError for a masked label
  // outside [0, C).
  Var softmax_xent(Var logits, std::span<const Index> labels, std::span<const Index> mask);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  // Zero-sized until backward() reaches the node.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }

  // Seeds d root = 1 and runs every recorded backward in reverse order.
  void backward(Var root);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void(Tape&, std::size_t)> backward;
  };

  Var push(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> backward);
  void accumulate(std::size_t id, const Matrix& g);
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

  std::vector<Node> nodes_;
};

// Row-wise argmax with ties going to the lowest class index.
std::vector<Index> argmax_rows(const Matrix& logits);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  // false: g <- g + wd * theta before the moment update (L2 in the gradient).
  // true:  theta <- theta - lr * wd * theta, outside the moments.
  bool decoupled = false;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  long step = 0;
};

// One bias-corrected Adam update of every parameter in place. Moments are
// allocated on the first call. Throws ShapeError if grads do not match.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state);

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

// Central differences (f(theta + h e_i) - f(theta - h e_i)) / 2h against an
// analytic gradient. Relative error is |a - n| / max(|a|, |n|), taken as 0
// when both are exactly zero.
GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> theta, std::span<const double> analytic,
                           double h = 1e-5);

}  // namespace sgcn
