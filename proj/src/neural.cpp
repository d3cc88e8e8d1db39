#include "sgcn/neural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgcn/errors.hpp"
#include "sgcn/kernels.hpp"
#include "sgcn/rng.hpp"

namespace sgcn {

bool LayerParams::operator==(const LayerParams& o) const {
  return weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
         weight == o.weight && bias.cols() == o.bias.cols() && bias == o.bias;
}

LayerParams glorot_layer(Index in_dim, Index out_dim, std::uint64_t seed) {
  LayerParams p;
  p.weight.resize(in_dim, out_dim);
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  Rng rng(seed);
  for (Index i = 0; i < in_dim; ++i)
    for (Index j = 0; j < out_dim; ++j) p.weight(i, j) = rng.uniform(-limit, limit);
  p.bias = Matrix::Zero(1, out_dim);
  return p;
}

Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), needs_grad, std::move(backward)});
  return Var{nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) n.grad = g;
  else n.grad += g;
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::affine(Var x, Var weight, Var bias) {
  const Matrix& xv = value(x);
  const Matrix& w = value(weight);
  const Matrix& b = value(bias);
  if (xv.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw ShapeError("affine: input " + std::to_string(xv.rows()) + "x" +
                     std::to_string(xv.cols()) + ", weight " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + ", bias " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  Matrix out = xv * w;
  out.rowwise() += b.row(0);
  const bool ng = needs_grad(x) || needs_grad(weight) || needs_grad(bias);
  return push(std::move(out), ng, [x, weight, bias](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.needs_grad(weight)) t.accumulate(weight.id, t.value(x).transpose() * g);
    if (t.needs_grad(bias)) t.accumulate(bias.id, g.colwise().sum());
    if (t.needs_grad(x)) t.accumulate(x.id, g * t.value(weight).transpose());
  });
}

Var Tape::relu(Var x) {
  Matrix out = value(x).cwiseMax(0.0);
  return push(std::move(out), needs_grad(x), [x](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(x.id, (t.value(x).array() > 0.0).select(g.array(), 0.0).matrix());
  });
}

Var Tape::dropout(Var x, double rate, bool training, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout: rate must lie in [0, 1)");
  const Matrix& xv = value(x);
  if (!training || rate == 0.0) {
    return push(xv, needs_grad(x), [x](Tape& t, std::size_t self) {
      t.accumulate(x.id, t.nodes_[self].grad);
    });
  }
  Matrix scale(xv.rows(), xv.cols());
  const double keep = 1.0 / (1.0 - rate);
  Rng rng(seed);
  for (Index i = 0; i < scale.rows(); ++i)
    for (Index j = 0; j < scale.cols(); ++j) scale(i, j) = rng.uniform() < rate ? 0.0 : keep;
  Matrix out = xv.cwiseProduct(scale);
  return push(std::move(out), needs_grad(x),
              [x, scale = std::move(scale)](Tape& t, std::size_t self) {
                t.accumulate(x.id, t.nodes_[self].grad.cwiseProduct(scale));
              });
}

Var Tape::propagate(Var x, const LinearOperator& op, DenseMatrix* operator_grad) {
  if (op.size() != value(x).rows()) throw ShapeError("propagate: operator size differs from rows");
  Matrix out = op.apply(value(x));
  const bool ng = needs_grad(x) || operator_grad != nullptr;
  return push(std::move(out), ng, [x, &op, operator_grad](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (operator_grad) kernels::accumulate_outer(g, t.value(x), *operator_grad);
    if (t.needs_grad(x)) t.accumulate(x.id, op.apply_transpose(g));
  });
}

Var Tape::softmax_xent(Var logits, std::span<const Index> labels, std::span<const Index> mask) {
  if (mask.empty()) throw DomainError("softmax_xent: empty mask");
  const Matrix& z = value(logits);
  const Index classes = z.cols();
  const double inv = 1.0 / static_cast<double>(mask.size());

  Matrix g = Matrix::Zero(z.rows(), z.cols());
  double loss = 0.0;
  for (Index i : mask) {
    if (i < 0 || i >= z.rows()) throw InputError("softmax_xent: mask index out of range");
    const Index y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= classes) throw InputError("softmax_xent: label out of range");
    Index arg = 0;
    const double top = z.row(i).maxCoeff(&arg);
    const auto shifted = (z.row(i).array() - top).eval();
    // The max term contributes exactly 1; log1p keeps saturated rows accurate.
    double rest = 0.0;
    for (Index c = 0; c < classes; ++c)
      if (c != arg) rest += std::exp(shifted[c]);
    const double log_sum = std::log1p(rest);
    loss += log_sum - shifted[y];
    g.row(i) += (shifted - log_sum).exp().matrix() * inv;
    g(i, y) -= inv;
  }
  Matrix out(1, 1);
  out(0, 0) = loss * inv;
  return push(std::move(out), needs_grad(logits),
              [logits, g = std::move(g)](Tape& t, std::size_t self) {
                t.accumulate(logits.id, g * t.nodes_[self].grad(0, 0));
              });
}

void Tape::backward(Var root) {
  Node& r = nodes_[root.id];
  if (r.value.rows() != 1 || r.value.cols() != 1) throw ShapeError("backward: root must be 1x1");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  r.grad = Matrix::Ones(1, 1);
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.backward && n.grad.size() != 0) n.backward(*this, id);
  }
}

std::vector<Index> argmax_rows(const Matrix& logits) {
  std::vector<Index> out(static_cast<std::size_t>(logits.rows()), 0);
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    out[i] = best;
  }
  return out;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i].rows() || params[i]->cols() != grads[i].cols())
      throw ShapeError("adam_step: gradient " + std::to_string(i) + " shape mismatch");
  }
  if (state.first.empty()) {
    for (const Matrix* p : params) {
      state.first.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.second.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  } else if (state.first.size() != params.size()) {
    throw ShapeError("adam_step: state tracks a different parameter count");
  }

  const AdamConfig& c = state.config;
  ++state.step;
  const double correct1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correct2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& theta = *params[i];
    Matrix g = grads[i];
    if (c.weight_decay != 0.0) {
      if (c.decoupled) theta -= c.lr * c.weight_decay * theta;
      else g += c.weight_decay * theta;
    }
    Matrix& m = state.first[i];
    Matrix& v = state.second[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    theta.array() -= c.lr * (m.array() / correct1) / ((v.array() / correct2).sqrt() + c.eps);
  }
}

GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> theta, std::span<const double> analytic,
                           double h) {
  if (theta.size() != analytic.size()) throw ShapeError("grad_check: size mismatch");
  std::vector<double> probe(theta.begin(), theta.end());
  GradCheckResult r;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double diff = std::abs(analytic[i] - numeric);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
    r.max_abs_error = std::max(r.max_abs_error, diff);
    if (scale > 0.0) r.max_rel_error = std::max(r.max_rel_error, diff / scale);
  }
  return r;
}

}  // namespace sgcn
