#include "sgcn/sensitivity.hpp"

#include <cmath>

#include "sgcn/errors.hpp"

namespace sgcn {

namespace {

struct Recorded {
  Tape tape;
  Var loss{0};
};

void record_loss(Recorded& r, const ModelConfig& cfg, std::span<const LayerParams> layers,
                 const Matrix& features, const GraphBundle& bundle, const LinearOperator* prop,
                 DenseMatrix* operator_grad) {
  const Var in = r.tape.constant(features);
  std::vector<Var> w;
  std::vector<Var> b;
  for (const auto& p : layers) {
    w.push_back(r.tape.constant(p.weight));
    b.push_back(r.tape.constant(p.bias));
  }
  ForwardOptions fo;
  fo.dropout = cfg.dropout;
  fo.input_dropout = cfg.input_dropout;
  fo.training = false;
  const Var logits = record_forward(r.tape, in, prop, w, b, fo, operator_grad);
  r.loss = r.tape.softmax_xent(logits, bundle.labels, bundle.train);
}

const LinearOperator* propagation_for(const ModelConfig& cfg, const LinearOperator& prop) {
  if (cfg.kind == ModelKind::Mlp || cfg.propagation.kind == Propagation::Kind::Identity)
    return nullptr;
  return &prop;
}

}  // namespace

double training_loss(const ModelConfig& cfg, std::span<const LayerParams> layers,
                     const Matrix& features, const GraphBundle& bundle,
                     const LinearOperator& prop) {
  Recorded r;
  record_loss(r, cfg, layers, features, bundle, propagation_for(cfg, prop), nullptr);
  return r.tape.scalar(r.loss);
}

DenseMatrix loss_grad_wrt_operator(const ModelConfig& cfg, std::span<const LayerParams> layers,
                                   const Matrix& features, const GraphBundle& bundle,
                                   const LinearOperator& prop) {
  const Index n = bundle.num_nodes();
  DenseMatrix g = DenseMatrix::Zero(n, n);
  const LinearOperator* p = propagation_for(cfg, prop);
  if (!p) return g;
  Recorded r;
  record_loss(r, cfg, layers, features, bundle, p, &g);
  r.tape.backward(r.loss);
  return g;
}

DenseMatrix loss_grad_wrt_operator(const Workspace& ws, const ModelConfig& cfg,
                                   std::span<const LayerParams> layers) {
  if (cfg.kind == ModelKind::Gcn && cfg.propagation.kind == Propagation::Kind::Band) {
    throw CapabilityError(
        "loss_grad_wrt_operator: band-factored propagation; use full propagation for sensitivity");
  }
  if (!ws.op().has_dense())
    throw CapabilityError("loss_grad_wrt_operator: N exceeds the dense threshold");
  const PreparedModel pm = prepare_model(ws, cfg);
  return loss_grad_wrt_operator(cfg, layers, pm.features, ws.bundle(), ws.op());
}

Vector signed_spectral_gradient(const DenseMatrix& g, const SpectralDecomposition& d) {
  if (!d.complete()) throw CapabilityError("spectral_gradient: needs a complete decomposition");
  if (g.rows() != d.dimension || g.cols() != d.dimension)
    throw ShapeError("spectral_gradient: G must be N x N");
  const DenseMatrix gu = g * d.vectors;
  return d.vectors.cwiseProduct(gu).colwise().sum().transpose();
}

SpectralGradient spectral_gradient(const DenseMatrix& g, const SpectralDecomposition& d) {
  const Vector s = signed_spectral_gradient(g, d);
  SpectralGradient out;
  out.eigenvalues = d.values;
  out.magnitudes = s.cwiseAbs();
  Index start = 0;
  for (Index k = 1; k <= d.count(); ++k) {
    if (k < d.count() && std::abs(d.values[k - 1] - d.values[k]) <= 1e-9) continue;
    const double summed = s.segment(start, k - start).sum();
    out.eigenspaces.push_back({start, k - 1, d.values[start], std::abs(summed)});
    start = k;
  }
  return out;
}

double eigenvalue_finite_difference(const Workspace& ws, const ModelConfig& cfg,
                                    std::span<const LayerParams> layers, Index k, double h) {
  const SpectralDecomposition& d = ws.spectrum();
  if (k < 0 || k >= d.count()) throw RangeError("eigenvalue_finite_difference: k out of range");
  const PreparedModel pm = prepare_model(ws, cfg);
  const DenseMatrix& a = ws.op().dense();
  const DenseMatrix rank_one = d.vectors.col(k) * d.vectors.col(k).transpose();
  const DenseOperator up(a + h * rank_one);
  const DenseOperator down(a - h * rank_one);
  const double f_up = training_loss(cfg, layers, pm.features, ws.bundle(), up);
  const double f_down = training_loss(cfg, layers, pm.features, ws.bundle(), down);
  return (f_up - f_down) / (2.0 * h);
}

}  // namespace sgcn
