#pragma once

#include <string>
#include <vector>

#include "sgcn/models.hpp"

namespace sgcn {

// |d loss / d lambda_k| at fixed eigenvectors, aligned with the stored
// descending eigenvalues.
struct SpectralGradient {
  Vector eigenvalues;
  Vector magnitudes;  // |u_k^T G u_k|
  // Basis-invariant version for degenerate spectra: one entry per group of
  // eigenvalues equal within 1e-9, holding |sum_{k in group} u_k^T G u_k|.
  struct Eigenspace {
    Index first;
    Index last;
    double eigenvalue;
    double magnitude;
  };
  std::vector<Eigenspace> eigenspaces;
  std::string model_tag;    // "init" or "trained"
  std::string dataset_tag;
};

// Training loss (inference mode: no dropout) of a model whose propagation
// operator is `prop`; the MLP ignores prop.
double training_loss(const ModelConfig& cfg, std::span<const LayerParams> layers,
                     const Matrix& features, const GraphBundle& bundle, const LinearOperator& prop);

// G = d loss / d A over every layer where A is applied, entries of A treated
// as independent. The loss is the inference-mode training loss. Zero for an
// MLP or identity propagation; CapabilityError for a band-factored model.
DenseMatrix loss_grad_wrt_operator(const Workspace& ws, const ModelConfig& cfg,
                                   std::span<const LayerParams> layers);

// Same, against an explicit operator (used to differentiate around
// perturbed copies of A).
DenseMatrix loss_grad_wrt_operator(const ModelConfig& cfg, std::span<const LayerParams> layers,
                                   const Matrix& features, const GraphBundle& bundle,
                                   const LinearOperator& prop);

// Entry k is |u_k^T G u_k|. Requires a complete decomposition
// (CapabilityError otherwise).
SpectralGradient spectral_gradient(const DenseMatrix& g, const SpectralDecomposition& d);

// Signed u_k^T G u_k, for checks against finite differences.
Vector signed_spectral_gradient(const DenseMatrix& g, const SpectralDecomposition& d);

// Central difference of the training loss in lambda_k: the operator is
// rebuilt as A + t u_k u_k^T for t = +h and -h.
double eigenvalue_finite_difference(const Workspace& ws, const ModelConfig& cfg,
                                    std::span<const LayerParams> layers, Index k, double h = 1e-5);

}  // namespace sgcn
