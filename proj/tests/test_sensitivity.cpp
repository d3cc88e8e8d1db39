#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sgcn/errors.hpp"
#include "sgcn/rng.hpp"
#include "sgcn/sensitivity.hpp"
#include "test_support.hpp"

using namespace sgcn;
using sgcn::testing::random_matrix;

namespace {

struct Fixture {
  Workspace ws{sgcn::testing::tiny_bundle(3, 8, 0.5, 0.1, 21)};
  ModelConfig cfg;
  std::vector<LayerParams> layers;

  Fixture() {
    cfg.hidden_layers = 1;
    cfg.hidden_size = 5;
    cfg.dropout = 0.3;
    layers = init_layers(ws.bundle().num_features(), 5, 1, 3, 22);
    for (auto& l : layers) l.bias = random_matrix(1, l.bias.cols(), 23, 0.1);
  }

  double loss(const DenseMatrix& a) const {
    return training_loss(cfg, layers, ws.bundle().features, ws.bundle(), DenseOperator(a));
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

}  // namespace

TEST(OperatorGradient, ZeroForMlpAndIdentity) {
  Fixture f;
  f.cfg.kind = ModelKind::Mlp;
  EXPECT_EQ(loss_grad_wrt_operator(f.ws, f.cfg, f.layers).cwiseAbs().maxCoeff(), 0.0);
  f.cfg.kind = ModelKind::Gcn;
  f.cfg.propagation = Propagation::identity();
  EXPECT_EQ(loss_grad_wrt_operator(f.ws, f.cfg, f.layers).cwiseAbs().maxCoeff(), 0.0);
}

TEST(OperatorGradient, EntriesMatchCentralDifferences) {
  Fixture f;
  const DenseMatrix g = loss_grad_wrt_operator(f.ws, f.cfg, f.layers);
  const DenseMatrix a = f.ws.op().dense();
  const double h = 1e-6;
  Rng rng(24);
  for (int t = 0; t < 20; ++t) {
    const auto i = static_cast<Index>(rng.below(24));
    const auto j = static_cast<Index>(rng.below(24));
    DenseMatrix up = a;
    DenseMatrix down = a;
    up(i, j) += h;
    down(i, j) -= h;
    const double fd = (f.loss(up) - f.loss(down)) / (2 * h);
    EXPECT_LT(rel(g(i, j), fd), 1e-5) << i << "," << j << " " << g(i, j) << " vs " << fd;
  }
}

TEST(OperatorGradient, SymmetricDirectionalDerivatives) {
  Fixture f;
  const DenseMatrix g = loss_grad_wrt_operator(f.ws, f.cfg, f.layers);
  const DenseMatrix a = f.ws.op().dense();
  const double h = 1e-6;
  for (std::uint64_t s = 0; s < 5; ++s) {
    DenseMatrix e = random_matrix(24, 24, 30 + s);
    e = (e + e.transpose()).eval() / 2;
    const double fd = (f.loss(a + h * e) - f.loss(a - h * e)) / (2 * h);
    EXPECT_LT(rel(g.cwiseProduct(e).sum(), fd), 1e-5) << s;
  }
}

TEST(OperatorGradient, DeeperModelMatchesDifferences) {
  Fixture f;
  f.cfg.hidden_layers = 3;
  f.layers = init_layers(f.ws.bundle().num_features(), 4, 3, 3, 25);
  const DenseMatrix g = loss_grad_wrt_operator(f.ws, f.cfg, f.layers);
  const DenseMatrix a = f.ws.op().dense();
  const DenseMatrix e = random_matrix(24, 24, 26);
  const double h = 1e-6;
  const double fd = (f.loss(a + h * e) - f.loss(a - h * e)) / (2 * h);
  EXPECT_LT(rel(g.cwiseProduct(e).sum(), fd), 1e-5);
}

TEST(OperatorGradient, BandPropagationIsUnsupported) {
  Fixture f;
  f.cfg.propagation = Propagation::band(0, 3);
  EXPECT_THROW(loss_grad_wrt_operator(f.ws, f.cfg, f.layers), CapabilityError);
}

TEST(SpectralGradient, IdentityGradientGivesOnes) {
  const auto d = eig_full(normalized_operator(sgcn::testing::erdos_renyi(15, 0.3, 27)));
  const SpectralGradient s = spectral_gradient(DenseMatrix::Identity(15, 15), d);
  for (Index k = 0; k < 15; ++k) EXPECT_NEAR(s.magnitudes[k], 1.0, 1e-12);
  EXPECT_EQ(s.eigenvalues, d.values);
}

TEST(SpectralGradient, RankOneGradientSelectsItsEigenvector) {
  const auto d = eig_full(normalized_operator(sgcn::testing::erdos_renyi(15, 0.3, 28)));
  const DenseMatrix g = d.vectors.col(0) * d.vectors.col(0).transpose();
  const SpectralGradient s = spectral_gradient(g, d);
  EXPECT_NEAR(s.magnitudes[0], 1.0, 1e-12);
  EXPECT_LT(s.magnitudes.tail(14).maxCoeff(), 1e-10);
}

TEST(SpectralGradient, SignFlipsLeaveMagnitudesUnchanged) {
  const auto d = eig_full(normalized_operator(sgcn::testing::erdos_renyi(15, 0.3, 29)));
  DenseMatrix g = random_matrix(15, 15, 30);
  SpectralDecomposition flipped = d;
  Rng rng(31);
  for (Index k = 0; k < 15; ++k)
    if (rng.bernoulli(0.5)) flipped.vectors.col(k) *= -1.0;
  EXPECT_LT((spectral_gradient(g, d).magnitudes - spectral_gradient(g, flipped).magnitudes)
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(SpectralGradient, RequiresCompleteDecomposition) {
  const auto op = normalized_operator(sgcn::testing::erdos_renyi(30, 0.3, 32));
  const auto top = eig_truncated(op, 4, SpectrumSide::Top);
  EXPECT_THROW(spectral_gradient(DenseMatrix::Identity(30, 30), top), CapabilityError);
  EXPECT_THROW(spectral_gradient(DenseMatrix::Identity(5, 5), eig_full(op)), ShapeError);
}

TEST(SpectralGradient, EigenspacesSumTiedEntries) {
  // Star graph K_{1,4}: the leaves share a three-fold eigenvalue.
  std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  const auto d = eig_full(normalized_operator(Graph::from_edge_list(5, star)));
  const DenseMatrix g = random_matrix(5, 5, 33);
  const SpectralGradient s = spectral_gradient(g, d);
  const Vector signed_s = signed_spectral_gradient(g, d);
  ASSERT_EQ(s.eigenspaces.size(), 3u);
  EXPECT_EQ(s.eigenspaces[1].first, 1);
  EXPECT_EQ(s.eigenspaces[1].last, 3);
  EXPECT_NEAR(s.eigenspaces[1].eigenvalue, 0.5, 1e-12);
  EXPECT_NEAR(s.eigenspaces[1].magnitude, std::abs(signed_s.segment(1, 3).sum()), 1e-14);
  // The group sum is the trace of G over the eigenspace, independent of basis.
  const DenseMatrix basis = d.vectors.middleCols(1, 3);
  EXPECT_NEAR(s.eigenspaces[1].magnitude, std::abs((basis.transpose() * g * basis).trace()), 1e-12);
}

TEST(SpectralGradient, EigenvalueDerivativeMatchesDifferences) {
  Fixture f;
  const DenseMatrix g = loss_grad_wrt_operator(f.ws, f.cfg, f.layers);
  const Vector s = signed_spectral_gradient(g, f.ws.spectrum());
  for (Index k : {0, 1, 5, 12, 23}) {
    const double fd = eigenvalue_finite_difference(f.ws, f.cfg, f.layers, k);
    EXPECT_LT(std::abs(s[k] - fd), 1e-6 * std::max(1.0, std::abs(fd))) << k;
  }
  EXPECT_THROW(eigenvalue_finite_difference(f.ws, f.cfg, f.layers, 24), RangeError);
}
