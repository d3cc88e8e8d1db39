#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sgcn/errors.hpp"
#include "sgcn/kernels.hpp"
#include "sgcn/models.hpp"
#include "sgcn/sbm.hpp"
#include "synthetic_task.hpp"
#include "test_support.hpp"

using namespace sgcn;
using sgcn::testing::random_matrix;

namespace {

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data());
}

ModelConfig quick(ModelKind kind = ModelKind::Gcn) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.hidden_layers = 1;
  cfg.hidden_size = 16;
  cfg.epochs = 60;
  cfg.patience = 30;
  return cfg;
}

}  // namespace

TEST(ModelConfig, Validation) {
  ModelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.depth(), 3);
  cfg.hidden_layers = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.patience = cfg.epochs + 1;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.dropout = 1.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.propagation = Propagation::band(5, 2);
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(GcnForward, IdentityPropagationIsBitwiseMlp) {
  const Matrix x = random_matrix(12, 5, 1);
  const auto layers = init_layers(5, 8, 2, 3, 2);
  for (bool training : {false, true}) {
    ForwardOptions fo;
    fo.dropout = 0.3;
    fo.training = training;
    fo.seed = 7;
    EXPECT_TRUE(bit_equal(gcn_forward(x, IdentityOperator(12), layers, fo), mlp_forward(x, layers, fo)));
  }
}

TEST(GcnForward, SingleLinearLayerIsPropagation) {
  const auto op = normalized_operator(sgcn::testing::erdos_renyi(15, 0.3, 3));
  const Matrix x = random_matrix(15, 4, 4);
  LayerParams id{Matrix::Identity(4, 4), Matrix::Zero(1, 4)};
  const std::vector<LayerParams> layers{id};
  Matrix expected(15, 4);
  kernels::serial::spmm(op.sparse(), x, expected);
  EXPECT_TRUE(bit_equal(gcn_forward(x, op, layers), expected));
}

TEST(GcnForward, PathGraphHandUnroll) {
  // Path 0-1-2: degrees 1, 2, 1.
  const auto op = normalized_operator(Graph::from_edge_list(3, std::vector<Edge>{{0, 1}, {1, 2}}));
  const double c = 0.5 / std::sqrt(2.0);
  const double a[3][3] = {{0.5, c, 0.0}, {c, 0.5, c}, {0.0, c, 0.5}};
  const Matrix x = random_matrix(3, 2, 5);
  const auto layers = init_layers(2, 3, 1, 2, 6);
  std::vector<LayerParams> biased = layers;
  biased[0].bias = random_matrix(1, 3, 7);
  biased[1].bias = random_matrix(1, 2, 8);

  double h[3][3];
  for (int i = 0; i < 3; ++i) {
    for (int o = 0; o < 3; ++o) {
      double s = biased[0].bias(0, o);
      for (int j = 0; j < 3; ++j)
        for (int f = 0; f < 2; ++f) s += a[i][j] * x(j, f) * biased[0].weight(f, o);
      h[i][o] = std::max(0.0, s);
    }
  }
  const Matrix out = gcn_forward(x, op, biased);
  for (int i = 0; i < 3; ++i) {
    for (int o = 0; o < 2; ++o) {
      double s = biased[1].bias(0, o);
      for (int j = 0; j < 3; ++j)
        for (int f = 0; f < 3; ++f) s += a[i][j] * h[j][f] * biased[1].weight(f, o);
      EXPECT_NEAR(out(i, o), s, 1e-12);
    }
  }
}

TEST(AugmentFeatures, ZeroIsUnchanged) {
  const Matrix x = random_matrix(10, 3, 9);
  const auto d = eig_full(normalized_operator(sgcn::testing::erdos_renyi(10, 0.4, 10)));
  EXPECT_EQ(augment_features(x, d, 0, Normalization::None), x);
}

TEST(AugmentFeatures, AppendsFromSecondEigenvector) {
  const Matrix x = random_matrix(20, 3, 11);
  const auto d = eig_full(normalized_operator(sgcn::testing::erdos_renyi(20, 0.3, 12)));
  const Matrix a = augment_features(x, d, 4, Normalization::None);
  ASSERT_EQ(a.cols(), 7);
  EXPECT_EQ(Matrix(a.leftCols(3)), x);
  for (Index c = 0; c < 4; ++c) EXPECT_EQ(Vector(a.col(3 + c)), d.vectors.col(1 + c));
  const Matrix b = augment_features(x, d, 4, Normalization::None, true);
  EXPECT_EQ(Vector(b.col(3)), d.vectors.col(0));
}

TEST(AugmentFeatures, CoraShape) {
  EXPECT_EQ(fraction_to_count(0.06, 2708), 162);
  const Index n = 200;
  const auto d = eig_full(normalized_operator(sgcn::testing::erdos_renyi(n, 0.05, 13)));
  EXPECT_EQ(augment_features(Matrix::Zero(n, 7), d, fraction_to_count(0.06, n), Normalization::None).cols(),
            7 + 12);
}

TEST(AugmentFeatures, Normalizations) {
  const Index n = 30;
  const Matrix x = random_matrix(n, 2, 14);
  const auto d = eig_full(normalized_operator(sgcn::testing::erdos_renyi(n, 0.2, 15)));
  const Matrix rows = augment_features(x, d, 5, Normalization::PerNode);
  for (Index i = 0; i < n; ++i) EXPECT_NEAR(rows.row(i).tail(5).norm(), 1.0, 1e-12);
  EXPECT_EQ(Matrix(rows.leftCols(2)), x);
  const Matrix cols = augment_features(x, d, 5, Normalization::PerFeature);
  for (Index c = 2; c < 7; ++c) {
    EXPECT_NEAR(cols.col(c).mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(cols.col(c).array().square().mean()), 1.0, 1e-12);
  }
}

TEST(AugmentFeatures, RangeErrors) {
  const Index n = 30;
  const auto op = normalized_operator(sgcn::testing::erdos_renyi(n, 0.2, 16));
  const auto d = eig_full(op);
  EXPECT_THROW(augment_features(Matrix::Zero(n, 1), d, n, Normalization::None), RangeError);
  EXPECT_NO_THROW(augment_features(Matrix::Zero(n, 1), d, n, Normalization::None, true));
  const auto top = eig_truncated(op, 5, SpectrumSide::Top);
  EXPECT_NO_THROW(augment_features(Matrix::Zero(n, 1), top, 4, Normalization::None));
  EXPECT_THROW(augment_features(Matrix::Zero(n, 1), top, 5, Normalization::None), RangeError);
}

TEST(FractionToCount, RoundingAndClamping) {
  EXPECT_EQ(fraction_to_count(0.001, 400), 1);
  EXPECT_EQ(fraction_to_count(0.1, 400), 40);
  EXPECT_EQ(fraction_to_count(0.0125, 400), 5);
  EXPECT_EQ(fraction_to_count(1.0, 400), 400);
  EXPECT_EQ(augment_count(1.0, 400, false), 399);
  EXPECT_EQ(augment_count(1.0, 400, true), 400);
}

TEST(EvaluateAccuracy, Basics) {
  const std::vector<Index> labels{0, 1, 2};
  const std::vector<Index> all{0, 1, 2};
  EXPECT_EQ(evaluate_accuracy(Matrix::Identity(3, 3), labels, all), 1.0);
  const std::vector<Index> zeros{0, 0, 0};
  EXPECT_EQ(evaluate_accuracy(Matrix::Zero(3, 3), zeros, all), 1.0);
  EXPECT_THROW(evaluate_accuracy(Matrix::Zero(3, 3), zeros, std::vector<Index>{}), DomainError);
}

TEST(EvaluateAccuracy, MatchesBruteForceCount) {
  const Matrix z = random_matrix(50, 4, 17);
  std::vector<Index> labels(50);
  std::vector<Index> mask;
  Rng rng(18);
  for (Index i = 0; i < 50; ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<Index>(rng.below(4));
    if (rng.bernoulli(0.6)) mask.push_back(i);
  }
  Index hits = 0;
  for (Index i : mask) {
    Index arg = 0;
    for (Index c = 1; c < 4; ++c)
      if (z(i, c) > z(i, arg)) arg = c;
    hits += arg == labels[static_cast<std::size_t>(i)];
  }
  EXPECT_EQ(evaluate_accuracy(z, labels, mask), static_cast<double>(hits) / mask.size());
}

TEST(Workspace, TruncatedAccessCovers) {
  const Workspace ws(sgcn::testing::tiny_bundle(2, 20, 0.4, 0.05, 1));
  EXPECT_TRUE(ws.top(5).covers(0, 4));
  EXPECT_TRUE(ws.bottom(5).covers(35, 39));
  EXPECT_TRUE(ws.spectrum().complete());
}

TEST(Train, SeparableTaskFitsTrainingSet) {
  const GraphBundle b = sgcn::testing::tiny_bundle(2, 100, 0.5, 0.05, 2, 4.0);
  ModelConfig cfg;
  cfg.hidden_layers = 1;
  const TrainReport r = train(b, cfg);
  double best_train = 0.0;
  for (const auto& e : r.epochs) best_train = std::max(best_train, e.train_acc);
  EXPECT_GE(best_train, 0.99);
  EXPECT_GE(r.test_acc, 0.95);
  EXPECT_LE(r.best_epoch, static_cast<int>(r.epochs.size()));
}

TEST(Train, ZeroLearningRateKeepsInitialization) {
  const GraphBundle b = sgcn::testing::tiny_bundle(3, 15, 0.4, 0.05, 3);
  ModelConfig cfg = quick();
  cfg.lr = 0.0;
  cfg.weight_decay = 0.0;
  const TrainReport r = train(b, cfg);
  ASSERT_EQ(r.best_params.size(), r.initial_params.size());
  for (std::size_t l = 0; l < r.best_params.size(); ++l) EXPECT_TRUE(r.best_params[l] == r.initial_params[l]);
  EXPECT_EQ(r.test_acc, r.initial_test_acc);
}

TEST(Train, Deterministic) {
  const Workspace ws(sgcn::testing::tiny_bundle(3, 20, 0.4, 0.05, 4));
  for (ModelKind k : {ModelKind::Gcn, ModelKind::Mlp}) {
    const ModelConfig cfg = quick(k);
    EXPECT_TRUE(train(ws, cfg).same_result(train(ws, cfg)));
    ModelConfig other = cfg;
    other.seed = 1;
    EXPECT_FALSE(train(ws, cfg).same_result(train(ws, other)));
  }
}

TEST(Train, EarlyStoppingRespectsPatience) {
  const Workspace ws(sgcn::testing::tiny_bundle(3, 20, 0.4, 0.05, 5));
  ModelConfig cfg = quick();
  cfg.epochs = 300;
  cfg.patience = 10;
  const TrainReport r = train(ws, cfg);
  EXPECT_LE(static_cast<int>(r.epochs.size()), r.best_epoch + 1 + 10);
  for (const auto& e : r.epochs) {
    EXPECT_GE(e.val_acc, 0.0);
    EXPECT_LE(e.val_acc, r.best_val_acc);
  }
}

TEST(Train, FullWidthBandMatchesFullPropagationBitwise) {
  const Workspace ws(sgcn::testing::tiny_bundle(2, 20, 0.4, 0.05, 6));
  ModelConfig cfg = quick();
  const TrainReport full = train(ws, cfg);
  cfg.propagation = Propagation::band(0, ws.num_nodes() - 1);
  EXPECT_TRUE(train(ws, cfg).same_result(full));
}

TEST(Train, BandPropagationUsesTruncatedSpectrum) {
  const Workspace ws(sgcn::testing::tiny_bundle(2, 20, 0.4, 0.05, 7));
  ModelConfig cfg = quick();
  cfg.propagation = Propagation::band(0, 3);
  EXPECT_NO_THROW(train(ws, cfg));
  cfg.propagation = Propagation::band(30, 39);
  EXPECT_NO_THROW(train(ws, cfg));
  cfg.propagation = Propagation::band(10, 50);
  EXPECT_THROW(train(ws, cfg), RangeError);
}

TEST(Train, AugmentationSignFlipIsStatisticallyNeutral) {
  SyntheticTask task;
  task.block_size = 300;
  const GraphBundle base = task.bundle(8);
  const auto d = eig_full(normalized_operator(base.graph));
  SpectralDecomposition flipped = d;
  for (Index c = 1; c <= 4; c += 2) flipped.vectors.col(c) *= -1.0;
  GraphBundle a = base;
  GraphBundle b = base;
  a.features = augment_features(base.features, d, 4, Normalization::None);
  b.features = augment_features(base.features, flipped, 4, Normalization::None);
  double ma = 0.0;
  double mb = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    ModelConfig cfg = task.mlp(s);
    cfg.epochs = 200;
    cfg.patience = 100;
    cfg.dropout = 0.0;
    ma += train(a, cfg).test_acc / 5;
    mb += train(b, cfg).test_acc / 5;
  }
  EXPECT_NEAR(ma, mb, 0.01);
}

TEST(Grid, Cardinality) {
  EXPECT_EQ(GridSpec{}.cardinality(), 1200u);
  EXPECT_EQ(expand_grid(ModelConfig{}, GridSpec{}, 400).size(), 1200u);
}

TEST(Grid, FrequencyMapsToBandOrAugmentation) {
  GridSpec g;
  g.lrs = {0.01};
  g.hidden_layers = {1};
  g.dropouts = {0.5};
  g.frequencies = {10, 100};
  g.normalizations = {Normalization::None};
  const auto gcn = expand_grid(ModelConfig{}, g, 200);
  EXPECT_EQ(gcn[0].first.propagation, Propagation::band(0, 19));
  EXPECT_EQ(gcn[1].first.propagation, Propagation::full());
  ModelConfig m;
  m.kind = ModelKind::Mlp;
  const auto mlp = expand_grid(m, g, 200);
  EXPECT_EQ(mlp[0].first.augment_k, 20);
  EXPECT_EQ(mlp[1].first.augment_k, 199);
}

TEST(Grid, SingletonReturnsThatConfig) {
  const Workspace ws(sgcn::testing::tiny_bundle(2, 15, 0.4, 0.05, 9));
  GridSpec g;
  g.lrs = {0.01};
  g.hidden_layers = {1};
  g.dropouts = {0.2};
  g.frequencies = {100};
  g.normalizations = {Normalization::None};
  const GridResult r = grid_search(ws, quick(), g);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.best, r.rows[0].config);
  EXPECT_EQ(r.best.dropout, 0.2);
}

TEST(Grid, NeverPicksZeroLearningRate) {
  const Workspace ws(sgcn::testing::tiny_bundle(3, 30, 0.3, 0.03, 10, 1.5));
  GridSpec g;
  g.lrs = {0.0, 0.01};
  g.hidden_layers = {1};
  g.dropouts = {0.0};
  g.frequencies = {100};
  g.normalizations = {Normalization::None};
  ModelConfig cfg = quick();
  cfg.epochs = 100;
  cfg.patience = 100;
  const GridResult r = grid_search(ws, cfg, g);
  EXPECT_EQ(r.best.lr, 0.01);
  EXPECT_GT(r.rows[1].val_acc, r.rows[0].val_acc);
}

TEST(Train, EmptySplitIsRejected) {
  GraphBundle b = sgcn::testing::tiny_bundle(2, 10, 0.4, 0.05, 11);
  b.val.clear();
  EXPECT_THROW(train(b, quick()), DomainError);
}
