#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <omp.h>

#include "sgcn/dataset_io.hpp"
#include "sgcn/errors.hpp"
#include "sgcn/sbm.hpp"
#include "sgcn/spectral.hpp"

using namespace sgcn;

TEST(Sbm, ZeroProbabilitiesGiveEmptyGraph) {
  const SbmSpec spec{{10, 10}, DenseMatrix::Zero(2, 2), 1};
  EXPECT_EQ(sample_sbm(spec).graph.num_edges(), 0);
}

TEST(Sbm, UnitProbabilityGivesCompleteGraph) {
  const SbmSpec spec{{3}, DenseMatrix::Ones(1, 1), 1};
  const Graph g = sample_sbm(spec).graph;
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}}));
}

TEST(Sbm, EdgeFrequenciesConcentrate) {
  const SbmSpec spec = planted_partition(2, 100, 0.5, 0.05, 17);
  const SbmSample s = sample_sbm(spec);
  double intra = 0;
  double inter = 0;
  for (const auto& [u, v] : s.graph.edges()) (s.communities[u] == s.communities[v] ? intra : inter) += 1;
  const double n_intra = 2 * 100 * 99 / 2.0;
  const double n_inter = 100 * 100;
  EXPECT_NEAR(intra / n_intra, 0.5, 3 * std::sqrt(0.25 / n_intra));
  EXPECT_NEAR(inter / n_inter, 0.05, 3 * std::sqrt(0.05 * 0.95 / n_inter));
}

TEST(Sbm, NoSelfLoops) {
  const SbmSample s = sample_sbm(planted_partition(3, 30, 0.9, 0.3, 2));
  for (const auto& [u, v] : s.graph.edges()) EXPECT_NE(u, v);
}

TEST(Sbm, ParallelSamplingMatchesSerialAtAnyThreadCount) {
  const SbmSpec spec = planted_partition(3, 70, 0.2, 0.03, 5);
  const Graph ref = sample_sbm_serial(spec).graph;
  const int saved = omp_get_max_threads();
  for (int t : {1, 2, 5}) {
    omp_set_num_threads(t);
    EXPECT_EQ(sample_sbm(spec).graph, ref) << t;
  }
  omp_set_num_threads(saved);
}

TEST(Sbm, SeedChangesGraph) {
  EXPECT_NE(sample_sbm(planted_partition(2, 50, 0.2, 0.05, 1)).graph,
            sample_sbm(planted_partition(2, 50, 0.2, 0.05, 2)).graph);
}

TEST(Sbm, ValidationRejectsBadMatrices) {
  DenseMatrix asym(2, 2);
  asym << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW((SbmSpec{{5, 5}, asym, 0}.validate()), InputError);
  EXPECT_THROW((SbmSpec{{5, 5}, DenseMatrix::Constant(2, 2, 1.5), 0}.validate()), InputError);
  EXPECT_THROW((SbmSpec{{5}, DenseMatrix::Constant(2, 2, 0.5), 0}.validate()), InputError);
  EXPECT_THROW((SbmSpec{{0, 5}, DenseMatrix::Constant(2, 2, 0.5), 0}.validate()), InputError);
}

TEST(ExpectedAdjacency, OneBlockIsConstant) {
  const SbmSpec spec{{4}, DenseMatrix::Constant(1, 1, 0.3), 0};
  EXPECT_EQ(expected_adjacency(spec), DenseMatrix::Constant(4, 4, 0.3));
}

TEST(ExpectedAdjacency, TwoBlockEigenstructure) {
  const Index c = 20;
  const double p = 0.6;
  const double q = 0.1;
  const SbmSpec spec = planted_partition(2, c, p, q, 0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(expected_adjacency(spec));
  const Vector ev = es.eigenvalues();
  EXPECT_NEAR(ev[2 * c - 1], c * (p + q), 1e-10);
  EXPECT_NEAR(ev[2 * c - 2], c * (p - q), 1e-10);
  EXPECT_LT(ev.head(2 * c - 2).cwiseAbs().maxCoeff(), 1e-10);

  Vector ones = Vector::Ones(2 * c) / std::sqrt(2.0 * c);
  Vector split(2 * c);
  split << Vector::Ones(c), -Vector::Ones(c);
  split /= std::sqrt(2.0 * c);
  EXPECT_NEAR(std::abs(es.eigenvectors().col(2 * c - 1).dot(ones)), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(es.eigenvectors().col(2 * c - 2).dot(split)), 1.0, 1e-10);
}

TEST(ExpectedAdjacency, SecondEigenvectorSignsPartitionExactly) {
  const SbmSpec spec = planted_partition(2, 50, 0.5, 0.05, 0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(expected_adjacency(spec));
  const Vector u = es.eigenvectors().col(98);
  for (Index i = 0; i < 100; ++i) EXPECT_EQ(u[i] > 0, u[0] > 0 ? i < 50 : i >= 50) << i;
}

TEST(SpectralGap, Values) {
  EXPECT_NEAR(spectral_gap(0.5, 0.05), 0.45 / 0.55, 1e-15);
  EXPECT_NEAR(spectral_gap(0.5, 0.05), 0.818182, 1e-6);
  EXPECT_EQ(spectral_gap(0.5, 0.0), 1.0);
  EXPECT_LT(spectral_gap(0.5, 0.5 - 1e-6), 2e-6);
}

TEST(SpectralGap, DomainErrors) {
  EXPECT_THROW(spectral_gap(0.3, 0.3), DomainError);
  EXPECT_THROW(spectral_gap(0.3, 0.4), DomainError);
  EXPECT_THROW(spectral_gap(1.2, 0.1), DomainError);
  EXPECT_THROW(spectral_gap(0.3, -0.1), DomainError);
}

TEST(SbmRecovery, SampledSecondEigenvectorAgrees) {
  double total = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const SbmSample sample = sample_sbm(planted_partition(2, 100, 0.5, 0.05, 40 + s));
    const auto d = eig_full(normalized_operator(sample.graph));
    Index agree = 0;
    for (Index i = 0; i < 200; ++i) agree += (d.vectors(i, 1) > 0) == (sample.communities[i] == 0);
    total += std::max(agree, 200 - agree) / 200.0;
  }
  EXPECT_GE(total / 5, 0.95);
}

namespace {

// Lloyd's algorithm with farthest-point seeding; deterministic.
std::vector<Index> kmeans(const DenseMatrix& rows, Index k) {
  const Index n = rows.rows();
  std::vector<Index> centers{0};
  while (static_cast<Index>(centers.size()) < k) {
    Index far = 0;
    double best = -1.0;
    for (Index i = 0; i < n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (Index c : centers) d = std::min(d, (rows.row(i) - rows.row(c)).squaredNorm());
      if (d > best) {
        best = d;
        far = i;
      }
    }
    centers.push_back(far);
  }
  DenseMatrix mu(k, rows.cols());
  for (Index c = 0; c < k; ++c) mu.row(c) = rows.row(centers[c]);
  std::vector<Index> assign(n, 0);
  for (int it = 0; it < 100; ++it) {
    for (Index i = 0; i < n; ++i) {
      Index arg = 0;
      for (Index c = 1; c < k; ++c)
        if ((rows.row(i) - mu.row(c)).squaredNorm() < (rows.row(i) - mu.row(arg)).squaredNorm()) arg = c;
      assign[i] = arg;
    }
    DenseMatrix next = DenseMatrix::Zero(k, rows.cols());
    Vector count = Vector::Zero(k);
    for (Index i = 0; i < n; ++i) {
      next.row(assign[i]) += rows.row(i);
      count[assign[i]] += 1;
    }
    for (Index c = 0; c < k; ++c)
      if (count[c] > 0) mu.row(c) = next.row(c) / count[c];
  }
  return assign;
}

// Best agreement over all label permutations.
double matched_agreement(const std::vector<Index>& a, const std::vector<Index>& b, Index k) {
  std::vector<Index> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    Index hits = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hits += perm[a[i]] == b[i];
    best = std::max(best, static_cast<double>(hits) / a.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST(SbmRecovery, RankFourBandSeparatesFourCommunities) {
  const SbmSample s = sample_sbm(planted_partition(4, 60, 0.5, 0.05, 9));
  const auto d = eig_full(normalized_operator(s.graph));
  const DenseMatrix top4 = d.vectors.leftCols(4);
  // Rows of the degree-normalized top block.
  DenseMatrix rows = top4;
  for (Index i = 0; i < rows.rows(); ++i) rows.row(i).normalize();
  EXPECT_GE(matched_agreement(kmeans(rows, 4), s.communities, 4), 0.95);
}

TEST(BayesAccuracy, MatchesIndependentQuadrature) {
  // Reference values from adaptive quadrature of phi(z) Phi(z + s)^(r - 1).
  EXPECT_NEAR(onehot_bayes_accuracy(2.0, 4), 0.8227929559932297, 1e-9);
  EXPECT_NEAR(onehot_bayes_accuracy(1.0, 3), 0.6337020457780798, 1e-9);
  EXPECT_NEAR(onehot_bayes_accuracy(0.0, 4), 0.25, 1e-9);
  // Two classes: closed form Phi(s / sqrt 2).
  EXPECT_NEAR(onehot_bayes_accuracy(1.5, 2), 0.8555778168267576, 1e-9);
}

TEST(BayesAccuracy, InverseSolvesTarget) {
  EXPECT_NEAR(separation_for_accuracy(0.85, 4), 2.1398844273480604, 1e-6);
  for (double t : {0.5, 0.7, 0.95})
    EXPECT_NEAR(onehot_bayes_accuracy(separation_for_accuracy(t, 3), 3), t, 1e-9);
}

TEST(BayesAccuracy, EmpiricalArgmaxAccuracyMatches) {
  std::vector<Index> c(20000);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<Index>(i % 4);
  FeatureSpec f;
  f.dim = 4;
  const Matrix x = community_features(c, 4, f);
  Index hits = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    Index arg = 0;
    x.row(i).maxCoeff(&arg);
    hits += arg == c[static_cast<std::size_t>(i)];
  }
  const double acc = static_cast<double>(hits) / x.rows();
  EXPECT_NEAR(acc, 0.85, 3 * std::sqrt(0.85 * 0.15 / x.rows()));
}

TEST(SbmBundle, ShapesAndSplits) {
  FeatureSpec f;
  const GraphBundle b = make_sbm_bundle(planted_partition(4, 25, 0.3, 0.05, 3), f);
  EXPECT_EQ(b.num_nodes(), 100);
  EXPECT_EQ(b.num_features(), 16);
  EXPECT_EQ(b.num_classes, 4);
  EXPECT_EQ(b.train.size(), 40u);
  EXPECT_EQ(b.val.size(), 20u);
  EXPECT_EQ(b.test.size(), 40u);
  EXPECT_NO_THROW(b.validate());
  EXPECT_TRUE(b == make_sbm_bundle(planted_partition(4, 25, 0.3, 0.05, 3), f));
}
