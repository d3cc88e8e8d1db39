#include "sgcn/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sgcn/dataset_io.hpp"
#include "sgcn/errors.hpp"
#include "sgcn/rng.hpp"

namespace sgcn {

void SbmSpec::validate() const {
  const auto r = static_cast<Index>(block_sizes.size());
  if (r == 0) throw InputError("SbmSpec: no blocks");
  if (prob_matrix.rows() != r || prob_matrix.cols() != r)
    throw InputError("SbmSpec: prob_matrix must be " + std::to_string(r) + "x" + std::to_string(r));
  for (Index a = 0; a < r; ++a) {
    if (block_sizes[a] <= 0) throw InputError("SbmSpec: block sizes must be positive");
    for (Index b = 0; b < r; ++b) {
      const double p = prob_matrix(a, b);
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("SbmSpec: probabilities must lie in [0, 1]");
      if (p != prob_matrix(b, a)) throw InputError("SbmSpec: prob_matrix must be symmetric");
    }
  }
}

Index SbmSpec::num_nodes() const {
  Index n = 0;
  for (Index s : block_sizes) n += s;
  return n;
}

std::vector<Index> SbmSpec::communities() const {
  std::vector<Index> c;
  c.reserve(static_cast<std::size_t>(num_nodes()));
  for (std::size_t b = 0; b < block_sizes.size(); ++b)
    c.insert(c.end(), static_cast<std::size_t>(block_sizes[b]), static_cast<Index>(b));
  return c;
}

SbmSpec planted_partition(Index blocks, Index block_size, double p, double q, std::uint64_t seed) {
  SbmSpec spec;
  spec.block_sizes.assign(static_cast<std::size_t>(blocks), block_size);
  spec.prob_matrix = DenseMatrix::Constant(blocks, blocks, q);
  spec.prob_matrix.diagonal().setConstant(p);
  spec.seed = seed;
  return spec;
}

namespace {

void sample_row(const SbmSpec& spec, const std::vector<Index>& c, Index i,
                std::vector<Edge>& out) {
  const Index n = static_cast<Index>(c.size());
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
  for (Index j = i + 1; j < n; ++j) {
    if (rng.bernoulli(spec.prob_matrix(c[i], c[j]))) out.emplace_back(i, j);
  }
}

SbmSample collect(std::vector<Index> c,
                  std::vector<std::vector<Edge>>& rows) {
  std::vector<Edge> edges;
  for (auto& r : rows) edges.insert(edges.end(), r.begin(), r.end());
  return {Graph::from_edge_list(static_cast<Index>(c.size()), edges), std::move(c)};
}

}  // namespace

SbmSample sample_sbm(const SbmSpec& spec) {
  spec.validate();
  std::vector<Index> c = spec.communities();
  const Index n = static_cast<Index>(c.size());
  std::vector<std::vector<Edge>> rows(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 16)
  for (Index i = 0; i < n; ++i) sample_row(spec, c, i, rows[i]);
  return collect(std::move(c), rows);
}

SbmSample sample_sbm_serial(const SbmSpec& spec) {
  spec.validate();
  std::vector<Index> c = spec.communities();
  const Index n = static_cast<Index>(c.size());
  std::vector<std::vector<Edge>> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) sample_row(spec, c, i, rows[i]);
  return collect(std::move(c), rows);
}

DenseMatrix expected_adjacency(const SbmSpec& spec) {
  spec.validate();
  const std::vector<Index> c = spec.communities();
  const Index n = static_cast<Index>(c.size());
  DenseMatrix e(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) e(i, j) = spec.prob_matrix(c[i], c[j]);
  return e;
}

double spectral_gap(double p, double q) {
  if (!(0.0 <= q && q < p && p <= 1.0))
    throw DomainError("spectral_gap: need 0 <= q < p <= 1");
  return (p - q) / (p + q);
}

double onehot_bayes_accuracy(double separation, Index classes) {
  if (classes < 1) throw DomainError("onehot_bayes_accuracy: need at least one class");
  // Composite Simpson on [-12, 12]; the integrand is negligible outside.
  constexpr int kIntervals = 4000;
  constexpr double lo = -12.0;
  constexpr double hi = 12.0;
  const double h = (hi - lo) / kIntervals;
  const auto integrand = [&](double z) {
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double cdf = 0.5 * std::erfc(-(z + separation) / std::numbers::sqrt2);
    return phi * std::pow(cdf, static_cast<double>(classes - 1));
  };
  double sum = integrand(lo) + integrand(hi);
  for (int i = 1; i < kIntervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(lo + i * h);
  return sum * h / 3.0;
}

double separation_for_accuracy(double target, Index classes) {
  const double floor = 1.0 / static_cast<double>(classes);
  if (!(target > floor && target < 1.0))
    throw DomainError("separation_for_accuracy: target must lie in (1/classes, 1)");
  double lo = 0.0;
  double hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (onehot_bayes_accuracy(mid, classes) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Matrix community_features(const std::vector<Index>& communities, Index classes,
                          const FeatureSpec& spec) {
  if (spec.dim < classes) throw InputError("community_features: dim must be >= number of classes");
  const double sep =
      spec.separation > 0.0 ? spec.separation : separation_for_accuracy(spec.bayes_target, classes);
  const Index n = static_cast<Index>(communities.size());
  Matrix x(n, spec.dim);
  Rng rng(spec.seed);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < spec.dim; ++j) x(i, j) = rng.normal();
    x(i, communities[i]) += sep;
  }
  return x;
}

GraphBundle make_sbm_bundle(const SbmSpec& spec, const FeatureSpec& features,
                            const SplitFractions& split, std::uint64_t split_seed) {
  if (!(split.train > 0.0 && split.val > 0.0 && split.train + split.val < 1.0))
    throw InputError("make_sbm_bundle: split fractions must be positive and sum below 1");
  SbmSample sample = sample_sbm(spec);
  const Index n = sample.graph.num_nodes();
  const Index classes = static_cast<Index>(spec.block_sizes.size());

  GraphBundle b;
  b.name = "sbm";
  b.features = community_features(sample.communities, classes, features);
  b.graph = std::move(sample.graph);
  b.labels = std::move(sample.communities);
  b.num_classes = classes;

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[i] = i;
  Rng rng(split_seed);
  shuffle(order, rng);
  const auto n_train = static_cast<std::size_t>(std::llround(split.train * n));
  const auto n_val = static_cast<std::size_t>(std::llround(split.val * n));
  b.train.assign(order.begin(), order.begin() + n_train);
  b.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  b.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(b.train.begin(), b.train.end());
  std::sort(b.val.begin(), b.val.end());
  std::sort(b.test.begin(), b.test.end());
  b.validate();
  return b;
}

}  // namespace sgcn
