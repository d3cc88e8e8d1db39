#include <benchmark/benchmark.h>

#include "sgcn/graph.hpp"
#include "sgcn/kernels.hpp"
#include "sgcn/rng.hpp"
#include "sgcn/sbm.hpp"

using namespace sgcn;

namespace {

const PropagationOperator& bench_operator() {
  static const PropagationOperator op =
      normalized_operator(sample_sbm(planted_partition(4, 500, 0.02, 0.002, 3)).graph);
  return op;
}

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

template <bool Parallel>
void BM_Spmm(benchmark::State& state) {
  const auto& a = bench_operator().sparse();
  const Matrix x = random_matrix(a.cols(), state.range(0), 1);
  Matrix out(a.rows(), x.cols());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::spmm(a, x, out);
    else kernels::serial::spmm(a, x, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_BandApply(benchmark::State& state) {
  const Index n = 2000;
  const DenseMatrix basis = random_matrix(n, state.range(0), 2);
  const Vector scale = Vector::Ones(basis.cols());
  const Matrix x = random_matrix(n, 64, 3);
  Matrix out(n, 64);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::band_apply(basis, scale, x, out);
    else kernels::serial::band_apply(basis, scale, x, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_ProjectOut(benchmark::State& state) {
  const Index n = 4000;
  const DenseMatrix q = random_matrix(n, state.range(0), 4);
  Vector v = random_matrix(n, 1, 5).col(0);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::project_out(q, q.cols(), v);
    else kernels::serial::project_out(q, q.cols(), v);
    benchmark::DoNotOptimize(v.data());
  }
}

}  // namespace

BENCHMARK(BM_Spmm<false>)->Arg(16)->Arg(128);
BENCHMARK(BM_Spmm<true>)->Arg(16)->Arg(128);
BENCHMARK(BM_BandApply<false>)->Arg(20)->Arg(200);
BENCHMARK(BM_BandApply<true>)->Arg(20)->Arg(200);
BENCHMARK(BM_ProjectOut<false>)->Arg(50)->Arg(300);
BENCHMARK(BM_ProjectOut<true>)->Arg(50)->Arg(300);

BENCHMARK_MAIN();
