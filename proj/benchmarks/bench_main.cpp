#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "omprip/harness.hpp"
#include "omprip/linalg.hpp"
#include "omprip/objective.hpp"
#include "omprip/omp.hpp"
#include "omprip/rsc.hpp"

using namespace omprip;

namespace {

SupportSet first_indices(std::size_t k) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  return SupportSet(idx);
}

}  // namespace

static void BM_RestrictedLeastSquares(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const DenseMatrix A = gen_gaussian_matrix(64, 128, 1);
  const TargetSignal target =
      gen_sparse_signal(128, k, SignalProfile::flat(), 2);
  const DenseVector y = matvec(A, target.xbar);
  const SupportSet F = first_indices(k);
  for (auto _ : state) {
    DenseVector x = restricted_least_squares(A, y, F);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_RestrictedLeastSquares)->Arg(4)->Arg(16)->Arg(48);

static void BM_SymmetricEigExtremes(benchmark::State& state) {
  const std::size_t s = static_cast<std::size_t>(state.range(0));
  const DenseMatrix A = gen_gaussian_matrix(64, 128, 3);
  const DenseMatrix G = gram_submatrix(A, first_indices(s));
  for (auto _ : state) {
    auto extremes = symmetric_eig_extremes(G);
    benchmark::DoNotOptimize(extremes);
  }
}
BENCHMARK(BM_SymmetricEigExtremes)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_GreedyRecovery(benchmark::State& state) {
  const std::size_t kbar = static_cast<std::size_t>(state.range(0));
  const DenseMatrix A = gen_gaussian_matrix(128, 256, 4);
  const TargetSignal target =
      gen_sparse_signal(256, kbar, SignalProfile::flat(), 5);
  const QuadraticObjective obj{SensingProblem(A, matvec(A, target.xbar))};
  OmpConfig cfg;
  cfg.k0 = kbar;
  for (auto _ : state) {
    OmpResult result = omp_run(obj, cfg);
    benchmark::DoNotOptimize(result.final_iterate().data());
  }
}
BENCHMARK(BM_GreedyRecovery)->Arg(2)->Arg(8)->Arg(32);

static void BM_RhoExact(benchmark::State& state) {
  const std::size_t s = static_cast<std::size_t>(state.range(0));
  const DenseMatrix A = gen_gaussian_matrix(12, 16, 6);
  for (auto _ : state) {
    RhoPair rho = rho_exact(A, s);
    benchmark::DoNotOptimize(rho);
  }
}
BENCHMARK(BM_RhoExact)->Arg(1)->Arg(2)->Arg(3)->Arg(4);

BENCHMARK_MAIN();
