#include "oulab/estimate_lab.hpp"
#include "oulab/ou_evolution.hpp"
#include "oulab/parabolic_covering.hpp"
#include "oulab/test_functions.hpp"
#include "oulab/verification/acceptance.hpp"

#include <benchmark/benchmark.h>

using namespace oulab;

static void BM_FundamentalSolution(benchmark::State& state) {
  const auto field = fixtures::noncommuting();
  for (auto _ : state) {
    const FundamentalSolution fs(field);
    benchmark::DoNotOptimize(fs.U(5.0, 0.0));
  }
}
BENCHMARK(BM_FundamentalSolution)->Unit(benchmark::kMillisecond);

static void BM_CovarianceFamily(benchmark::State& state) {
  const auto f = fixtures::by_name(state.range(0) == 1 ? "benchmark" : "noncommuting");
  for (auto _ : state) {
    const auto c = verification::make_context(f);
    benchmark::DoNotOptimize(c.family->Qs(3.3));
  }
}
BENCHMARK(BM_CovarianceFamily)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_ApplyG(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FundamentalSolution fs(n == 1 ? fixtures::benchmark() : fixtures::noncommuting());
  const auto phi = make_gaussian_bump(0.7, Vector::Zero(n));
  const Vector x = Vector::Constant(n, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(apply_G(fs, 0.0, 1.0, phi->slice(0), x));
}
BENCHMARK(BM_ApplyG)->Arg(1)->Arg(2);

static void BM_FdSolve(benchmark::State& state) {
  const FundamentalSolution fs(fixtures::benchmark());
  const auto phi = make_gaussian_bump(0.7, Vector::Zero(1));
  FdOptions opt;
  opt.h = 0.1 / static_cast<double>(state.range(0));
  opt.tau = 0.01 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fd_solve(fs, 0.0, 1.0, *phi, Box::cube(1, -8, 8), opt));
}
BENCHMARK(BM_FdSolve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_Dissipativity(benchmark::State& state) {
  const Corpus corpus = bump_corpus(1, 5, 1);
  const auto gc = GeneralCoefficients::heat(1, 0.0);
  const EstimateOptions opt = default_estimate_options(1);
  for (auto _ : state) benchmark::DoNotOptimize(verify_dissipativity(corpus, gc, 2.0, opt).worst);
}
BENCHMARK(BM_Dissipativity)->Unit(benchmark::kMillisecond);

static void BM_GreedyCover(benchmark::State& state) {
  const auto rho = RadiusFunction::from_expression("1/(1+0.2*max(sqrt(abs(s)),abs(x)))", 1, 0.2, 1.0);
  const CoverRegion region{{0, 10}, Box::cube(1, 0, 10)};
  for (auto _ : state) {
    const Covering cov = greedy_cover(rho, region, 1.0);
    benchmark::DoNotOptimize(partition_disjoint(cov, 1.0).balls.size());
  }
}
BENCHMARK(BM_GreedyCover)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
