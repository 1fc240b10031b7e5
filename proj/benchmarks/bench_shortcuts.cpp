#include <benchmark/benchmark.h>

#include <random>

#include "eclosure/collections.hpp"
#include "eclosure/engine.hpp"
#include "eclosure/shortcuts.hpp"

using namespace eclosure;

namespace {

std::vector<double> evalues(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(0.1);
  std::vector<double> e(m);
  for (auto& x : e) x = ex(rng);
  return e;
}

std::vector<double> pvalues(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(m);
  for (int i = 0; i < m; ++i) p[i] = i % 2 ? u(rng) : 0.01 * u(rng);
  return p;
}

void BM_EbhbarMemberFast(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto e = evalues(m, 1);
  const Subset r = Subset::prefix(order_by_evalue_desc(e), m / 2);
  for (auto _ : state) benchmark::DoNotOptimize(ebhbar_member_fast(e, 0.1, r));
}
BENCHMARK(BM_EbhbarMemberFast)->Arg(8)->Arg(12)->Arg(16)->Arg(64);

void BM_EbhbarMemberBruteForce(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto e = evalues(m, 1);
  const auto coll = mean_collection(ValueVector(ValueKind::evalue, e));
  const Subset r = Subset::prefix(order_by_evalue_desc(e), m / 2);
  for (auto _ : state) benchmark::DoNotOptimize(member(coll, Loss::fdp(), 0.1, r));
}
BENCHMARK(BM_EbhbarMemberBruteForce)->Arg(8)->Arg(12)->Arg(16);

void BM_EbhbarLargestFast(benchmark::State& state) {
  const auto e = evalues(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(ebhbar_largest_fast(e, 0.1));
}
BENCHMARK(BM_EbhbarLargestFast)->Arg(16)->Arg(32)->Arg(64);

void BM_MonotoneLargestBY(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto p = pvalues(m, 3);
  const auto coll = by_collection(ValueVector(ValueKind::pvalue, p), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(monotone_largest(coll, p, 0.1));
}
BENCHMARK(BM_MonotoneLargestBY)->Arg(16)->Arg(32)->Arg(64);

void BM_MonotoneLargestSu(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto p = pvalues(m, 4);
  const auto coll = su_collection(ValueVector(ValueKind::pvalue, p), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(monotone_largest(coll, p, 0.1));
}
BENCHMARK(BM_MonotoneLargestSu)->Arg(16)->Arg(32)->Arg(64);

void BM_GreedyBoundary(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(greedy_boundary_ebh(k, m, 0.05));
}
BENCHMARK(BM_GreedyBoundary)->Args({7, 20})->Args({20, 20})->Args({32, 64});

}  // namespace

BENCHMARK_MAIN();
