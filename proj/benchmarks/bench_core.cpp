#include <benchmark/benchmark.h>

#include <random>

#include "ncapprox/decoder.hpp"
#include "ncapprox/experiment.hpp"
#include "ncapprox/gf.hpp"
#include "ncapprox/matrix.hpp"
#include "ncapprox/rlnc.hpp"

using namespace ncapprox;

namespace {

void BM_GfMul(benchmark::State& state) {
  const FieldSpec f(static_cast<unsigned>(state.range(0)));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Symbol> d(0, static_cast<Symbol>(f.order() - 1));
  std::vector<Symbol> a(4096), b(4096);
  for (auto& v : a) v = d(rng);
  for (auto& v : b) v = d(rng);
  for (auto _ : state) {
    Symbol acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc ^= f.mul(a[i], b[i]);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 4096);
}
BENCHMARK(BM_GfMul)->Arg(4)->Arg(8)->Arg(12)->Arg(16);

void BM_Solve(benchmark::State& state) {
  const FieldSpec f(8);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  GFMatrix m = GFMatrix::random(f, n, n, rng);
  while (rank(m) < n) m = GFMatrix::random(f, n, n, rng);
  const GFMatrix rhs = GFMatrix::random(f, n, 64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve(m, rhs));
}
BENCHMARK(BM_Solve)->Arg(4)->Arg(16)->Arg(64);

void BM_DecodeApproximate(benchmark::State& state) {
  const FieldSpec f(8);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const GFMatrix x = GFMatrix::random(f, n, 256, rng);
  const DecoderState received = receive_innovative(x, n * 2 / 3, rng);
  std::vector<double> gaps(n - 1, 1.0);
  const SimilarityModel model = SimilarityModel::chain(n, gaps);
  for (auto _ : state) benchmark::DoNotOptimize(decode(received, model));
}
BENCHMARK(BM_DecodeApproximate)->Arg(6)->Arg(12)->Arg(24);

void BM_MleDecode(benchmark::State& state) {
  const FieldSpec f(static_cast<unsigned>(state.range(0)));
  std::mt19937_64 rng(4);
  const GFMatrix x = GFMatrix::random(f, 4, 64, rng);
  const DecoderState received = receive_innovative(x, 2, rng);
  const SimilarityModel model = SimilarityModel::chain(4, std::vector<double>{1.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(mle_decode(received, model, std::uint64_t{1} << 30));
}
BENCHMARK(BM_MleDecode)->Arg(2)->Arg(3)->Arg(4)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
