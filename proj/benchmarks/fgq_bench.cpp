// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "fgq/fgq.hpp"

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_SymmetricBrute(benchmark::State& state) {
  const auto w = gaussian(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fgq::ternary::solve_symmetric_brute(w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SymmetricBrute)->Arg(36)->Arg(1 << 12)->Arg(1 << 17);

void BM_AsymmetricBrute(benchmark::State& state) {
  const auto w = gaussian(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fgq::ternary::solve_asymmetric_brute(w));
}
BENCHMARK(BM_AsymmetricBrute)->Arg(36)->Arg(1 << 10);

void BM_FgqTernarize(benchmark::State& state) {
  const fgq::Dims4 d{64, 64, 3, 3};
  const fgq::WeightTensor w(d, gaussian(d.count()));
  const auto part = fgq::grouping::partition_static(d, static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fgq::grouping::fgq_ternarize(w, part, {}));
}
BENCHMARK(BM_FgqTernarize)->Arg(4)->Arg(16)->Arg(64);

void BM_ConvFgq(benchmark::State& state) {
  const fgq::Dims4 d{32, 32, 3, 3};
  const fgq::WeightTensor w(d, gaussian(d.count()));
  fgq::grouping::TernarizeOptions opt;
  const auto layer =
      fgq::grouping::fgq_ternarize(w, fgq::grouping::partition_static(d, 4), opt).layer;
  fgq::inference::Activation x{32, 28, 28, gaussian(32 * 28 * 28, 11)};
  const auto xq = fgq::inference::quantize_activations(x, opt.activation_bits);
  for (auto _ : state) benchmark::DoNotOptimize(fgq::inference::conv_fgq(layer, xq, {1, 1}));
}
BENCHMARK(BM_ConvFgq)->Unit(benchmark::kMillisecond);

void BM_ConvReference(benchmark::State& state) {
  const fgq::Dims4 d{32, 32, 3, 3};
  const fgq::WeightTensor w(d, gaussian(d.count()));
  fgq::inference::Activation x{32, 28, 28, gaussian(32 * 28 * 28, 11)};
  for (auto _ : state) benchmark::DoNotOptimize(fgq::inference::conv_reference(w, x, {1, 1}));
}
BENCHMARK(BM_ConvReference)->Unit(benchmark::kMillisecond);

void BM_PackUnpack(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> s(-1, 1);
  std::vector<std::int8_t> signs(static_cast<std::size_t>(state.range(0)));
  for (auto& x : signs) x = static_cast<std::int8_t>(s(rng));
  for (auto _ : state) {
    auto p = fgq::pack_ternary(signs);
    benchmark::DoNotOptimize(fgq::unpack_ternary(p));
  }
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PackUnpack)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
