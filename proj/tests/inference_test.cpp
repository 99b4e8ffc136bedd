// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace fgq::inference {
namespace {

using grouping::FgqLayer;
using testing::Rng;

Activation make(std::uint32_t c, std::uint32_t h, std::uint32_t w, std::vector<double> v) {
  Activation a;
  a.channels = c;
  a.height = h;
  a.width = w;
  a.values = std::move(v);
  return a;
}

FgqLayer ternarize(const WeightTensor& w, std::uint32_t n, int act_bits = 8) {
  grouping::TernarizeOptions o;
  o.activation_bits = act_bits;
  return grouping::fgq_ternarize(w, grouping::partition_static(w.dims(), n), o).layer;
}

TEST(ConvReference, Examples) {
  const WeightTensor w({1, 1, 1, 1}, {2.0});
  const auto y = conv_reference(w, make(1, 1, 1, {3.0}), {});
  EXPECT_EQ(y.values, std::vector<double>{6.0});

  std::vector<double> k(9, 0.0);
  k[4] = 1.0;
  Rng rng(1);
  const auto x = testing::random_activation(rng, 1, 5, 6);
  const auto id = conv_reference(WeightTensor({1, 1, 3, 3}, k), x, {1, 1});
  EXPECT_EQ(id.values, x.values);
}

TEST(ConvReference, ShapeErrors) {
  const WeightTensor w({1, 2, 3, 3}, std::vector<double>(18, 1.0));
  EXPECT_THROW(conv_reference(w, make(1, 4, 4, std::vector<double>(16)), {}), ShapeError);
  EXPECT_THROW(conv_reference(w, make(2, 2, 2, std::vector<double>(8)), {}), ShapeError);
  EXPECT_EQ(output_extent(5, 3, {2, 1}), 3u);
}

TEST(ConvReference, AgreesWithScatterImplementation) {
  Rng rng(2);
  std::uniform_int_distribution<std::uint32_t> small(1, 4);
  for (int t = 0; t < 60; ++t) {
    const Dims4 d{small(rng), small(rng), small(rng), small(rng)};
    const std::uint32_t stride = small(rng) % 3 + 1, pad = small(rng) % 3;
    const std::uint32_t h = d.r + small(rng) + 2, wd = d.s + small(rng) + 2;
    const auto w = testing::random_tensor(rng, d);
    const auto x = testing::random_activation(rng, d.c, h, wd);
    const auto a = conv_reference(w, x, {stride, pad});
    const auto b = testing::conv_scatter(w, x, stride, pad);
    ASSERT_EQ(a.values.size(), b.values.size());
    EXPECT_EQ(a.height, b.height);
    EXPECT_EQ(a.width, b.width);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      EXPECT_NEAR(a.values[i], b.values[i], 1e-10);
    }
  }
}

TEST(ConvFgq, IntegerCaseEqualsReference) {
  Rng rng(3);
  std::uniform_int_distribution<int> sign(-1, 1);
  std::uniform_int_distribution<int> level(-20, 20);
  std::vector<double> wv(2 * 4 * 3 * 3);
  for (auto& v : wv) v = sign(rng);
  const WeightTensor w({2, 4, 3, 3}, wv);
  // N=1 puts every nonzero weight in its own group with alpha exactly 1.
  const auto layer = ternarize(w, 1);
  std::vector<double> xv(4 * 6 * 6);
  for (auto& v : xv) v = level(rng);
  const auto x = make(4, 6, 6, xv);
  const auto xq = quantize_activations(x, 8);
  ASSERT_EQ(dequantize(xq).values, x.values);
  const auto got = conv_fgq(layer, xq, {1, 1});
  const auto want = conv_reference(w, x, {1, 1});
  EXPECT_EQ(got.output.values, want.values);
}

TEST(ConvFgq, EqualsReferenceOnDequantizedOperands) {
  Rng rng(4);
  std::uniform_int_distribution<std::uint32_t> k(1, 8), c(1, 16), rs(1, 3), n(1, 8);
  std::uniform_int_distribution<std::uint32_t> hw(3, 12);
  for (int t = 0; t < 40; ++t) {
    const Dims4 d{k(rng), c(rng), rs(rng), rs(rng)};
    const auto w = testing::random_tensor(rng, d, 0.1);
    const int bits = t % 2 ? 8 : 4;
    const auto layer = t % 7 == 0 ? grouping::quantize_full_precision_layer(w, bits)
                                  : ternarize(w, n(rng), bits);
    const auto x = testing::random_activation(rng, d.c, hw(rng) + d.r, hw(rng) + d.s, 3.0);
    const auto xq = quantize_activations(x, bits);
    const ConvSpec spec{t % 3 + 1u, t % 2u};
    const auto got = conv_fgq(layer, xq, spec);
    const auto want = conv_reference(grouping::dequantize(layer), dequantize(xq), spec);
    ASSERT_EQ(got.output.values, want.values) << "trial " << t;
    // trace reproduces the output exactly
    for (std::size_t i = 0; i < got.accumulators.size(); ++i) {
      ASSERT_EQ(std::ldexp(static_cast<double>(got.accumulators[i]), -got.output_frac_bits),
                got.output.values[i]);
    }
  }
}

TEST(ConvFgq, PrecisionMismatch) {
  const WeightTensor w({1, 2, 1, 1}, {1.0, -1.0});
  const auto layer = ternarize(w, 2, 8);
  const auto xq = quantize_activations(make(2, 1, 1, {1.0, 2.0}), 4);
  EXPECT_THROW(conv_fgq(layer, xq, {}), PrecisionError);
}

TEST(ConvFgq, GroupedBeatsLayerwise) {
  Rng rng(5);
  int wins = 0;
  for (int t = 0; t < 20; ++t) {
    const auto w = testing::random_tensor(rng, {4, 16, 3, 3});
    const auto x = testing::random_activation(rng, 16, 8, 8);
    const auto xq = quantize_activations(x, 8);
    const auto ref = conv_reference(w, x, {1, 1});
    const auto fine = conv_fgq(ternarize(w, 4), xq, {1, 1});
    const auto coarse = conv_fgq(ternarize(w, 16), xq, {1, 1});
    const double ef = error_metrics(ref.values, fine.output.values).rel_frobenius;
    const double ec = error_metrics(ref.values, coarse.output.values).rel_frobenius;
    wins += ef <= ec;
  }
  EXPECT_EQ(wins, 20);
}

TEST(ConvFgq, LinearInActivationsOnFixedGrid) {
  Rng rng(6);
  const auto w = testing::random_tensor(rng, {3, 4, 3, 3});
  const auto layer = ternarize(w, 2);
  std::uniform_int_distribution<int> m(-60, 60);
  for (int t = 0; t < 10; ++t) {
    QuantizedActivation a{4, 5, 5, {8, 5, {}}}, b = a, sum = a;
    for (int i = 0; i < 100; ++i) {
      a.data.mantissas.push_back(m(rng));
      b.data.mantissas.push_back(m(rng));
      sum.data.mantissas.push_back(a.data.mantissas.back() + b.data.mantissas.back());
    }
    const auto ya = conv_fgq(layer, a, {});
    const auto yb = conv_fgq(layer, b, {});
    const auto ys = conv_fgq(layer, sum, {});
    for (std::size_t i = 0; i < ys.accumulators.size(); ++i) {
      EXPECT_EQ(ys.accumulators[i], ya.accumulators[i] + yb.accumulators[i]);
    }
  }
}

TEST(TernaryAccumulate, DetectsOverflow) {
  // 2^20 elements of +1 * 127 fit easily in 32 bits.
  const std::size_t big = std::size_t{1} << 20;
  std::vector<std::int8_t> s(big, 1);
  std::vector<std::int32_t> m(big, 127);
  EXPECT_EQ(ternary_accumulate(s, m), 127 * static_cast<std::int64_t>(big));
  // 2^24 elements of -1 * -128 reach 2^31 and must trip.
  const std::size_t huge = std::size_t{1} << 24;
  std::vector<std::int8_t> neg(huge, -1);
  std::vector<std::int32_t> low(huge, -128);
  EXPECT_THROW(ternary_accumulate(neg, low), OverflowError);
  // Large 32-bit mantissas make a short group overflow.
  const std::vector<std::int8_t> two{1, 1};
  const std::vector<std::int32_t> wide{INT32_MAX, 1};
  EXPECT_THROW(ternary_accumulate(two, wide), OverflowError);
  const std::vector<std::int8_t> neg_two{-1, -1};
  const std::vector<std::int32_t> wide_neg{INT32_MAX, 2};
  EXPECT_THROW(ternary_accumulate(neg_two, wide_neg), OverflowError);
}

TEST(ConvFgq, OverflowReportsPosition) {
  const WeightTensor w({1, 2, 1, 1}, {1.0, 1.0});
  const auto layer = ternarize(w, 2);
  QuantizedActivation x{2, 1, 1, {8, 0, {INT32_MAX, 5}}};
  try {
    conv_fgq(layer, x, {});
    FAIL() << "expected overflow";
  } catch (const OverflowError& e) {
    EXPECT_NE(std::string(e.what()).find("k=0"), std::string::npos) << e.what();
  }
}

TEST(QuantizeActivations, Examples) {
  const auto z = quantize_activations(make(1, 2, 2, {0, 0, 0, 0}), 8);
  for (auto m : z.data.mantissas) EXPECT_EQ(m, 0);
  Rng rng(7);
  const auto x = testing::random_activation(rng, 2, 4, 4);
  const auto q = quantize_activations(x, 8);
  const auto it = std::max_element(x.values.begin(), x.values.end(),
                                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  const auto i = static_cast<std::size_t>(it - x.values.begin());
  EXPECT_LE(std::abs(*it - q.data.value(i)), 2 * fixedpoint::half_ulp(q.data.frac_bits));
  EXPECT_THROW(quantize_activations(x, 6), DomainError);
}

TEST(QuantizeActivations, EightBitBeatsFourBit) {
  Rng rng(8);
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    const auto x = testing::random_activation(rng, 3, 6, 6);
    const double s8 = error_metrics(x.values, dequantize(quantize_activations(x, 8)).values).sqnr_db;
    const double s4 = error_metrics(x.values, dequantize(quantize_activations(x, 4)).values).sqnr_db;
    ok += s8 >= s4;
  }
  EXPECT_EQ(ok, 100);
}

TEST(ConvFgq, EightBitActivationsUsuallyBeatFourBit) {
  Rng rng(9);
  int ok = 0;
  for (int t = 0; t < 100; ++t) {
    const auto w = testing::random_tensor(rng, {2, 4, 3, 3});
    const auto x = testing::random_activation(rng, 4, 6, 6);
    auto l8 = ternarize(w, 4, 8);
    auto l4 = ternarize(w, 4, 4);
    // Same ternary weights in both, so only activation precision differs.
    const auto ref = conv_reference(dequantize(l8), x, {});
    const double e8 =
        error_metrics(ref.values, conv_fgq(l8, quantize_activations(x, 8), {}).output.values)
            .rel_frobenius;
    const double e4 =
        error_metrics(ref.values, conv_fgq(l4, quantize_activations(x, 4), {}).output.values)
            .rel_frobenius;
    ok += e4 >= e8;
  }
  EXPECT_GE(ok, 95);
}

TEST(ErrorMetrics, Examples) {
  const std::vector<double> a{1.0, 2.0};
  const auto same = error_metrics(a, a);
  EXPECT_EQ(same.max_abs, 0.0);
  EXPECT_EQ(same.rel_frobenius, 0.0);
  EXPECT_TRUE(std::isinf(same.sqnr_db) && same.sqnr_db > 0);

  const auto m = error_metrics(std::vector<double>{1, 0}, std::vector<double>{0, 0});
  EXPECT_EQ(m.rel_frobenius, 1.0);
  EXPECT_EQ(m.sqnr_db, 0.0);
  EXPECT_EQ(m.max_abs, 1.0);

  EXPECT_THROW(error_metrics(a, std::vector<double>{1.0}), ShapeError);
}

TEST(ErrorMetrics, PythagoreanErrors) {
  // Errors in orthogonal coordinates add in squared norm.
  const std::vector<double> ref{3, 4, 0, 0};
  const std::vector<double> e1{3.3, 4, 0, 0}, e2{3, 4, 0.4, 0}, both{3.3, 4, 0.4, 0};
  const double r1 = error_metrics(ref, e1).rel_frobenius;
  const double r2 = error_metrics(ref, e2).rel_frobenius;
  const double rb = error_metrics(ref, both).rel_frobenius;
  EXPECT_NEAR(rb * rb, r1 * r1 + r2 * r2, 1e-15);
  EXPECT_NEAR(error_metrics(ref, both).sqnr_db, -20 * std::log10(rb), 1e-12);
  EXPECT_NEAR(rb, 0.1, 1e-15);
}

TEST(ActivationNpy, AcceptsThreeAndFourDims) {
  const NpyArray three{{2, 1, 2}, NpyDtype::kFloat32, {1, 2, 3, 4}};
  const auto a = activation_from_npy(three);
  EXPECT_EQ(a.channels, 2u);
  const NpyArray four{{1, 2, 1, 2}, NpyDtype::kFloat32, {1, 2, 3, 4}};
  EXPECT_EQ(activation_from_npy(four).values, a.values);
  const NpyArray batch{{2, 1, 1, 2}, NpyDtype::kFloat32, {1, 2, 3, 4}};
  EXPECT_THROW(activation_from_npy(batch), UnsupportedLayoutError);
  const auto back = activation_to_npy(a, NpyDtype::kFloat64);
  EXPECT_EQ(back.shape, (std::vector<std::size_t>{2, 1, 2}));
}

}  // namespace
}  // namespace fgq::inference
