// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace fgq::fixedpoint {
namespace {

using testing::Rng;

std::int32_t quantize_one(double v, int bits, int f) {
  const std::vector<double> x{v};
  return dfp_quantize(x, bits, f).mantissas[0];
}

TEST(ChooseFracBits, Examples) {
  EXPECT_EQ(choose_frac_bits(std::vector<double>{0.9, -0.1}, 8), 7);
  EXPECT_EQ(choose_frac_bits(std::vector<double>{3.0}, 8), 5);
  EXPECT_EQ(choose_frac_bits(std::vector<double>{0.0, 0.0}, 4), 3);
  EXPECT_THROW(choose_frac_bits(std::vector<double>{}, 8), EmptyInputError);
}

TEST(ChooseFracBits, StrictUpperBound) {
  // max == 2^E exactly needs E+1.
  EXPECT_EQ(choose_frac_bits(std::vector<double>{1.0}, 8), 6);
  EXPECT_EQ(choose_frac_bits(std::vector<double>{-4.0}, 8), 4);
  EXPECT_EQ(choose_frac_bits(std::vector<double>{0.25}, 4), 4);
  EXPECT_EQ(choose_frac_bits(std::vector<double>{0.2499}, 4), 5);
}

TEST(ChooseFracBits, MatchesBruteForceSearch) {
  Rng rng(2);
  std::uniform_real_distribution<double> ex(-20, 20);
  for (int t = 0; t < 500; ++t) {
    const double m = std::pow(2.0, ex(rng));
    int e = -200;
    while (!(m < std::ldexp(1.0, e))) ++e;
    EXPECT_EQ(choose_frac_bits(std::vector<double>{m}, 8), 7 - e);
  }
}

TEST(DfpQuantize, Examples) {
  EXPECT_EQ(quantize_one(0.9, 8, 7), 115);
  EXPECT_EQ(dfp_dequantize(dfp_quantize(std::vector<double>{0.9}, 8, 7))[0], 0.8984375);
  EXPECT_EQ(quantize_one(0.0, 4, 2), 0);
  EXPECT_EQ(quantize_one(2.0, 8, 7), 127);
  EXPECT_EQ(quantize_one(-2.0, 8, 7), -128);
  EXPECT_EQ(quantize_one(-2.0, 4, 3), -8);
}

TEST(DfpQuantize, RoundHalfEven) {
  EXPECT_EQ(quantize_one(2.5, 8, 0), 2);
  EXPECT_EQ(quantize_one(3.5, 8, 0), 4);
  EXPECT_EQ(quantize_one(-2.5, 8, 0), -2);
  EXPECT_EQ(quantize_one(0.5, 8, 0), 0);
  EXPECT_EQ(quantize_one(1.5 / 128, 8, 7), 2);
  EXPECT_EQ(quantize_one(2.5 / 128, 8, 7), 2);
}

TEST(DfpQuantize, RejectsBadInput) {
  EXPECT_THROW(quantize_one(std::nan(""), 8, 7), DataError);
  EXPECT_THROW(quantize_one(INFINITY, 8, 7), DataError);
  EXPECT_THROW(quantize_one(1.0, 6, 2), DomainError);
}

TEST(DfpDequantize, Examples) {
  DfpTensor t{8, 7, {115, -128}};
  const auto v = dfp_dequantize(t);
  EXPECT_EQ(v[0], 0.8984375);
  EXPECT_EQ(v[1], -1.0);
}

TEST(DfpProperties, ErrorBoundMonotonicityIdempotence) {
  Rng rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const int bits = t % 2 ? 8 : 4;
    std::vector<double> x(16);
    for (auto& v : x) v = u(rng) * std::pow(2.0, t % 7 - 3);
    const auto q = dfp_quantize(x, bits);
    EXPECT_NO_THROW(validate(q));
    const auto d = dfp_dequantize(q);
    const double max_repr = std::ldexp(1.0, bits - 1 - q.frac_bits);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LE(std::abs(d[i]), max_repr);  // -2^(bits-1) mantissa reaches it
      // In range means not clipped at the positive end.
      if (x[i] < (q.max_mantissa() + 0.5) * std::ldexp(1.0, -q.frac_bits)) {
        EXPECT_LE(std::abs(x[i] - d[i]), half_ulp(q.frac_bits));
      }
    }
    EXPECT_EQ(dfp_quantize(d, bits, q.frac_bits), q);  // idempotent

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const auto qs = dfp_quantize(sorted, bits, q.frac_bits);
    EXPECT_TRUE(std::is_sorted(qs.mantissas.begin(), qs.mantissas.end()));
  }
}

TEST(DfpProperties, MaxElementError) {
  // The element that sets the exponent is within half an ULP, except in the
  // top half-ULP band just below 2^E where the positive side clips to the
  // largest mantissa (still under one ULP).
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  int clipped = 0;
  for (int t = 0; t < 1000; ++t) {
    const double m = t == 0 ? 127.75 / 128 : u(rng);
    const auto q = dfp_quantize(std::vector<double>{m, -m}, 8);
    const double ulp = 2.0 * half_ulp(q.frac_bits);
    EXPECT_LE(std::abs(-m - q.value(1)), half_ulp(q.frac_bits));
    if (m / ulp > q.max_mantissa() + 0.5) {
      ++clipped;
      EXPECT_EQ(q.mantissas[0], q.max_mantissa());
      EXPECT_LT(std::abs(m - q.value(0)), ulp);
    } else {
      EXPECT_LE(std::abs(m - q.value(0)), half_ulp(q.frac_bits));
    }
  }
  EXPECT_GE(clipped, 1);
}

}  // namespace
}  // namespace fgq::fixedpoint
