// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/fixedpoint.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <string>

#include "fgq/error.hpp"

namespace fgq::fixedpoint {

namespace {

constexpr int kMinFracBits = -128;
constexpr int kMaxFracBits = 127;

void check_bits(int bits) {
  if (bits != 4 && bits != 8) {
    throw DomainError("dfp: bits must be 4 or 8, got " + std::to_string(bits));
  }
}

}  // namespace

double DfpTensor::value(std::size_t i) const {
  return std::ldexp(static_cast<double>(mantissas[i]), -frac_bits);
}

double half_ulp(int frac_bits) { return std::ldexp(1.0, -frac_bits - 1); }

int choose_frac_bits(std::span<const double> values, int bits) {
  check_bits(bits);
  if (values.empty()) throw EmptyInputError("choose_frac_bits: empty input");
  double max_abs = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("choose_frac_bits: non-finite value");
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0) return bits - 1;
  // frexp: max_abs = m * 2^e with m in [0.5, 1), so e is the smallest E
  // with max_abs < 2^E.
  int e = 0;
  std::frexp(max_abs, &e);
  return std::clamp((bits - 1) - e, kMinFracBits, kMaxFracBits);
}

DfpTensor dfp_quantize(std::span<const double> values, int bits,
                       int frac_bits) {
  check_bits(bits);
  DfpTensor out;
  out.bits = bits;
  out.frac_bits = frac_bits;
  out.mantissas.resize(values.size());
  const double lo = out.min_mantissa();
  const double hi = out.max_mantissa();
  // nearbyint honours the current rounding mode; pin it to nearest-even.
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (std::isnan(v)) {
      std::fesetround(saved);
      throw DataError("dfp_quantize: NaN at index " + std::to_string(i));
    }
    if (std::isinf(v)) {
      std::fesetround(saved);
      throw DataError("dfp_quantize: infinite value at index " +
                      std::to_string(i));
    }
    const double scaled = std::nearbyint(std::ldexp(v, frac_bits));
    out.mantissas[i] = static_cast<std::int32_t>(std::clamp(scaled, lo, hi));
  }
  std::fesetround(saved);
  return out;
}

DfpTensor dfp_quantize(std::span<const double> values, int bits) {
  return dfp_quantize(values, bits, choose_frac_bits(values, bits));
}

std::vector<double> dfp_dequantize(const DfpTensor& tensor) {
  std::vector<double> out(tensor.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = tensor.value(i);
  return out;
}

void validate(const DfpTensor& tensor) {
  check_bits(tensor.bits);
  for (auto m : tensor.mantissas) {
    if (m < tensor.min_mantissa() || m > tensor.max_mantissa()) {
      throw FormatError("dfp: mantissa " + std::to_string(m) +
                        " outside the " + std::to_string(tensor.bits) +
                        "-bit range");
    }
  }
}

}  // namespace fgq::fixedpoint
