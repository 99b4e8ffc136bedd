// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fgq::fixedpoint {

/// Dynamic fixed point: integer mantissas sharing one power-of-two scale.
/// value(i) = mantissas[i] * 2^-frac_bits. Mantissas are always in
/// [-2^(bits-1), 2^(bits-1) - 1].
struct DfpTensor {
  int bits = 8;
  int frac_bits = 0;
  std::vector<std::int32_t> mantissas;

  double value(std::size_t i) const;
  std::size_t size() const { return mantissas.size(); }
  std::int32_t min_mantissa() const { return -(1 << (bits - 1)); }
  std::int32_t max_mantissa() const { return (1 << (bits - 1)) - 1; }

  friend bool operator==(const DfpTensor&, const DfpTensor&) = default;
};

/// Largest fractional precision for which max|values| stays in range:
/// (bits - 1) - E with E the smallest integer such that max|v| < 2^E.
/// All-zero input yields bits - 1. The result is clamped to the signed
/// byte range used on disk.
int choose_frac_bits(std::span<const double> values, int bits);

/// Round half to even, then saturate. NaN/Inf raise DataError; bits other
/// than 4 or 8 raise DomainError.
DfpTensor dfp_quantize(std::span<const double> values, int bits, int frac_bits);

/// dfp_quantize with the exponent picked by choose_frac_bits.
DfpTensor dfp_quantize(std::span<const double> values, int bits);

std::vector<double> dfp_dequantize(const DfpTensor& tensor);

/// Half a unit in the last place: the worst-case rounding error for
/// in-range values.
double half_ulp(int frac_bits);

void validate(const DfpTensor& tensor);

}  // namespace fgq::fixedpoint
