// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgq/fixedpoint.hpp"
#include "fgq/grouping.hpp"
#include "fgq/tensor_io.hpp"

namespace fgq::inference {

/// Real-valued (channels, height, width) feature map.
struct Activation {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<double> values;

  std::size_t offset(std::uint32_t c, std::uint32_t y, std::uint32_t x) const {
    return (std::size_t{c} * height + y) * width + x;
  }
  /// Throws ShapeError if values.size() disagrees with the dims.
  void validate() const;
};

/// Feature map quantized to dynamic fixed point with one shared exponent.
struct QuantizedActivation {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  fixedpoint::DfpTensor data;

  std::size_t offset(std::uint32_t c, std::uint32_t y, std::uint32_t x) const {
    return (std::size_t{c} * height + y) * width + x;
  }
};

struct ConvSpec {
  std::uint32_t stride = 1;
  std::uint32_t padding = 0;
};

/// floor((in + 2*pad - kernel) / stride) + 1; throws ShapeError if < 1.
std::uint32_t output_extent(std::uint32_t in, std::uint32_t kernel,
                            const ConvSpec& spec);

/// Direct full-precision convolution with zero padding.
Activation conv_reference(const WeightTensor& w, const Activation& x,
                          const ConvSpec& spec);

struct FgqConvResult {
  Activation output;
  /// Integer accumulator per output element, (K, H_out, W_out) order;
  /// output value = accumulator * 2^-output_frac_bits exactly.
  std::vector<std::int64_t> accumulators;
  int output_frac_bits = 0;
};

/// Adds sign[i] * mantissa[i] in a 32-bit accumulator; no multiplies.
/// Throws OverflowError instead of wrapping.
std::int32_t ternary_accumulate(std::span<const std::int8_t> signs,
                                std::span<const std::int32_t> mantissas);

/// Bit-exact emulation of the low-precision convolution.
///
/// Ternary layers: for every output position, filter and group, the group's
/// activations are added or subtracted into a 32-bit accumulator; the group
/// sum is then multiplied once by the group's scale mantissa and added to a
/// 64-bit accumulator. 8-bit weight layers multiply-accumulate mantissas in
/// 32 bits. The result is rescaled by 2^-(activation frac bits + weight or
/// scale frac bits).
///
/// Throws PrecisionError when x's bit width differs from the layer's
/// activation bits, ShapeError on channel mismatch and OverflowError (with
/// the failing position) when a 32-bit accumulator would overflow.
FgqConvResult conv_fgq(const grouping::FgqLayer& layer,
                       const QuantizedActivation& x, const ConvSpec& spec);

/// Per-tensor DFP quantization with an exponent chosen from the data.
QuantizedActivation quantize_activations(const Activation& x, int bits);

Activation dequantize(const QuantizedActivation& x);

/// Interprets a 3-D (C, H, W) or 4-D (1, C, H, W) NPY array.
Activation activation_from_npy(const NpyArray& array);
NpyArray activation_to_npy(const Activation& x, NpyDtype dtype);

struct ErrorMetrics {
  double max_abs = 0.0;
  double rel_frobenius = 0.0;
  double sqnr_db = 0.0;  // +inf when test == reference
};

/// rel_frobenius = ||ref - test|| / ||ref|| (0 when both are zero, +inf when
/// only ref is zero); sqnr_db = 20 log10(||ref|| / ||ref - test||).
ErrorMetrics error_metrics(std::span<const double> reference,
                           std::span<const double> test);

}  // namespace fgq::inference
