// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fgq/error.hpp"

namespace fgq::inference {

namespace {

std::string position(std::uint32_t k, std::uint32_t y, std::uint32_t x) {
  return "(k=" + std::to_string(k) + ", y=" + std::to_string(y) +
         ", x=" + std::to_string(x) + ")";
}

// Input coordinate for kernel tap `tap` of output `out`, or -1 in padding.
std::int64_t input_coord(std::uint32_t out, std::uint32_t tap,
                         const ConvSpec& spec, std::uint32_t extent) {
  const std::int64_t v = std::int64_t{out} * spec.stride + tap -
                         static_cast<std::int64_t>(spec.padding);
  return (v < 0 || v >= extent) ? -1 : v;
}

}  // namespace

void Activation::validate() const {
  if (values.size() != std::size_t{channels} * height * width) {
    throw ShapeError("activation: value count does not match dims");
  }
}

std::uint32_t output_extent(std::uint32_t in, std::uint32_t kernel,
                            const ConvSpec& spec) {
  if (spec.stride < 1) throw DomainError("conv: stride must be at least 1");
  const std::int64_t span = std::int64_t{in} + 2 * std::int64_t{spec.padding} -
                            std::int64_t{kernel};
  if (span < 0) {
    throw ShapeError("conv: kernel " + std::to_string(kernel) +
                     " larger than padded input " + std::to_string(in));
  }
  return static_cast<std::uint32_t>(span / spec.stride + 1);
}

Activation conv_reference(const WeightTensor& w, const Activation& x,
                          const ConvSpec& spec) {
  x.validate();
  const auto& d = w.dims();
  if (d.c != x.channels) {
    throw ShapeError("conv_reference: weight channels " + std::to_string(d.c) +
                     " != input channels " + std::to_string(x.channels));
  }
  Activation out;
  out.channels = d.k;
  out.height = output_extent(x.height, d.r, spec);
  out.width = output_extent(x.width, d.s, spec);
  out.values.assign(std::size_t{out.channels} * out.height * out.width, 0.0);
  for (std::uint32_t k = 0; k < d.k; ++k)
    for (std::uint32_t oy = 0; oy < out.height; ++oy)
      for (std::uint32_t ox = 0; ox < out.width; ++ox) {
        double acc = 0.0;
        for (std::uint32_t c = 0; c < d.c; ++c)
          for (std::uint32_t r = 0; r < d.r; ++r) {
            const auto iy = input_coord(oy, r, spec, x.height);
            if (iy < 0) continue;
            for (std::uint32_t s = 0; s < d.s; ++s) {
              const auto ix = input_coord(ox, s, spec, x.width);
              if (ix < 0) continue;
              acc += w.at(k, c, r, s) *
                     x.values[x.offset(c, static_cast<std::uint32_t>(iy),
                                       static_cast<std::uint32_t>(ix))];
            }
          }
        out.values[out.offset(k, oy, ox)] = acc;
      }
  return out;
}

std::int32_t ternary_accumulate(std::span<const std::int8_t> signs,
                                std::span<const std::int32_t> mantissas) {
  if (signs.size() != mantissas.size()) {
    throw ShapeError("ternary_accumulate: length mismatch");
  }
  std::int32_t acc = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 0) continue;
    const bool overflow = signs[i] > 0
                              ? __builtin_add_overflow(acc, mantissas[i], &acc)
                              : __builtin_sub_overflow(acc, mantissas[i], &acc);
    if (overflow) {
      throw OverflowError("32-bit ternary accumulator overflow at element " +
                          std::to_string(i));
    }
  }
  return acc;
}

FgqConvResult conv_fgq(const grouping::FgqLayer& layer,
                       const QuantizedActivation& x, const ConvSpec& spec) {
  const auto& part = layer.partition;
  const auto& d = part.dims();
  if (x.data.bits != layer.precision.activation_bits) {
    throw PrecisionError("conv_fgq: activations are " +
                         std::to_string(x.data.bits) + "-bit, layer expects " +
                         std::to_string(layer.precision.activation_bits));
  }
  if (x.data.size() != std::size_t{x.channels} * x.height * x.width) {
    throw ShapeError("conv_fgq: activation size does not match dims");
  }
  if (d.c != x.channels) {
    throw ShapeError("conv_fgq: layer channels " + std::to_string(d.c) +
                     " != input channels " + std::to_string(x.channels));
  }
  layer.validate();

  FgqConvResult out;
  auto& y = out.output;
  y.channels = d.k;
  y.height = output_extent(x.height, d.r, spec);
  y.width = output_extent(x.width, d.s, spec);
  const std::size_t out_count = std::size_t{y.channels} * y.height * y.width;
  y.values.resize(out_count);
  out.accumulators.resize(out_count);
  const auto& xm = x.data.mantissas;

  if (layer.full_precision_weights) {
    const auto& wm = layer.weights.mantissas;
    out.output_frac_bits = x.data.frac_bits + layer.weights.frac_bits;
    for (std::uint32_t k = 0; k < d.k; ++k)
      for (std::uint32_t oy = 0; oy < y.height; ++oy)
        for (std::uint32_t ox = 0; ox < y.width; ++ox) {
          std::int32_t acc = 0;
          for (std::uint32_t c = 0; c < d.c; ++c)
            for (std::uint32_t r = 0; r < d.r; ++r) {
              const auto iy = input_coord(oy, r, spec, x.height);
              if (iy < 0) continue;
              for (std::uint32_t s = 0; s < d.s; ++s) {
                const auto ix = input_coord(ox, s, spec, x.width);
                if (ix < 0) continue;
                const std::int32_t prod =
                    wm[d.offset(k, c, r, s)] *
                    xm[x.offset(c, static_cast<std::uint32_t>(iy),
                                static_cast<std::uint32_t>(ix))];
                if (__builtin_add_overflow(acc, prod, &acc)) {
                  throw OverflowError("32-bit accumulator overflow at " +
                                      position(k, oy, ox));
                }
              }
            }
          const auto i = y.offset(k, oy, ox);
          out.accumulators[i] = acc;
          y.values[i] = std::ldexp(static_cast<double>(acc), -out.output_frac_bits);
        }
    return out;
  }

  const auto signs = layer.natural_signs();
  const auto& am = layer.alphas.mantissas;
  out.output_frac_bits = x.data.frac_bits + layer.alphas.frac_bits;
  for (std::uint32_t k = 0; k < d.k; ++k)
    for (std::uint32_t oy = 0; oy < y.height; ++oy)
      for (std::uint32_t ox = 0; ox < y.width; ++ox) {
        std::int64_t acc = 0;
        for (std::uint32_t run = 0; run < part.runs(); ++run) {
          const std::uint32_t c0 = run * part.group_size();
          const std::uint32_t c1 = c0 + part.run_size(run);
          for (std::uint32_t r = 0; r < d.r; ++r) {
            const auto iy = input_coord(oy, r, spec, x.height);
            if (iy < 0) continue;
            for (std::uint32_t s = 0; s < d.s; ++s) {
              const auto ix = input_coord(ox, s, spec, x.width);
              if (ix < 0) continue;
              std::int32_t group_sum = 0;
              for (std::uint32_t c = c0; c < c1; ++c) {
                const auto sign = signs[d.offset(k, c, r, s)];
                if (sign == 0) continue;
                const auto v = xm[x.offset(c, static_cast<std::uint32_t>(iy),
                                           static_cast<std::uint32_t>(ix))];
                const bool overflow =
                    sign > 0 ? __builtin_add_overflow(group_sum, v, &group_sum)
                             : __builtin_sub_overflow(group_sum, v, &group_sum);
                if (overflow) {
                  throw OverflowError(
                      "32-bit ternary accumulator overflow at " +
                      position(k, oy, ox) + ", group run " +
                      std::to_string(run) + " tap (" + std::to_string(r) +
                      ", " + std::to_string(s) + ")");
                }
              }
              const std::int64_t scaled =
                  std::int64_t{am[part.group_index(k, c0, r, s)]} * group_sum;
              if (__builtin_add_overflow(acc, scaled, &acc)) {
                throw OverflowError("64-bit accumulator overflow at " +
                                    position(k, oy, ox));
              }
            }
          }
        }
        const auto i = y.offset(k, oy, ox);
        out.accumulators[i] = acc;
        y.values[i] = std::ldexp(static_cast<double>(acc), -out.output_frac_bits);
      }
  return out;
}

QuantizedActivation quantize_activations(const Activation& x, int bits) {
  x.validate();
  QuantizedActivation out;
  out.channels = x.channels;
  out.height = x.height;
  out.width = x.width;
  out.data = fixedpoint::dfp_quantize(x.values, bits);
  return out;
}

Activation dequantize(const QuantizedActivation& x) {
  Activation out;
  out.channels = x.channels;
  out.height = x.height;
  out.width = x.width;
  out.values = fixedpoint::dfp_dequantize(x.data);
  return out;
}

Activation activation_from_npy(const NpyArray& array) {
  std::size_t base = 0;
  if (array.shape.size() == 4) {
    if (array.shape[0] != 1) {
      throw UnsupportedLayoutError("activations: batch size must be 1");
    }
    base = 1;
  } else if (array.shape.size() != 3) {
    throw UnsupportedLayoutError(
        "activations must be (C, H, W) or (1, C, H, W); got rank " +
        std::to_string(array.shape.size()));
  }
  Activation out;
  out.channels = static_cast<std::uint32_t>(array.shape[base]);
  out.height = static_cast<std::uint32_t>(array.shape[base + 1]);
  out.width = static_cast<std::uint32_t>(array.shape[base + 2]);
  out.values = array.data;
  out.validate();
  return out;
}

NpyArray activation_to_npy(const Activation& x, NpyDtype dtype) {
  NpyArray out;
  out.shape = {x.channels, x.height, x.width};
  out.dtype = dtype;
  out.data = x.values;
  return out;
}

ErrorMetrics error_metrics(std::span<const double> reference,
                           std::span<const double> test) {
  if (reference.size() != test.size()) {
    throw ShapeError("error_metrics: shape mismatch");
  }
  double ref_sq = 0.0, err_sq = 0.0;
  ErrorMetrics m;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double e = reference[i] - test[i];
    ref_sq += reference[i] * reference[i];
    err_sq += e * e;
    m.max_abs = std::max(m.max_abs, std::abs(e));
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (err_sq == 0.0) {
    m.rel_frobenius = 0.0;
    m.sqnr_db = kInf;
  } else if (ref_sq == 0.0) {
    m.rel_frobenius = kInf;
    m.sqnr_db = -kInf;
  } else {
    m.rel_frobenius = std::sqrt(err_sq / ref_sq);
    m.sqnr_db = 10.0 * std::log10(ref_sq / err_sq);
  }
  return m;
}

}  // namespace fgq::inference
