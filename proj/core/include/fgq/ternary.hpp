// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fgq::ternary {

/// Ternary approximation of one weight vector: W ~ alpha * signs, or with
/// two scales, alpha on the positive support and alpha_neg on the negative
/// support.
///
/// Wherever signs[i] != 0 it equals sign(W[i]). `error` is the squared
/// Euclidean distance between W and dequantized(). Thresholds are canonical
/// representatives of the optimal interval: the midpoint between the
/// smallest kept and the largest dropped magnitude (zero when nothing was
/// dropped). When a side keeps nothing its threshold is its largest
/// magnitude.
struct TernarySolution {
  std::vector<std::int8_t> signs;
  double alpha = 0.0;
  std::optional<double> alpha_neg;
  double delta_pos = 0.0;
  double delta_neg = 0.0;
  double error = 0.0;
  std::size_t kept_count = 0;

  double scale_for(std::int8_t sign) const {
    return (sign < 0 && alpha_neg) ? *alpha_neg : alpha;
  }
  std::vector<double> dequantized() const;
};

/// ||W - dequant||^2 computed term by term.
double reconstruction_error(std::span<const double> w,
                            const TernarySolution& solution);

/// Keeps |w| > delta and sets alpha to the mean kept magnitude.
TernarySolution solve_with_threshold(std::span<const double> w, double delta);

/// Exact single-scale solver. Sorts magnitudes and scans every prefix k,
/// maximizing (sum of top-k magnitudes)^2 / k; ties go to the smaller k.
/// For a fixed support size the top-k set maximizes that score, so the
/// scan is globally optimal. Zeros never enter the support.
TernarySolution solve_symmetric_brute(std::span<const double> w);

/// Exact solver with independent positive/negative thresholds and one shared
/// scale. Scans every (p, q) pair of positive and negative magnitude
/// prefixes. Its optimum error always equals solve_symmetric_brute's.
TernarySolution solve_asymmetric_brute(std::span<const double> w);

/// Independent scales for the positive and negative parts. The two parts are
/// orthogonal, so each is solved with solve_symmetric_brute and the errors
/// add.
TernarySolution solve_two_alpha(std::span<const double> w);

/// <w, signs> / ||signs||^2; zero for an all-zero support.
double optimal_alpha_given_support(std::span<const double> w,
                                   std::span<const std::int8_t> signs);

/// Hierarchical RMS solver over a group of filters.
///
/// Per filter: every magnitude prefix is scored with alpha = rms of the kept
/// elements, and the prefix with the smallest reconstruction error gives
/// that filter's (threshold, alpha) candidate. Per group: each candidate is
/// applied to all filters (keep |w| > threshold, scale alpha) and the one
/// with the smallest summed error wins. The returned solution covers the
/// filters concatenated in order.
TernarySolution solve_rms_hierarchical(
    std::span<const std::vector<double>> filters);

/// Single-filter convenience overload.
TernarySolution solve_rms_hierarchical(std::span<const double> filter);

struct ResidualResult {
  TernarySolution base;      // alpha replaced by its quantized value
  TernarySolution residual;  // ternary fit of W - base, alpha quantized
  double base_error = 0.0;   // ||W - base||^2
  double final_error = 0.0;  // ||W - base - residual||^2
  double residual_norm = 0.0;  // ||residual.dequantized()||
};

/// Second ternary pass on the quantization residual. Both scales are
/// quantized to `scale_bits` dynamic fixed point with their own exponent.
/// final_error never exceeds base_error.
ResidualResult solve_residual(std::span<const double> w,
                              const TernarySolution& base, int scale_bits);

}  // namespace fgq::ternary
