// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fgq/distfit.hpp"
#include "fgq/fixedpoint.hpp"
#include "fgq/tensor_io.hpp"
#include "fgq/ternary.hpp"

namespace fgq::grouping {

/// One static group: a contiguous run of input channels at a fixed
/// (filter, kernel row, kernel column).
struct Group {
  std::uint32_t k = 0;
  std::uint32_t run = 0;  // channel-run index, channels [c_begin, c_end)
  std::uint32_t r = 0;
  std::uint32_t s = 0;
  std::uint32_t c_begin = 0;
  std::uint32_t c_end = 0;

  std::uint32_t size() const { return c_end - c_begin; }
};

/// Static partition of a (K, C, R, S) tensor into groups of N channels.
/// Group (k, c, r, s) -> (k, c / N, r, s); the last run holds C mod N
/// channels when N does not divide C. Groups are numbered in
/// (k, run, r, s) row-major order, which is also the order of the scale
/// tensor and of groups in the packed sign stream.
class GroupPartition {
 public:
  GroupPartition() = default;
  /// Throws DomainError when group_size < 1.
  GroupPartition(Dims4 dims, std::uint32_t group_size);

  const Dims4& dims() const { return dims_; }
  std::uint32_t group_size() const { return group_size_; }
  std::uint32_t runs() const { return runs_; }
  std::size_t group_count() const {
    return std::size_t{dims_.k} * runs_ * dims_.r * dims_.s;
  }
  std::uint32_t run_size(std::uint32_t run) const;

  Group group(std::size_t index) const;
  std::size_t group_index(std::uint32_t k, std::uint32_t c, std::uint32_t r,
                          std::uint32_t s) const;

  /// Position of element (k, c, r, s) in [K][C/N][R*S][N] order.
  std::size_t layout_index(std::uint32_t k, std::uint32_t c, std::uint32_t r,
                           std::uint32_t s) const;

  friend bool operator==(const GroupPartition&, const GroupPartition&) = default;

 private:
  Dims4 dims_;
  std::uint32_t group_size_ = 1;
  std::uint32_t runs_ = 0;
};

GroupPartition partition_static(Dims4 dims, std::uint32_t group_size);

struct Precision {
  std::uint8_t weight_bits = 2;
  std::uint8_t scale_bits = 8;
  std::uint8_t activation_bits = 8;
  friend bool operator==(const Precision&, const Precision&) = default;
};

/// A quantized convolution layer. Ternary layers (weight_bits == 2) carry
/// packed signs in [K][C/N][R*S][N] order and one DFP scale per group.
/// Full-precision-path layers (weight_bits == 8, the first layer) carry
/// 8-bit DFP weights in (K, C, R, S) order instead.
struct FgqLayer {
  GroupPartition partition;
  Precision precision;
  bool full_precision_weights = false;
  PackedTernary signs;
  fixedpoint::DfpTensor alphas;
  fixedpoint::DfpTensor weights;

  /// Throws FormatError when the fields disagree with each other.
  void validate() const;

  /// Signs scattered back to natural (K, C, R, S) order.
  std::vector<std::int8_t> natural_signs() const;

  friend bool operator==(const FgqLayer&, const FgqLayer&) = default;
};

enum class Solver {
  kBrute,
  kTwoAlpha,
  kAnalyticAuto,
  kAnalyticGaussian,
  kAnalyticExponential,
  kRms,
};

std::string_view to_string(Solver solver);
/// Throws DomainError for an unknown name.
Solver solver_from_string(std::string_view name);

struct TernarizeOptions {
  Solver solver = Solver::kBrute;
  int scale_bits = 8;
  int activation_bits = 8;
  double prune_fraction = 0.0;
  distfit::GaussianRule gaussian_rule = distfit::GaussianRule::kSigma;
};

struct FgqResult {
  FgqLayer layer;
  std::vector<ternary::TernarySolution> groups;  // in group-index order
  std::vector<double> exact_alphas;  // unquantized scale per group
  double solver_error = 0.0;     // sum of group errors before quantization
  double quantized_error = 0.0;  // ||W - dequantize(layer)||^2
  std::optional<double> analytic_delta;  // layer threshold (analytic solvers)
  std::optional<distfit::Family> selected_family;
};

/// Solves every group of the partition independently, then quantizes the
/// scales to DFP with one exponent per layer.
///
/// Analytic solvers fit the distribution once per layer and apply the
/// resulting threshold to every group. The two-alpha solver is a
/// diagnostic: the stored layer keeps its supports with the single
/// least-squares scale per group, while `groups` and `solver_error` report
/// the two-scale solutions.
FgqResult fgq_ternarize(const WeightTensor& w, const GroupPartition& partition,
                        const TernarizeOptions& options);

/// Builds the 8-bit DFP weight layer used for the first convolution.
FgqLayer quantize_full_precision_layer(const WeightTensor& w,
                                       int activation_bits);

/// Reconstructs real weights. For ternary layers element (k,c,r,s) is
/// alpha[group] * sign; 8-bit layers return their DFP values.
WeightTensor dequantize(const FgqLayer& layer);

/// Same as dequantize but with caller-supplied per-group scales, e.g. the
/// unquantized solver output.
WeightTensor dequantize_with_alphas(const FgqLayer& layer,
                                    std::span<const double> alphas);

/// Terms of the triangle-inequality bound for clustered, low-precision
/// scales. Diagonal scale matrices are measured with the spectral norm
/// (largest absolute entry); the rest are Frobenius norms.
struct ClusteringBound {
  double ternarization = 0.0;  // ||W - D* What||
  double clustering = 0.0;     // ||D* - D~|| * ||What||
  double low_precision = 0.0;  // ||D~ - D^|| * ||What||
  double lhs = 0.0;            // ||W - D^ What||
  double slack() const { return ternarization + clustering + low_precision - lhs; }
};

/// d_star, d_tilde and d_hat hold one scale per group. Throws ShapeError on
/// length mismatch and Error if the bound is violated.
ClusteringBound clustering_bound_report(const WeightTensor& w,
                                        const GroupPartition& partition,
                                        std::span<const std::int8_t> signs,
                                        std::span<const double> d_star,
                                        std::span<const double> d_tilde,
                                        std::span<const double> d_hat);

}  // namespace fgq::grouping
