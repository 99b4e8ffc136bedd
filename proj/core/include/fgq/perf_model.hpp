// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "fgq/tensor_io.hpp"

namespace fgq::perf {

struct LayerShape {
  Dims4 dims;
  std::uint32_t out_h = 1;
  std::uint32_t out_w = 1;
  std::uint32_t group_size = 1;
  bool exempt = false;  // runs on the 8-bit weight path, no ternary ops
};

/// Operation counts for a layer or model.
///
/// Every full-precision MAC of a ternary layer becomes either the one
/// multiply its group needs or a ternary accumulation, so for ternary
/// layers mult + ternary == fma. Exempt layers keep all their MACs as
/// multiplies; those are also tracked separately in exempt_fma.
struct OpsReport {
  std::uint64_t fma_baseline = 0;
  std::uint64_t mult_count = 0;
  std::uint64_t ternary_acc_count = 0;
  std::uint64_t exempt_fma = 0;
  double fraction_eliminated = 0.0;  // 1 - mult_count / fma_baseline
};

/// Throws DomainError for a zero group size.
OpsReport count_ops(std::span<const LayerShape> layers);

/// Relative cost of one operation of each kind.
struct CostModel {
  double fma_cost = 1.0;
  double ternary_cost = 1.0 / 16.0;
  double exempt_cost = 1.0;
};

/// fma_baseline * fma_cost divided by the modelled cost of the quantized
/// network. Throws DomainError for non-positive costs or an empty report.
double project_speedup(const OpsReport& report, const CostModel& cost = {});

}  // namespace fgq::perf
