// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/perf_model.hpp"

#include "fgq/error.hpp"

namespace fgq::perf {

OpsReport count_ops(std::span<const LayerShape> layers) {
  OpsReport report;
  for (const auto& layer : layers) {
    if (layer.group_size < 1) throw DomainError("count_ops: group size 0");
    const auto& d = layer.dims;
    const std::uint64_t positions = std::uint64_t{layer.out_h} * layer.out_w;
    const std::uint64_t fma = std::uint64_t{d.k} * d.c * d.r * d.s * positions;
    report.fma_baseline += fma;
    if (layer.exempt) {
      report.mult_count += fma;
      report.exempt_fma += fma;
      continue;
    }
    const std::uint64_t runs = (d.c + layer.group_size - 1) / layer.group_size;
    const std::uint64_t mults = std::uint64_t{d.k} * runs * d.r * d.s * positions;
    report.mult_count += mults;
    report.ternary_acc_count += fma - mults;
  }
  report.fraction_eliminated =
      report.fma_baseline == 0
          ? 0.0
          : 1.0 - static_cast<double>(report.mult_count) /
                      static_cast<double>(report.fma_baseline);
  return report;
}

double project_speedup(const OpsReport& report, const CostModel& cost) {
  if (!(cost.fma_cost > 0.0 && cost.ternary_cost > 0.0 && cost.exempt_cost > 0.0)) {
    throw DomainError("project_speedup: costs must be positive");
  }
  const double ternary_mults =
      static_cast<double>(report.mult_count - report.exempt_fma);
  const double denom = ternary_mults * cost.fma_cost +
                       static_cast<double>(report.ternary_acc_count) * cost.ternary_cost +
                       static_cast<double>(report.exempt_fma) * cost.exempt_cost;
  if (!(denom > 0.0)) throw DomainError("project_speedup: empty report");
  return static_cast<double>(report.fma_baseline) * cost.fma_cost / denom;
}

}  // namespace fgq::perf
