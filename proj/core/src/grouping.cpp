// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgq/error.hpp"

namespace fgq::grouping {

GroupPartition::GroupPartition(Dims4 dims, std::uint32_t group_size)
    : dims_(dims), group_size_(group_size) {
  if (group_size < 1) throw DomainError("group size must be at least 1");
  runs_ = (dims.c + group_size - 1) / group_size;
}

GroupPartition partition_static(Dims4 dims, std::uint32_t group_size) {
  return GroupPartition(dims, group_size);
}

std::uint32_t GroupPartition::run_size(std::uint32_t run) const {
  const std::uint32_t begin = run * group_size_;
  return std::min(group_size_, dims_.c - begin);
}

Group GroupPartition::group(std::size_t index) const {
  Group g;
  g.s = static_cast<std::uint32_t>(index % dims_.s);
  index /= dims_.s;
  g.r = static_cast<std::uint32_t>(index % dims_.r);
  index /= dims_.r;
  g.run = static_cast<std::uint32_t>(index % runs_);
  g.k = static_cast<std::uint32_t>(index / runs_);
  g.c_begin = g.run * group_size_;
  g.c_end = g.c_begin + run_size(g.run);
  return g;
}

std::size_t GroupPartition::group_index(std::uint32_t k, std::uint32_t c,
                                        std::uint32_t r,
                                        std::uint32_t s) const {
  return ((std::size_t{k} * runs_ + c / group_size_) * dims_.r + r) * dims_.s +
         s;
}

std::size_t GroupPartition::layout_index(std::uint32_t k, std::uint32_t c,
                                         std::uint32_t r,
                                         std::uint32_t s) const {
  const std::uint32_t run = c / group_size_;
  const std::size_t rs_count = std::size_t{dims_.r} * dims_.s;
  const std::size_t rs = std::size_t{r} * dims_.s + s;
  return std::size_t{k} * dims_.c * rs_count +
         std::size_t{run} * group_size_ * rs_count + rs * run_size(run) +
         (c - run * group_size_);
}

void FgqLayer::validate() const {
  const auto& d = partition.dims();
  if (partition.group_size() < 1) throw FormatError("layer: group size 0");
  if (full_precision_weights) {
    if (precision.weight_bits != 8) {
      throw FormatError("layer: 8-bit weight path must have weight_bits 8");
    }
    if (weights.bits != 8 || weights.size() != d.count()) {
      throw FormatError("layer: 8-bit weight block does not cover the tensor");
    }
    fixedpoint::validate(weights);
    return;
  }
  if (precision.weight_bits != 2) {
    throw FormatError("layer: ternary path must have weight_bits 2");
  }
  if (signs.element_count() != d.count()) {
    throw FormatError("layer: sign count " +
                      std::to_string(signs.element_count()) +
                      " != K*C*R*S " + std::to_string(d.count()));
  }
  if (alphas.size() != partition.group_count()) {
    throw FormatError("layer: scale count does not match group count");
  }
  if (alphas.bits != precision.scale_bits) {
    throw FormatError("layer: scale block bit width disagrees with tag");
  }
  fixedpoint::validate(alphas);
}

std::vector<std::int8_t> FgqLayer::natural_signs() const {
  const auto& d = partition.dims();
  std::vector<std::int8_t> out(d.count());
  for (std::uint32_t k = 0; k < d.k; ++k)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t r = 0; r < d.r; ++r)
        for (std::uint32_t s = 0; s < d.s; ++s)
          out[d.offset(k, c, r, s)] =
              signs.at(partition.layout_index(k, c, r, s));
  return out;
}

std::string_view to_string(Solver solver) {
  switch (solver) {
    case Solver::kBrute: return "brute";
    case Solver::kTwoAlpha: return "two_alpha";
    case Solver::kAnalyticAuto: return "analytic_auto";
    case Solver::kAnalyticGaussian: return "analytic_gaussian";
    case Solver::kAnalyticExponential: return "analytic_exponential";
    case Solver::kRms: return "rms";
  }
  return "unknown";
}

Solver solver_from_string(std::string_view name) {
  for (auto s : {Solver::kBrute, Solver::kTwoAlpha, Solver::kAnalyticAuto,
                 Solver::kAnalyticGaussian, Solver::kAnalyticExponential,
                 Solver::kRms}) {
    if (to_string(s) == name) return s;
  }
  throw DomainError("unknown solver '" + std::string(name) + "'");
}

namespace {

std::vector<double> gather(const WeightTensor& w, const Group& g) {
  std::vector<double> out;
  out.reserve(g.size());
  for (std::uint32_t c = g.c_begin; c < g.c_end; ++c) {
    out.push_back(w.at(g.k, c, g.r, g.s));
  }
  return out;
}

double layer_threshold(const WeightTensor& w, const TernarizeOptions& opt,
                       std::optional<distfit::Family>& family) {
  using distfit::Family;
  switch (opt.solver) {
    case Solver::kAnalyticGaussian: {
      family = Family::kGaussian;
      return distfit::analytic_delta(distfit::estimate(w.data(), *family),
                                     opt.gaussian_rule);
    }
    case Solver::kAnalyticExponential: {
      family = Family::kExponential;
      return distfit::analytic_delta(
          distfit::estimate(w.data(), *family, opt.prune_fraction));
    }
    case Solver::kAnalyticAuto: {
      const auto sel = distfit::select_distribution(w.data(), opt.prune_fraction);
      family = sel.family;
      return distfit::analytic_delta(
          sel.family == Family::kGaussian ? sel.gaussian : sel.exponential,
          opt.gaussian_rule);
    }
    default:
      return 0.0;
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    err += d * d;
  }
  return err;
}

}  // namespace

FgqResult fgq_ternarize(const WeightTensor& w, const GroupPartition& partition,
                        const TernarizeOptions& options) {
  if (!(partition.dims() == w.dims())) {
    throw ShapeError("fgq_ternarize: partition dims do not match the tensor");
  }
  FgqResult out;
  const bool analytic = options.solver == Solver::kAnalyticAuto ||
                        options.solver == Solver::kAnalyticGaussian ||
                        options.solver == Solver::kAnalyticExponential;
  double delta = 0.0;
  if (analytic) {
    delta = layer_threshold(w, options, out.selected_family);
    out.analytic_delta = delta;
  }

  const auto& d = w.dims();
  const std::size_t group_count = partition.group_count();
  out.groups.resize(group_count);
  out.exact_alphas.resize(group_count);
  std::vector<std::int8_t> layout_signs(d.count(), 0);

  // Each iteration writes only its own group's slots.
  for (std::size_t gi = 0; gi < group_count; ++gi) {
    const Group g = partition.group(gi);
    const auto values = gather(w, g);
    ternary::TernarySolution sol;
    switch (options.solver) {
      case Solver::kBrute: sol = ternary::solve_symmetric_brute(values); break;
      case Solver::kTwoAlpha: sol = ternary::solve_two_alpha(values); break;
      case Solver::kRms: sol = ternary::solve_rms_hierarchical(values); break;
      default: sol = ternary::solve_with_threshold(values, delta); break;
    }
    out.exact_alphas[gi] =
        sol.alpha_neg ? ternary::optimal_alpha_given_support(values, sol.signs)
                      : sol.alpha;
    for (std::uint32_t c = g.c_begin; c < g.c_end; ++c) {
      layout_signs[partition.layout_index(g.k, c, g.r, g.s)] =
          sol.signs[c - g.c_begin];
    }
    out.groups[gi] = std::move(sol);
  }

  for (const auto& sol : out.groups) out.solver_error += sol.error;

  auto& layer = out.layer;
  layer.partition = partition;
  layer.precision = {2, static_cast<std::uint8_t>(options.scale_bits),
                     static_cast<std::uint8_t>(options.activation_bits)};
  layer.signs = pack_ternary(layout_signs);
  layer.alphas = fixedpoint::dfp_quantize(out.exact_alphas, options.scale_bits);

  out.quantized_error = squared_distance(w.data(), dequantize(layer).data());
  return out;
}

FgqLayer quantize_full_precision_layer(const WeightTensor& w,
                                       int activation_bits) {
  FgqLayer layer;
  layer.partition = GroupPartition(w.dims(), std::max<std::uint32_t>(w.dims().c, 1));
  layer.precision = {8, 8, static_cast<std::uint8_t>(activation_bits)};
  layer.full_precision_weights = true;
  layer.weights = fixedpoint::dfp_quantize(w.data(), 8);
  return layer;
}

WeightTensor dequantize_with_alphas(const FgqLayer& layer,
                                    std::span<const double> alphas) {
  const auto& part = layer.partition;
  const auto& d = part.dims();
  if (alphas.size() != part.group_count()) {
    throw ShapeError("dequantize: scale count does not match group count");
  }
  std::vector<double> values(d.count());
  for (std::uint32_t k = 0; k < d.k; ++k)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t r = 0; r < d.r; ++r)
        for (std::uint32_t s = 0; s < d.s; ++s) {
          const auto sign = layer.signs.at(part.layout_index(k, c, r, s));
          values[d.offset(k, c, r, s)] =
              sign == 0 ? 0.0 : alphas[part.group_index(k, c, r, s)] * sign;
        }
  return WeightTensor(d, std::move(values));
}

WeightTensor dequantize(const FgqLayer& layer) {
  if (layer.full_precision_weights) {
    return WeightTensor(layer.partition.dims(),
                        fixedpoint::dfp_dequantize(layer.weights));
  }
  return dequantize_with_alphas(layer, fixedpoint::dfp_dequantize(layer.alphas));
}

ClusteringBound clustering_bound_report(const WeightTensor& w,
                                        const GroupPartition& partition,
                                        std::span<const std::int8_t> signs,
                                        std::span<const double> d_star,
                                        std::span<const double> d_tilde,
                                        std::span<const double> d_hat) {
  const auto& d = w.dims();
  const std::size_t groups = partition.group_count();
  if (!(partition.dims() == d) || signs.size() != d.count() ||
      d_star.size() != groups || d_tilde.size() != groups ||
      d_hat.size() != groups) {
    throw ShapeError("clustering_bound_report: inputs are not conformal");
  }
  double tern_sq = 0.0, lhs_sq = 0.0;
  std::size_t kept = 0;
  for (std::uint32_t k = 0; k < d.k; ++k)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t r = 0; r < d.r; ++r)
        for (std::uint32_t s = 0; s < d.s; ++s) {
          const auto i = d.offset(k, c, r, s);
          const auto g = partition.group_index(k, c, r, s);
          const double v = w.data()[i];
          const double a = v - d_star[g] * signs[i];
          const double b = v - d_hat[g] * signs[i];
          tern_sq += a * a;
          lhs_sq += b * b;
          if (signs[i] != 0) ++kept;
        }
  double star_tilde = 0.0, tilde_hat = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    star_tilde = std::max(star_tilde, std::abs(d_star[g] - d_tilde[g]));
    tilde_hat = std::max(tilde_hat, std::abs(d_tilde[g] - d_hat[g]));
  }
  const double sign_norm = std::sqrt(static_cast<double>(kept));

  ClusteringBound out;
  out.ternarization = std::sqrt(tern_sq);
  out.clustering = star_tilde * sign_norm;
  out.low_precision = tilde_hat * sign_norm;
  out.lhs = std::sqrt(lhs_sq);
  const double scale = std::max(out.lhs, 1.0);
  if (out.slack() < -1e-12 * scale) {
    throw Error("clustering bound violated: slack " +
                std::to_string(out.slack()));
  }
  return out;
}

}  // namespace fgq::grouping
