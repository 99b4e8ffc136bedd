// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/ternary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fgq/error.hpp"
#include "fgq/fixedpoint.hpp"

namespace fgq::ternary {

namespace {

std::int8_t sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Indices of nonzero elements of w selected by `keep`, ordered by
// descending magnitude; equal magnitudes keep index order.
template <typename Pred>
std::vector<std::size_t> magnitude_order(std::span<const double> w, Pred keep) {
  std::vector<std::size_t> idx;
  idx.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0 && keep(w[i])) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(w[a]) > std::abs(w[b]);
  });
  return idx;
}

// Threshold separating the first k entries of a descending magnitude list
// from the rest.
double prefix_threshold(std::span<const double> w,
                        const std::vector<std::size_t>& order, std::size_t k) {
  if (order.empty()) return 0.0;
  if (k == 0) return std::abs(w[order.front()]);
  const double last_kept = std::abs(w[order[k - 1]]);
  const double first_dropped = k < order.size() ? std::abs(w[order[k]]) : 0.0;
  return 0.5 * (last_kept + first_dropped);
}

void require_nonempty(std::span<const double> w, const char* who) {
  if (w.empty()) throw EmptyInputError(std::string(who) + ": empty input");
}

std::size_t count_kept(const std::vector<std::int8_t>& signs) {
  return static_cast<std::size_t>(
      std::count_if(signs.begin(), signs.end(), [](auto s) { return s != 0; }));
}

double sum_squares(std::span<const double> w) {
  return std::accumulate(w.begin(), w.end(), 0.0,
                         [](double acc, double v) { return acc + v * v; });
}

double quantize_scalar(double value, int bits) {
  const double v[1] = {value};
  return fixedpoint::dfp_quantize(v, bits).value(0);
}

}  // namespace

std::vector<double> TernarySolution::dequantized() const {
  std::vector<double> out(signs.size());
  for (std::size_t i = 0; i < signs.size(); ++i) {
    out[i] = signs[i] == 0 ? 0.0 : scale_for(signs[i]) * signs[i];
  }
  return out;
}

double reconstruction_error(std::span<const double> w,
                            const TernarySolution& solution) {
  if (w.size() != solution.signs.size()) {
    throw ShapeError("reconstruction_error: length mismatch");
  }
  double err = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto s = solution.signs[i];
    const double d = w[i] - (s == 0 ? 0.0 : solution.scale_for(s) * s);
    err += d * d;
  }
  return err;
}

TernarySolution solve_with_threshold(std::span<const double> w, double delta) {
  if (!(delta > 0.0)) {
    throw DomainError("solve_with_threshold: threshold must be positive");
  }
  TernarySolution out;
  out.signs.assign(w.size(), 0);
  double kept_sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > delta) {
      out.signs[i] = sign_of(w[i]);
      kept_sum += std::abs(w[i]);
      ++out.kept_count;
    }
  }
  out.alpha = out.kept_count == 0
                  ? 0.0
                  : kept_sum / static_cast<double>(out.kept_count);
  out.delta_pos = out.delta_neg = delta;
  out.error = reconstruction_error(w, out);
  return out;
}

TernarySolution solve_symmetric_brute(std::span<const double> w) {
  require_nonempty(w, "solve_symmetric_brute");
  const auto order = magnitude_order(w, [](double) { return true; });

  std::size_t best_k = 0;
  double best_score = 0.0;
  double best_sum = 0.0;
  double sum = 0.0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    sum += std::abs(w[order[k - 1]]);
    const double score = sum * sum / static_cast<double>(k);
    if (score > best_score) {
      best_score = score;
      best_k = k;
      best_sum = sum;
    }
  }

  TernarySolution out;
  out.signs.assign(w.size(), 0);
  for (std::size_t j = 0; j < best_k; ++j) {
    out.signs[order[j]] = sign_of(w[order[j]]);
  }
  out.kept_count = best_k;
  out.alpha = best_k == 0 ? 0.0 : best_sum / static_cast<double>(best_k);
  out.delta_pos = out.delta_neg = prefix_threshold(w, order, best_k);
  out.error = reconstruction_error(w, out);
  return out;
}

TernarySolution solve_asymmetric_brute(std::span<const double> w) {
  require_nonempty(w, "solve_asymmetric_brute");
  const auto pos = magnitude_order(w, [](double v) { return v > 0; });
  const auto neg = magnitude_order(w, [](double v) { return v < 0; });

  auto prefix_sums = [&](const std::vector<std::size_t>& order) {
    std::vector<double> sums(order.size() + 1, 0.0);
    for (std::size_t j = 0; j < order.size(); ++j) {
      sums[j + 1] = sums[j] + std::abs(w[order[j]]);
    }
    return sums;
  };
  const auto pos_sum = prefix_sums(pos);
  const auto neg_sum = prefix_sums(neg);

  std::size_t best_p = 0, best_q = 0;
  double best_score = 0.0;
  for (std::size_t p = 0; p <= pos.size(); ++p) {
    for (std::size_t q = 0; q <= neg.size(); ++q) {
      if (p + q == 0) continue;
      const double s = pos_sum[p] + neg_sum[q];
      const double score = s * s / static_cast<double>(p + q);
      if (score > best_score ||
          (score == best_score && p + q < best_p + best_q)) {
        best_score = score;
        best_p = p;
        best_q = q;
      }
    }
  }

  TernarySolution out;
  out.signs.assign(w.size(), 0);
  for (std::size_t j = 0; j < best_p; ++j) out.signs[pos[j]] = 1;
  for (std::size_t j = 0; j < best_q; ++j) out.signs[neg[j]] = -1;
  out.kept_count = best_p + best_q;
  out.alpha = out.kept_count == 0
                  ? 0.0
                  : (pos_sum[best_p] + neg_sum[best_q]) /
                        static_cast<double>(out.kept_count);
  out.delta_pos = prefix_threshold(w, pos, best_p);
  out.delta_neg = prefix_threshold(w, neg, best_q);
  out.error = reconstruction_error(w, out);
  return out;
}

TernarySolution solve_two_alpha(std::span<const double> w) {
  require_nonempty(w, "solve_two_alpha");
  std::vector<double> positive(w.size()), negative(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    positive[i] = std::max(w[i], 0.0);
    negative[i] = std::min(w[i], 0.0);
  }
  const auto p = solve_symmetric_brute(positive);
  const auto n = solve_symmetric_brute(negative);

  TernarySolution out;
  out.signs.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.signs[i] = static_cast<std::int8_t>(p.signs[i] + n.signs[i]);
  }
  out.alpha = p.alpha;
  out.alpha_neg = n.alpha;
  out.delta_pos = p.delta_pos;
  out.delta_neg = n.delta_pos;
  out.kept_count = p.kept_count + n.kept_count;
  out.error = p.error + n.error;
  return out;
}

double optimal_alpha_given_support(std::span<const double> w,
                                   std::span<const std::int8_t> signs) {
  if (w.size() != signs.size()) {
    throw ShapeError("optimal_alpha_given_support: length mismatch");
  }
  double dot = 0.0;
  std::size_t norm_sq = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (signs[i] < -1 || signs[i] > 1) {
      throw DomainError("optimal_alpha_given_support: non-ternary sign");
    }
    dot += w[i] * signs[i];
    norm_sq += static_cast<std::size_t>(signs[i] * signs[i]);
  }
  return norm_sq == 0 ? 0.0 : dot / static_cast<double>(norm_sq);
}

TernarySolution solve_rms_hierarchical(
    std::span<const std::vector<double>> filters) {
  if (filters.empty()) {
    throw EmptyInputError("solve_rms_hierarchical: empty group");
  }
  struct Candidate {
    double threshold;
    double alpha;
  };
  std::vector<Candidate> candidates;
  std::size_t total = 0;
  for (const auto& f : filters) {
    if (f.empty()) {
      throw EmptyInputError("solve_rms_hierarchical: empty filter");
    }
    total += f.size();
    const auto order = magnitude_order(f, [](double) { return true; });
    if (order.empty()) continue;

    const double total_sq = sum_squares(f);
    double kept_sq = 0.0, kept_abs = 0.0;
    double best_err = 0.0, best_alpha = 0.0;
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= order.size(); ++k) {
      const double m = std::abs(f[order[k - 1]]);
      kept_sq += m * m;
      kept_abs += m;
      const double kd = static_cast<double>(k);
      const double alpha = std::sqrt(kept_sq / kd);
      // sum over kept of (|w| - alpha)^2 plus the dropped energy
      const double err = total_sq - 2.0 * alpha * kept_abs + kd * alpha * alpha;
      if (best_k == 0 || err < best_err) {
        best_err = err;
        best_alpha = alpha;
        best_k = k;
      }
    }
    candidates.push_back({prefix_threshold(f, order, best_k), best_alpha});
  }

  auto group_error = [&](const Candidate& c) {
    double err = 0.0;
    for (const auto& f : filters) {
      for (double v : f) {
        const double d = std::abs(v) > c.threshold ? std::abs(v) - c.alpha : v;
        err += d * d;
      }
    }
    return err;
  };

  TernarySolution out;
  out.signs.assign(total, 0);
  if (candidates.empty()) return out;

  std::size_t best = 0;
  double best_err = group_error(candidates[0]);
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    const double err = group_error(candidates[j]);
    if (err < best_err) {
      best_err = err;
      best = j;
    }
  }
  const auto& chosen = candidates[best];

  std::vector<double> flat;
  flat.reserve(total);
  for (const auto& f : filters) flat.insert(flat.end(), f.begin(), f.end());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (std::abs(flat[i]) > chosen.threshold) out.signs[i] = sign_of(flat[i]);
  }
  out.kept_count = count_kept(out.signs);
  out.alpha = out.kept_count == 0 ? 0.0 : chosen.alpha;
  out.delta_pos = out.delta_neg = chosen.threshold;
  out.error = reconstruction_error(flat, out);
  return out;
}

TernarySolution solve_rms_hierarchical(std::span<const double> filter) {
  const std::vector<double> one(filter.begin(), filter.end());
  return solve_rms_hierarchical(std::span<const std::vector<double>>(&one, 1));
}

ResidualResult solve_residual(std::span<const double> w,
                              const TernarySolution& base, int scale_bits) {
  if (w.size() != base.signs.size()) {
    throw ShapeError("solve_residual: base does not match weights");
  }
  ResidualResult out;
  out.base = base;
  if (base.alpha_neg) {
    // one shared exponent for both scales
    const double both[2] = {base.alpha, *base.alpha_neg};
    const auto q = fixedpoint::dfp_quantize(both, scale_bits);
    out.base.alpha = q.value(0);
    out.base.alpha_neg = q.value(1);
  } else {
    out.base.alpha = quantize_scalar(base.alpha, scale_bits);
  }
  out.base.error = reconstruction_error(w, out.base);
  out.base_error = out.base.error;

  const auto approx = out.base.dequantized();
  std::vector<double> residual_target(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    residual_target[i] = w[i] - approx[i];
  }
  out.residual = solve_symmetric_brute(residual_target);
  out.residual.alpha = quantize_scalar(out.residual.alpha, scale_bits);
  out.residual.error = reconstruction_error(residual_target, out.residual);

  if (out.residual.error > out.base_error) {
    // A quantized residual scale that overshoots is worse than no residual.
    std::fill(out.residual.signs.begin(), out.residual.signs.end(), 0);
    out.residual.alpha = 0.0;
    out.residual.kept_count = 0;
    out.residual.error = out.base_error;
  }
  out.final_error = out.residual.error;
  out.residual_norm =
      out.residual.alpha * std::sqrt(static_cast<double>(out.residual.kept_count));
  return out;
}

}  // namespace fgq::ternary
