// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fgq/error.hpp"

namespace fgq::distfit {

namespace {

double model_cdf(Family family, double scale, double x) {
  switch (family) {
    case Family::kGaussian:
      return std::erf(x / (scale * std::numbers::sqrt2));
    case Family::kExponential:
      return -std::expm1(-x / scale);
    case Family::kUniform:
      return std::min(x / scale, 1.0);
  }
  return 0.0;
}

std::vector<double> sorted_magnitudes(std::span<const double> w) {
  std::vector<double> mags(w.size());
  std::transform(w.begin(), w.end(), mags.begin(),
                 [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end());
  return mags;
}

std::vector<double> ks_sample(std::span<const double> magnitudes) {
  if (magnitudes.size() <= kKsSampleLimit) {
    return {magnitudes.begin(), magnitudes.end()};
  }
  const std::size_t stride =
      (magnitudes.size() + kKsSampleLimit - 1) / kKsSampleLimit;
  std::vector<double> out;
  out.reserve(magnitudes.size() / stride + 1);
  for (std::size_t i = 0; i < magnitudes.size(); i += stride) {
    out.push_back(magnitudes[i]);
  }
  return out;
}

double fitted_scale(const DistFit& fit) {
  switch (fit.family) {
    case Family::kGaussian: return fit.sigma_hat;
    case Family::kExponential: return fit.mean_abs;
    case Family::kUniform: return fit.a_hat;
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kGaussian: return "gaussian";
    case Family::kExponential: return "exponential";
    case Family::kUniform: return "uniform";
  }
  return "unknown";
}

DistFit estimate(std::span<const double> w, Family family,
                 double prune_fraction) {
  if (w.empty()) throw EmptyInputError("estimate: empty sample");
  if (!(prune_fraction >= 0.0 && prune_fraction < 1.0)) {
    throw DomainError("estimate: prune fraction must be in [0, 1)");
  }
  DistFit fit;
  fit.family = family;
  fit.n = w.size();

  double sum_sq = 0.0;
  double sum_abs = 0.0;
  double max_abs = 0.0;
  for (double v : w) {
    sum_sq += v * v;
    sum_abs += std::abs(v);
    max_abs = std::max(max_abs, std::abs(v));
  }
  const double n = static_cast<double>(w.size());
  fit.sigma_hat = std::sqrt(sum_sq / n);
  fit.mean_abs = sum_abs / n;
  fit.a_hat = max_abs;

  // Subsample before sorting so the K-S cost stays bounded.
  std::vector<double> raw(w.size());
  std::transform(w.begin(), w.end(), raw.begin(),
                 [](double v) { return std::abs(v); });
  std::vector<double> sample = ks_sample(raw);
  std::sort(sample.begin(), sample.end());

  if (family == Family::kExponential && prune_fraction > 0.0) {
    std::vector<double> mags = sorted_magnitudes(w);
    const auto drop = static_cast<std::size_t>(prune_fraction * n);
    if (drop >= mags.size()) {
      throw DegenerateFitError("estimate: pruning removed every sample");
    }
    double kept = 0.0;
    for (std::size_t i = drop; i < mags.size(); ++i) kept += mags[i];
    fit.mean_abs = kept / static_cast<double>(mags.size() - drop);
    const auto sample_drop = static_cast<std::size_t>(
        prune_fraction * static_cast<double>(sample.size()));
    sample.erase(sample.begin(),
                 sample.begin() + static_cast<std::ptrdiff_t>(sample_drop));
  }

  const double scale = fitted_scale(fit);
  if (scale == 0.0) {
    throw DegenerateFitError(std::string("estimate: ") +
                             std::string(to_string(family)) +
                             " fit has zero scale (all-zero weights)");
  }
  fit.ks_stat = ks_statistic(sample, family, scale);
  return fit;
}

double ks_statistic(std::span<const double> magnitudes, Family family,
                    double scale) {
  if (magnitudes.empty()) throw EmptyInputError("ks_statistic: empty sample");
  if (!(scale > 0.0)) {
    throw DegenerateFitError("ks_statistic: model scale must be positive");
  }
  std::vector<double> sorted(magnitudes.begin(), magnitudes.end());
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    std::sort(sorted.begin(), sorted.end());
  }
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = model_cdf(family, scale, sorted[i]);
    const double upper = static_cast<double>(i + 1) / n - f;
    const double lower = f - static_cast<double>(i) / n;
    d = std::max({d, upper, lower});
  }
  return std::clamp(d, 0.0, 1.0);
}

Selection select_distribution(std::span<const double> w,
                              double prune_fraction) {
  if (w.size() < 2) {
    throw EmptyInputError("select_distribution: need at least two samples");
  }
  Selection out;
  out.gaussian = estimate(w, Family::kGaussian);
  out.exponential = estimate(w, Family::kExponential, prune_fraction);

  const double first = std::abs(w.front());
  const bool constant_magnitude = std::all_of(
      w.begin(), w.end(), [first](double v) { return std::abs(v) == first; });
  if (constant_magnitude) {
    out.family = Family::kGaussian;
  } else {
    out.family = out.exponential.ks_stat < out.gaussian.ks_stat
                     ? Family::kExponential
                     : Family::kGaussian;
  }
  return out;
}

double analytic_delta(const DistFit& fit, GaussianRule rule) {
  double delta = 0.0;
  switch (fit.family) {
    case Family::kExponential:
      delta = fit.mean_abs;
      break;
    case Family::kGaussian:
      delta = rule == GaussianRule::kSigma ? 0.6 * fit.sigma_hat
                                           : 0.7 * fit.mean_abs;
      break;
    case Family::kUniform:
      delta = fit.a_hat / 3.0;
      break;
  }
  if (!(delta > 0.0)) {
    throw DegenerateFitError("analytic_delta: fit parameter is zero");
  }
  return delta;
}

double theoretical_G_exponential(double delta, double mean_abs, double n) {
  if (!(mean_abs > 0.0) || delta < 0.0) {
    throw DomainError("theoretical_G_exponential: need delta >= 0, mean > 0");
  }
  const double ratio = 1.0 + delta / mean_abs;
  return n * mean_abs * mean_abs * ratio * ratio * std::exp(-delta / mean_abs);
}

double empirical_G(std::span<const double> w, double delta) {
  double sum = 0.0;
  std::size_t kept = 0;
  for (double v : w) {
    if (std::abs(v) > delta) {
      sum += std::abs(v);
      ++kept;
    }
  }
  return kept == 0 ? 0.0 : sum * sum / static_cast<double>(kept);
}

}  // namespace fgq::distfit
