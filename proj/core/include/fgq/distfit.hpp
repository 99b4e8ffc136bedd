// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace fgq::distfit {

enum class Family { kGaussian, kExponential, kUniform };

std::string_view to_string(Family family);

/// Maximum-likelihood parameters of a weight sample, all computed from the
/// same data. ks_stat is measured against `family`.
struct DistFit {
  Family family = Family::kGaussian;
  double sigma_hat = 0.0;  // rms(W), scale of the zero-mean Gaussian
  double mean_abs = 0.0;   // mean |W|, the exponential mean (1 / rate)
  double a_hat = 0.0;      // max |W|, half-range of a symmetric uniform
  double ks_stat = 0.0;
  std::size_t n = 0;
};

/// Which approximation analytic_delta uses for the Gaussian family.
enum class GaussianRule {
  kSigma,    // 0.6 * sigma_hat
  kMeanAbs,  // 0.7 * mean_abs
};

/// K-S sorting cost is bounded by striding samples above this size.
inline constexpr std::size_t kKsSampleLimit = std::size_t{1} << 20;

/// Fits `family` to w. For the exponential family the smallest
/// floor(prune_fraction * n) magnitudes are discarded first (heavy-tail
/// approximation); other families ignore prune_fraction.
///
/// Throws EmptyInputError for an empty sample, DomainError for
/// prune_fraction outside [0, 1), and DegenerateFitError when the fitted
/// scale is zero.
DistFit estimate(std::span<const double> w, Family family,
                 double prune_fraction = 0.0);

/// Kolmogorov-Smirnov distance between the empirical CDF of `magnitudes`
/// and the fitted model on [0, inf): half-normal with scale `scale` for
/// Gaussian, 1 - exp(-x / scale) for Exponential, x / scale on [0, scale]
/// for Uniform. Both one-sided gaps are checked at every sample point.
double ks_statistic(std::span<const double> magnitudes, Family family,
                    double scale);

struct Selection {
  Family family = Family::kGaussian;
  DistFit gaussian;
  DistFit exponential;
};

/// Picks the family with the strictly smaller K-S distance; ties go to
/// Gaussian. A sample whose magnitudes are all equal carries no shape
/// information and also resolves to Gaussian.
Selection select_distribution(std::span<const double> w,
                              double prune_fraction = 0.0);

/// Approximate optimal threshold for the fitted family.
double analytic_delta(const DistFit& fit,
                      GaussianRule rule = GaussianRule::kSigma);

/// Expected value of (sum_{|w|>delta} |w|)^2 / |{|w|>delta}| for n samples
/// whose magnitudes are exponential with the given mean:
/// n * m^2 * (1 + delta/m)^2 * exp(-delta/m). Maximized at delta = m.
double theoretical_G_exponential(double delta, double mean_abs, double n);

/// Empirical counterpart of theoretical_G_exponential on a sample.
double empirical_G(std::span<const double> w, double delta);

}  // namespace fgq::distfit
