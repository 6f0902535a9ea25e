// Small statistical toolbox shared by the experiment harness: moment
// summaries with standard errors, normality diagnostics, a chi-square tail,
// percentile bootstrap intervals, and a least-squares line fit.
#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "gws/rng.hpp"

namespace gws {

// Standard normal distribution function, evaluated through erfc so the
// absolute error stays near machine precision in both tails (far below the
// 1e-7 the diagnostics need).
double normal_cdf(double x);

// Kolmogorov-Smirnov sup distance between the empirical law of the sample
// and N(center, scale^2). The sample is copied and sorted internally.
// scale must be positive, the sample non-empty.
double ks_statistic(std::span<const double> sample, double center, double scale);

// Two-pass compensated moment summary. variance is the unbiased estimator;
// se_variance comes from the delta method using the fourth central moment,
//   Var(s^2) ~ (m4 - s^4 (n-3)/(n-1)) / n.
// skewness and excess_kurtosis are the standardized third and fourth
// central moments (0 when the sample is constant).
struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double se_mean = 0.0;
    double se_variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

SampleSummary summarize(std::span<const double> sample);

// P(X > stat) for X chi-square with dof degrees of freedom.
double chi_square_upper_tail(double stat, double dof);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap: resamples the data with replacement, evaluates the
// statistic on each resample, and returns the central interval at the given
// confidence level (default 95%). Deterministic given the rng state.
Interval bootstrap_percentile(std::span<const double> sample,
                              const std::function<double(std::span<const double>)>& statistic,
                              std::size_t resamples, SeededRng& rng, double level = 0.95);

// Ordinary least squares line y = slope * x + intercept. Needs at least two
// distinct x values.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace gws
