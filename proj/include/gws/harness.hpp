// Monte Carlo experiment harness: moment scans over conditioned trees,
// convergence of the root toll mean, normality diagnostics, truncated
// variance decay, and the two heavy-tail growth experiments.
//
// Every operation takes the master seed from the rng argument and derives
// one child generator per replicate from (seed, replicate index), so a
// report depends only on (seed, n, R) and is bit-identical for any worker
// count: replicates write into slots indexed by replicate and aggregation
// runs sequentially over those slots with compensated summation.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gws/offspring.hpp"
#include "gws/pattern.hpp"
#include "gws/rng.hpp"
#include "gws/stats.hpp"

namespace gws {

struct MomentReport {
    std::uint64_t n = 0;
    std::size_t reps = 0;
    double mean = 0.0;
    double se_mean = 0.0;
    double variance = 0.0;
    double se_variance = 0.0; // fourth-moment delta method
    double mean_over_n = 0.0;
    double var_over_n = 0.0;
    // Mean root toll over the same trees, with its standard error.
    std::optional<double> mu_n_estimate;
    std::optional<double> se_mu_n;
    // Caller-supplied limits for side-by-side display, echoed verbatim.
    std::optional<double> theta_reference;
    std::optional<double> mu_reference;
};

struct NormalityReport {
    double ks = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double center = 0.0;
    double scale = 0.0;
    // The variance grows much slower than n, so the sqrt(n) normalization
    // carries no signal and the KS number should not be read as a CLT check.
    bool degenerate_scale = false;
};

// Sample mean and variance of the total count over R independent
// conditioned trees of size n, plus the root-toll mean over the same trees.
MomentReport mc_moments(const OffspringDistribution& dist, const Pattern& pat,
                        std::uint64_t n, std::size_t reps, SeededRng& rng,
                        unsigned workers = 1);

struct ConvergenceRow {
    std::uint64_t n = 0;
    double mu_hat = 0.0;
    double se = 0.0;
    double gap = 0.0; // |mu_hat - theta|
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double theta = 0.0;
    // Least-squares slope of log(gap) against log(n); absent when some gap
    // is exactly zero (nothing to fit, the estimate already agrees).
    std::optional<double> fitted_exponent;
};

// Root-toll means at increasing sizes against a limit reference theta
// (estimate it with theta_kesten or take a closed form). Throws
// std::invalid_argument when theta is absent.
ConvergenceReport mu_n_convergence(const OffspringDistribution& dist, const Pattern& pat,
                                   std::span<const std::uint64_t> ns, std::size_t reps,
                                   SeededRng& rng, std::optional<double> theta,
                                   unsigned workers = 1);

struct VarianceScanReport {
    std::vector<MomentReport> rows;
    // Whether the last two Var/n entries lie within each other's 3-SE bands.
    bool stabilized = false;
};

VarianceScanReport variance_scan(const OffspringDistribution& dist, const Pattern& pat,
                                 std::span<const std::uint64_t> ns, std::size_t reps,
                                 SeededRng& rng, unsigned workers = 1);

enum class Standardization {
    self,  // sample mean and sample standard deviation
    oracle // caller-supplied center and scale
};

// Distance of the standardized totals from the standard normal. Throws
// DegenerateSample when the sample variance vanishes in self mode, and
// std::invalid_argument on a non-positive oracle scale.
NormalityReport normality_test(const OffspringDistribution& dist, const Pattern& pat,
                               std::uint64_t n, std::size_t reps, SeededRng& rng,
                               Standardization mode = Standardization::self,
                               double oracle_center = 0.0, double oracle_scale = 0.0,
                               unsigned workers = 1);

struct TruncationRow {
    std::size_t p = 0;
    double var_over_n = 0.0;
    double se_var_over_n = 0.0;
};

struct TruncationReport {
    std::vector<TruncationRow> rows;
};

// Variance of the fringe-size-gated functional (window [p, infinity)) per
// truncation level p, divided by n. p_list must be increasing and start at
// 1, where the uncentered functional coincides with the plain total.
//
// centered = true subtracts the exact mean toll at each fringe size before
// summing, which is the variant whose variance per node actually decays as
// p grows: the uncentered functional keeps the fluctuation of the number of
// gated fringes, which stays of order n with a constant that does not fade
// with p. Exact per-size means are available in closed form for star
// patterns only (height <= 1); other patterns throw std::invalid_argument
// in centered mode.
TruncationReport truncation_decay(const OffspringDistribution& dist, const Pattern& pat,
                                  std::uint64_t n, std::span<const std::size_t> p_list,
                                  std::size_t reps, SeededRng& rng, unsigned workers = 1,
                                  bool centered = false);

struct HeavyTailRow {
    std::uint64_t n = 0;
    std::size_t reps = 0;
    double mean = 0.0;
    double variance = 0.0;
    double se_variance = 0.0;
    double var_over_n = 0.0;
    Interval variance_ci; // percentile bootstrap, 1000 resamples
};

struct HeavyTailReport {
    int example = 0;
    std::string dist_spec;
    std::string pattern;
    std::vector<HeavyTailRow> rows;
    bool variance_increasing = false;    // Var strictly increasing across ns
    bool ratio_non_increasing = false;   // Var/n weakly decreasing across ns
    bool ratio_increasing = false;       // Var/n strictly increasing across ns
    double min_step_ratio = 0.0;         // min over steps of (Var/n)_{i+1} / (Var/n)_i
    bool ratio_ci_disjoint = false;      // consecutive Var/n bootstrap CIs disjoint
};

// The two fixed anomaly experiments: example 1 is the beta = 3 tail with
// the three-node path (every sampled tree is checked against the identity
// total = n - 1 - root degree); example 2 is the beta = 6 tail with the
// three-leaf star. Fourth moments are unstable here, so each row carries a
// bootstrap interval for the variance next to the delta-method SE.
HeavyTailReport heavy_tail_experiment(int example, std::span<const std::uint64_t> ns,
                                      std::size_t reps, SeededRng& rng,
                                      unsigned workers = 1);

} // namespace gws
