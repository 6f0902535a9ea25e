#include "gws/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gws/degree_oracle.hpp"
#include "gws/errors.hpp"
#include "gws/sampler.hpp"
#include "gws/tree.hpp"

namespace gws {

namespace {

// Runs body(rep) for rep in [0, count) on the requested number of threads.
// Replicates are claimed through an atomic counter; the first exception is
// captured and rethrown on the calling thread after the pool drains.
void parallel_replicates(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count < 2) {
        for (std::size_t rep = 0; rep < count; ++rep)
            body(rep);
        return;
    }
    unsigned pool = std::min<unsigned>(workers, std::thread::hardware_concurrency());
    pool = std::max(pool, 2u);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto run = [&] {
        for (;;) {
            std::size_t rep = next.fetch_add(1, std::memory_order_relaxed);
            if (rep >= count)
                break;
            try {
                body(rep);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure)
                    failure = std::current_exception();
                next.store(count, std::memory_order_relaxed);
                break;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned i = 0; i < pool; ++i)
        threads.emplace_back(run);
    for (auto& t : threads)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

void check_run_inputs(const OffspringDistribution& dist, std::uint64_t n, std::size_t reps,
                      std::size_t min_reps) {
    dist.require_valid();
    if (reps < min_reps)
        throw std::invalid_argument("needs at least " + std::to_string(min_reps) +
                                    " replicates, got " + std::to_string(reps));
    if (!dist.feasible_size(n))
        throw InfeasibleSize("no tree of size " + std::to_string(n) + " under " +
                             dist.spec_string());
}

// Samples R conditioned trees (replicate rep on stream (n, rep)) and stores
// eval(rep, tree) results into per-replicate slots.
void for_each_tree(const OffspringDistribution& dist, std::uint64_t n, std::size_t reps,
                   const SeededRng& rng, unsigned workers,
                   const std::function<void(std::size_t, const OrderedTree&)>& eval) {
    const OffspringSampler sampler(dist);
    const std::uint64_t seed = rng.master_seed();
    parallel_replicates(reps, workers, [&](std::size_t rep) {
        SeededRng child(seed, streams::conditioned(n, rep));
        OrderedTree tree = sample_conditioned(dist, sampler, n, child);
        eval(rep, tree);
    });
}

MomentReport report_from(std::uint64_t n, const std::vector<double>& totals,
                         const std::vector<double>& root_tolls) {
    MomentReport rep;
    rep.n = n;
    rep.reps = totals.size();
    SampleSummary s = summarize(totals);
    rep.mean = s.mean;
    rep.se_mean = s.se_mean;
    rep.variance = s.variance;
    rep.se_variance = s.se_variance;
    rep.mean_over_n = s.mean / double(n);
    rep.var_over_n = s.variance / double(n);
    if (!root_tolls.empty()) {
        SampleSummary t = summarize(root_tolls);
        rep.mu_n_estimate = t.mean;
        rep.se_mu_n = t.se_mean;
    }
    return rep;
}

bool bands_overlap(double a, double sa, double b, double sb) {
    return std::abs(a - b) <= 3.0 * (sa + sb);
}

} // namespace

MomentReport mc_moments(const OffspringDistribution& dist, const Pattern& pat,
                        std::uint64_t n, std::size_t reps, SeededRng& rng,
                        unsigned workers) {
    check_run_inputs(dist, n, reps, 100);
    std::vector<double> totals(reps), tolls(reps);
    for_each_tree(dist, n, reps, rng, workers, [&](std::size_t rep, const OrderedTree& tree) {
        totals[rep] = double(subtree_count(pat, tree));
        tolls[rep] = double(toll_count(pat, tree));
    });
    return report_from(n, totals, tolls);
}

ConvergenceReport mu_n_convergence(const OffspringDistribution& dist, const Pattern& pat,
                                   std::span<const std::uint64_t> ns, std::size_t reps,
                                   SeededRng& rng, std::optional<double> theta,
                                   unsigned workers) {
    if (!theta)
        throw std::invalid_argument(
            "no limit reference: estimate theta first (spine construction or closed form)");
    if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()) ||
        std::adjacent_find(ns.begin(), ns.end()) != ns.end())
        throw std::invalid_argument("sizes must be strictly increasing");

    ConvergenceReport report;
    report.theta = *theta;
    for (std::uint64_t n : ns) {
        check_run_inputs(dist, n, reps, 100);
        std::vector<double> tolls(reps);
        for_each_tree(dist, n, reps, rng, workers,
                      [&](std::size_t rep, const OrderedTree& tree) {
                          tolls[rep] = double(toll_count(pat, tree));
                      });
        SampleSummary s = summarize(tolls);
        report.rows.push_back({n, s.mean, s.se_mean, std::abs(s.mean - *theta)});
    }

    bool fittable = ns.size() >= 2;
    for (const auto& row : report.rows)
        fittable = fittable && row.gap > 0.0;
    if (fittable) {
        std::vector<double> lx, ly;
        for (const auto& row : report.rows) {
            lx.push_back(std::log(double(row.n)));
            ly.push_back(std::log(row.gap));
        }
        report.fitted_exponent = fit_line(lx, ly).slope;
    }
    return report;
}

VarianceScanReport variance_scan(const OffspringDistribution& dist, const Pattern& pat,
                                 std::span<const std::uint64_t> ns, std::size_t reps,
                                 SeededRng& rng, unsigned workers) {
    if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()))
        throw std::invalid_argument("sizes must be increasing");
    VarianceScanReport report;
    for (std::uint64_t n : ns)
        report.rows.push_back(mc_moments(dist, pat, n, reps, rng, workers));
    if (report.rows.size() >= 2) {
        const auto& a = report.rows[report.rows.size() - 2];
        const auto& b = report.rows.back();
        report.stabilized = bands_overlap(a.var_over_n, a.se_variance / double(a.n),
                                          b.var_over_n, b.se_variance / double(b.n));
    }
    return report;
}

NormalityReport normality_test(const OffspringDistribution& dist, const Pattern& pat,
                               std::uint64_t n, std::size_t reps, SeededRng& rng,
                               Standardization mode, double oracle_center,
                               double oracle_scale, unsigned workers) {
    check_run_inputs(dist, n, reps, 2000);
    if (mode == Standardization::oracle && !(oracle_scale > 0.0))
        throw std::invalid_argument("oracle standardization needs a positive scale");

    std::vector<double> totals(reps);
    for_each_tree(dist, n, reps, rng, workers, [&](std::size_t rep, const OrderedTree& tree) {
        totals[rep] = double(subtree_count(pat, tree));
    });
    SampleSummary s = summarize(totals);

    NormalityReport report;
    if (mode == Standardization::self) {
        if (s.variance == 0.0)
            throw DegenerateSample("all " + std::to_string(reps) +
                                   " totals equal; nothing to standardize");
        report.center = s.mean;
        report.scale = std::sqrt(s.variance);
    } else {
        report.center = oracle_center;
        report.scale = oracle_scale;
    }
    report.ks = ks_statistic(totals, report.center, report.scale);
    report.skewness = s.skewness;
    report.excess_kurtosis = s.excess_kurtosis;
    report.degenerate_scale = s.variance / double(n) < 0.01;
    return report;
}

TruncationReport truncation_decay(const OffspringDistribution& dist, const Pattern& pat,
                                  std::uint64_t n, std::span<const std::size_t> p_list,
                                  std::size_t reps, SeededRng& rng, unsigned workers,
                                  bool centered) {
    check_run_inputs(dist, n, reps, 100);
    if (p_list.empty() || p_list.front() != 1)
        throw std::invalid_argument("truncation levels must start at p = 1");
    if (!std::is_sorted(p_list.begin(), p_list.end()) ||
        std::adjacent_find(p_list.begin(), p_list.end()) != p_list.end())
        throw std::invalid_argument("truncation levels must be strictly increasing");

    // Centering subtracts the exact mean toll per fringe size, so the gated
    // functional has mean zero at each size and its variance per node decays
    // in p. The uncentered variant keeps the fringe-count fluctuations: those
    // scale with the square of the limiting mean toll and do not fade with p,
    // which is measurable here (and is why the centered form exists at all).
    std::map<std::size_t, double> toll_means;
    if (centered) {
        if (pat.height() > 1)
            throw std::invalid_argument(
                "centered truncation needs the exact mean toll at every size, "
                "available in closed form only for star patterns (height <= 1)");
        const std::uint64_t arms = pat.shape().outdegree(0);
        for (std::uint64_t k = 1; k <= n; ++k)
            toll_means[k] = star_mu_n(dist, arms, k);
    }
    const std::map<std::size_t, double>* means = centered ? &toll_means : nullptr;

    std::vector<std::vector<double>> values(p_list.size(), std::vector<double>(reps));
    for_each_tree(dist, n, reps, rng, workers, [&](std::size_t rep, const OrderedTree& tree) {
        for (std::size_t w = 0; w < p_list.size(); ++w)
            values[w][rep] = truncated_additive(pat, {p_list[w], TruncationWindow::unbounded},
                                                tree, centered, means);
    });

    TruncationReport report;
    for (std::size_t w = 0; w < p_list.size(); ++w) {
        SampleSummary s = summarize(values[w]);
        report.rows.push_back({p_list[w], s.variance / double(n), s.se_variance / double(n)});
    }
    return report;
}

HeavyTailReport heavy_tail_experiment(int example, std::span<const std::uint64_t> ns,
                                      std::size_t reps, SeededRng& rng, unsigned workers) {
    if (example != 1 && example != 2)
        throw std::invalid_argument("experiment id must be 1 or 2");
    if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()) ||
        std::adjacent_find(ns.begin(), ns.end()) != ns.end())
        throw std::invalid_argument("sizes must be strictly increasing");

    OffspringDistribution dist = example == 1 ? OffspringDistribution::heavy_tail(3.0)
                                              : OffspringDistribution::heavy_tail(6.0);
    Pattern pat(parse_tree(example == 1 ? "((()))" : "(()()())"));

    HeavyTailReport report;
    report.example = example;
    report.dist_spec = dist.spec_string();
    report.pattern = serialize_tree(pat.shape());

    auto variance_stat = [](std::span<const double> xs) {
        return summarize(xs).variance;
    };

    for (std::uint64_t n : ns) {
        check_run_inputs(dist, n, reps, 2);
        std::vector<double> totals(reps);
        for_each_tree(dist, n, reps, rng, workers,
                      [&](std::size_t rep, const OrderedTree& tree) {
                          std::uint64_t total = subtree_count(pat, tree);
                          if (example == 1 &&
                              total != tree.size() - 1 - tree.outdegree(0))
                              throw std::logic_error(
                                  "path total disagrees with size-minus-root-degree "
                                  "identity at n=" + std::to_string(n) +
                                  " replicate " + std::to_string(rep));
                          totals[rep] = double(total);
                      });
        SampleSummary s = summarize(totals);
        SeededRng boot(rng.master_seed(), streams::bootstrap(n));
        Interval ci = bootstrap_percentile(totals, variance_stat, 1000, boot);
        report.rows.push_back({n, reps, s.mean, s.variance, s.se_variance,
                               s.variance / double(n), ci});
    }

    report.variance_increasing = true;
    report.ratio_non_increasing = true;
    report.ratio_increasing = true;
    report.ratio_ci_disjoint = true;
    report.min_step_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const auto& a = report.rows[i - 1];
        const auto& b = report.rows[i];
        report.variance_increasing &= b.variance > a.variance;
        report.ratio_non_increasing &= b.var_over_n <= a.var_over_n;
        report.ratio_increasing &= b.var_over_n > a.var_over_n;
        if (a.var_over_n > 0.0)
            report.min_step_ratio = std::min(report.min_step_ratio,
                                             b.var_over_n / a.var_over_n);
        report.ratio_ci_disjoint &= a.variance_ci.hi / double(a.n) <
                                    b.variance_ci.lo / double(b.n);
    }
    if (report.rows.size() < 2) {
        report.variance_increasing = false;
        report.ratio_non_increasing = false;
        report.ratio_increasing = false;
        report.ratio_ci_disjoint = false;
        report.min_step_ratio = 0.0;
    }
    return report;
}

} // namespace gws
