#include "gws/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace gws {

namespace {

// Neumaier-compensated sum: keeps the roundoff of each add in a side
// accumulator so the total is exact to within one ulp of the true sum.
double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1)
        return sorted[0];
    double pos = q * double(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size())
        return sorted.back();
    double frac = pos - double(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

} // namespace

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double ks_statistic(std::span<const double> sample, double center, double scale) {
    if (sample.empty())
        throw std::invalid_argument("ks_statistic needs a non-empty sample");
    if (!(scale > 0.0))
        throw std::invalid_argument("ks_statistic needs a positive scale");
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = normal_cdf((xs[i] - center) / scale);
        d = std::max(d, f - double(i) / n);
        d = std::max(d, double(i + 1) / n - f);
    }
    return d;
}

SampleSummary summarize(std::span<const double> sample) {
    SampleSummary s;
    s.count = sample.size();
    if (sample.empty())
        return s;
    s.mean = compensated_sum(sample) / double(sample.size());
    if (sample.size() == 1)
        return s;

    long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
    for (double x : sample) {
        long double d = static_cast<long double>(x) - s.mean;
        long double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    long double n = static_cast<long double>(sample.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;

    s.variance = double(m2 * n / (n - 1.0L));
    s.se_mean = std::sqrt(s.variance / double(n));
    long double var_of_var = (m4 - m2 * m2 * (n - 3.0L) / (n - 1.0L)) / n;
    s.se_variance = std::sqrt(std::max(0.0, double(var_of_var)));
    if (m2 > 0.0L) {
        s.skewness = double(m3 / std::pow(m2, 1.5L));
        s.excess_kurtosis = double(m4 / (m2 * m2) - 3.0L);
    }
    return s;
}

double chi_square_upper_tail(double stat, double dof) {
    if (!(dof > 0.0))
        throw std::invalid_argument("chi-square needs positive degrees of freedom");
    if (stat <= 0.0)
        return 1.0;
    boost::math::chi_squared_distribution<double> law(dof);
    return boost::math::cdf(boost::math::complement(law, stat));
}

Interval bootstrap_percentile(std::span<const double> sample,
                              const std::function<double(std::span<const double>)>& statistic,
                              std::size_t resamples, SeededRng& rng, double level) {
    if (sample.empty())
        throw std::invalid_argument("bootstrap needs a non-empty sample");
    if (resamples < 2)
        throw std::invalid_argument("bootstrap needs at least two resamples");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("bootstrap confidence level must be in (0,1)");
    std::vector<double> draw(sample.size());
    std::vector<double> stats;
    stats.reserve(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        for (auto& x : draw)
            x = sample[rng.next_below(sample.size())];
        stats.push_back(statistic(draw));
    }
    std::sort(stats.begin(), stats.end());
    double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(stats, tail), quantile_sorted(stats, 1.0 - tail)};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("line fit needs matching samples of size >= 2");
    double xb = compensated_sum(x) / double(x.size());
    double yb = compensated_sum(y) / double(y.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - xb) * (x[i] - xb);
        sxy += (x[i] - xb) * (y[i] - yb);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("line fit needs at least two distinct x values");
    return {sxy / sxx, yb - (sxy / sxx) * xb};
}

} // namespace gws
