#include "gws/degree_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gws/errors.hpp"

namespace gws {

namespace {

// Transform length floor that keeps the offspring tail below ~1e-13, so a
// truncated pmf vector is indistinguishable from the law itself.
std::size_t offspring_extent(const OffspringDistribution& dist) {
    switch (dist.kind()) {
    case OffspringKind::geometric_half:
    case OffspringKind::poisson_unit:
        return 64;
    case OffspringKind::finite_table:
        return dist.table_size();
    case OffspringKind::heavy_tail: {
        // P(xi >= K) ~ (c/beta) K^-beta <= 1e-13
        double beta = dist.tail_exponent();
        double c = dist.tail_normalizer();
        double k = std::pow(c / (beta * 1e-13), 1.0 / beta);
        return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(k)));
    }
    }
    return 64;
}

std::vector<double> pmf_vector(const OffspringDistribution& dist, std::size_t len) {
    std::vector<double> p(len);
    for (std::size_t k = 0; k < len; ++k)
        p[k] = dist.pmf(k);
    return p;
}

// Linear convolution of a and b, truncated to the first len entries. Exact
// for those entries: dropped products only land at indices >= len.
std::vector<double> conv_truncated(Eigen::FFT<double>& fft, const std::vector<double>& a,
                                   const std::vector<double>& b, std::size_t len) {
    std::size_t full = a.size() + b.size() - 1;
    if (full <= 32) {
        std::vector<double> out(std::min(len, full), 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size() && i + j < out.size(); ++j)
                out[i + j] += a[i] * b[j];
        return out;
    }
    std::size_t L = std::bit_ceil(full);
    std::vector<std::complex<double>> fa(L), fb(L);
    std::vector<std::complex<double>> ta(L), tb(L);
    for (std::size_t i = 0; i < a.size(); ++i) ta[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) tb[i] = b[i];
    fft.fwd(fa, ta);
    fft.fwd(fb, tb);
    for (std::size_t i = 0; i < L; ++i) fa[i] *= fb[i];
    fft.inv(ta, fa);
    std::vector<double> out(std::min(len, full));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::max(0.0, ta[i].real());
    return out;
}

// S_count pmf for a finite table by repeated squaring with truncation:
// every kept entry is exact, whatever the table's reach.
std::vector<double> sum_pmf_binexp(const OffspringDistribution& dist, std::uint64_t count,
                                   std::size_t len) {
    Eigen::FFT<double> fft;
    std::vector<double> base = pmf_vector(dist, std::min(len, dist.table_size()));
    std::vector<double> result{1.0};
    while (count > 0) {
        if (count & 1)
            result = conv_truncated(fft, result, base, len);
        count >>= 1;
        if (count > 0)
            base = conv_truncated(fft, base, base, len);
    }
    result.resize(len, 0.0);
    return result;
}

// S_count pmf through one circular transform and a pointwise complex power.
// Sound for the analytic-tail laws: the wraparound mass P(S >= L) is
// bounded by the one-big-jump estimate for heavy tails (checked) and decays
// exponentially for the geometric and Poisson laws with L >= 2 count.
std::vector<double> sum_pmf_circular(const OffspringDistribution& dist, std::uint64_t count,
                                     std::size_t len) {
    std::size_t L = std::bit_ceil(std::max({2 * (count + 2), std::uint64_t(len),
                                            std::uint64_t(offspring_extent(dist))}));
    if (dist.kind() == OffspringKind::heavy_tail) {
        double beta = dist.tail_exponent();
        double c = dist.tail_normalizer();
        double wrap = double(count) * (c / beta) * std::pow(double(L - count), -beta);
        if (!(wrap < 1e-8))
            throw PrecisionError("wraparound mass bound " + std::to_string(wrap) +
                                 " too large at transform length " + std::to_string(L));
    }
    std::vector<double> p = pmf_vector(dist, L);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(L), spec(L);
    for (std::size_t i = 0; i < L; ++i) in[i] = p[i];
    fft.fwd(spec, in);
    double exponent = static_cast<double>(count);
    for (auto& z : spec)
        z = std::pow(z, exponent);
    fft.inv(in, spec);
    double mass = 0.0;
    for (const auto& z : in) mass += z.real();
    if (std::abs(mass - 1.0) > 1e-8)
        throw PrecisionError("convolution power mass drifted to " + std::to_string(mass));
    std::vector<double> out(len, 0.0);
    for (std::size_t i = 0; i < std::min(len, L); ++i)
        out[i] = std::max(0.0, in[i].real());
    return out;
}

double choose(double n, std::uint64_t k) {
    double r = 1.0;
    for (std::uint64_t i = 0; i < k; ++i)
        r *= (n - double(i)) / double(i + 1);
    return r;
}

// Degree cap beyond which the conditioned weight is dead: the sum S_{n-1}
// must land j below its mean, a left deviation that is Gaussian-small past
// a few standard deviations. 80 sqrt(n) is far past any of them.
std::size_t degree_cap(std::uint64_t n) {
    double cap = 64.0 + 80.0 * std::sqrt(double(n));
    return std::min<std::size_t>(n - 1, static_cast<std::size_t>(cap));
}

} // namespace

std::vector<double> sum_pmf(const OffspringDistribution& dist, std::uint64_t count,
                            std::size_t len) {
    if (len == 0)
        throw std::invalid_argument("sum_pmf needs len >= 1");
    if (count == 0) {
        std::vector<double> out(len, 0.0);
        out[0] = 1.0;
        return out;
    }
    if (dist.kind() == OffspringKind::finite_table)
        return sum_pmf_binexp(dist, count, len);
    return sum_pmf_circular(dist, count, len);
}

double size_probability_large(const OffspringDistribution& dist, std::uint64_t n) {
    if (n == 0)
        throw std::invalid_argument("tree size must be >= 1");
    std::vector<double> s = sum_pmf(dist, n, n);
    return s[n - 1] / double(n);
}

std::vector<double> root_degree_law(const OffspringDistribution& dist, std::uint64_t n,
                                    std::size_t k_cap) {
    dist.require_valid();
    if (n == 0)
        throw std::invalid_argument("tree size must be >= 1");
    std::vector<double> law(k_cap + 1, 0.0);
    if (n == 1) {
        law[0] = 1.0;
        return law;
    }
    std::vector<double> s1 = sum_pmf(dist, n - 1, n);
    double pn = 0.0; // P(S_n = n-1)
    for (std::uint64_t j = 0; j < n; ++j)
        pn += dist.pmf(j) * s1[n - 1 - j];
    std::uint64_t top = std::min<std::uint64_t>(k_cap, n - 1);
    for (std::uint64_t j = 1; j <= top; ++j)
        law[j] = dist.pmf(j) * (double(j) / double(n - 1)) * s1[n - 1 - j] * double(n) / pn;
    return law;
}

ExactPair degree_sum_moments(const OffspringDistribution& dist, std::span<const double> f,
                             std::uint64_t n) {
    dist.require_valid();
    if (n == 0)
        throw std::invalid_argument("tree size must be >= 1");
    if (f.empty())
        throw std::invalid_argument("degree functional table is empty");
    if (n == 1)
        return {f[0], 0.0};

    std::size_t kcap = std::min<std::size_t>(f.size(), n);
    std::vector<double> s1 = sum_pmf(dist, n - 1, n);
    std::vector<double> s2 = sum_pmf(dist, n - 2, n);

    double pn = 0.0;
    for (std::uint64_t j = 0; j < n; ++j)
        pn += dist.pmf(j) * s1[n - 1 - j];

    // Diagonal terms: E f(x1) and E f(x1)^2 under the conditioned vector.
    long double m1 = 0.0L, diag = 0.0L;
    std::vector<double> a(kcap);
    for (std::size_t j = 0; j < kcap; ++j) {
        double pj = dist.pmf(j);
        a[j] = f[j] * pj;
        long double reach = s1[n - 1 - j];
        m1 += static_cast<long double>(f[j]) * pj * reach;
        diag += static_cast<long double>(f[j]) * f[j] * pj * reach;
    }
    m1 = m1 * n / pn;
    diag = diag * n / pn;

    // Cross terms: sum over j+k = s of a_j a_k is one self-convolution.
    Eigen::FFT<double> fft;
    std::vector<double> aa = conv_truncated(fft, a, a, n);
    long double cross = 0.0L;
    for (std::size_t s = 0; s < aa.size(); ++s)
        cross += static_cast<long double>(aa[s]) * s2[n - 1 - s];
    cross = cross * n * (n - 1.0L) / pn;

    double mean = double(m1);
    double var = double(diag + cross - m1 * m1);
    return {mean, std::max(0.0, var)};
}

double star_mu_n(const OffspringDistribution& dist, std::uint64_t arms, std::uint64_t n) {
    if (arms == 0)
        return 1.0;
    std::vector<double> law = root_degree_law(dist, n, degree_cap(std::max<std::uint64_t>(n, 2)));
    long double mu = 0.0L;
    for (std::size_t j = arms; j < law.size(); ++j)
        mu += static_cast<long double>(choose(double(j), arms)) * law[j];
    return double(mu);
}

ExactPair star_total_moments(const OffspringDistribution& dist, std::uint64_t arms,
                             std::uint64_t n) {
    std::size_t cap = degree_cap(std::max<std::uint64_t>(n, 2)) + 1;
    std::vector<double> f(cap);
    for (std::size_t j = 0; j < cap; ++j)
        f[j] = choose(double(j), arms);
    return degree_sum_moments(dist, f, n);
}

ExactPair root_degree_moments(const OffspringDistribution& dist, std::uint64_t n) {
    std::vector<double> law = root_degree_law(dist, n, degree_cap(std::max<std::uint64_t>(n, 2)));
    long double e = 0.0L, e2 = 0.0L;
    for (std::size_t j = 0; j < law.size(); ++j) {
        e += static_cast<long double>(j) * law[j];
        e2 += static_cast<long double>(j) * j * law[j];
    }
    return {double(e), std::max(0.0, double(e2 - e * e))};
}

double expected_fringe_count(const OffspringDistribution& dist, const OrderedTree& shape,
                             std::uint64_t n) {
    dist.require_valid();
    if (n == 0)
        throw std::invalid_argument("tree size must be >= 1");
    std::uint64_t m = shape.size();
    if (m > n)
        return 0.0;
    double w = 1.0;
    for (std::size_t v = 0; v < shape.size(); ++v) {
        w *= dist.pmf(shape.outdegree(v));
        if (w == 0.0)
            return 0.0;
    }
    std::vector<double> s1 = sum_pmf(dist, n, n);
    double pn = s1[n - 1]; // P(S_n = n-1)
    double reach = 1.0;    // P(S_{n-m} = n-m)
    if (n > m) {
        std::vector<double> s = sum_pmf(dist, n - m, n - m + 1);
        reach = s[n - m];
    }
    return double(n) * w * reach / pn;
}

} // namespace gws
