#include "gws/offspring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/zeta.hpp>

#include "gws/errors.hpp"

namespace gws {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stirling numbers of the second kind S(m, r) as doubles, row m.
std::vector<double> stirling2_row(unsigned m) {
    std::vector<double> row{1.0}; // S(0,0)
    for (unsigned n = 1; n <= m; ++n) {
        std::vector<double> next(n + 1, 0.0);
        for (unsigned r = 1; r <= n; ++r) {
            double below = r < row.size() ? row[r] : 0.0;
            next[r] = row[r - 1] + double(r) * below;
        }
        row = std::move(next);
    }
    return row;
}

// Signed Stirling numbers of the first kind s(m, j), row m:
// falling-factorial expansion x(x-1)...(x-m+1) = sum_j s(m,j) x^j.
std::vector<double> stirling1_row(unsigned m) {
    std::vector<double> row{1.0};
    for (unsigned n = 1; n <= m; ++n) {
        std::vector<double> next(n + 1, 0.0);
        for (unsigned j = 1; j <= n; ++j)
            next[j] = row[j - 1];
        for (unsigned j = 0; j < row.size(); ++j)
            next[j] -= double(n - 1) * row[j];
        row = std::move(next);
    }
    return row;
}

double falling_factorial(double x, unsigned m) {
    double r = 1.0;
    for (unsigned i = 0; i < m; ++i)
        r *= x - double(i);
    return r;
}

double format_guard(double v, std::string_view spec, std::size_t at) {
    if (!std::isfinite(v) || v < 0)
        throw InvalidDistribution("negative or non-finite value in spec '" +
                                  std::string(spec) + "' near byte " + std::to_string(at));
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

} // namespace

OffspringDistribution OffspringDistribution::geometric_half() {
    OffspringDistribution d;
    d.kind_ = OffspringKind::geometric_half;
    d.span_ = 1;
    return d;
}

OffspringDistribution OffspringDistribution::poisson_unit() {
    OffspringDistribution d;
    d.kind_ = OffspringKind::poisson_unit;
    d.span_ = 1;
    return d;
}

OffspringDistribution OffspringDistribution::finite_table(std::vector<double> pmf) {
    if (pmf.empty())
        throw InvalidDistribution("empty probability table");
    double total = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw InvalidDistribution("probability table has a negative or non-finite entry");
        total += p;
    }
    // Structural normalizability only; validate() applies the strict
    // 1e-12 criterion so perturbed fixtures can still be constructed.
    if (std::abs(total - 1.0) > 1e-6)
        throw InvalidDistribution("probability table sums to " + format_double(total) +
                                  ", not 1");
    OffspringDistribution d;
    d.kind_ = OffspringKind::finite_table;
    d.table_ = std::move(pmf);
    d.compute_span();
    return d;
}

OffspringDistribution OffspringDistribution::heavy_tail(double beta) {
    if (!(beta > 1.0))
        throw InvalidDistribution("heavy tail requires beta > 1");
    const double B = boost::math::zeta(beta) - 1.0;      // sum k^-beta, k >= 2
    const double A = boost::math::zeta(beta + 1.0) - 1.0; // sum k^-(beta+1), k >= 2
    OffspringDistribution d;
    d.kind_ = OffspringKind::heavy_tail;
    d.beta_ = beta;
    d.heavy_c_ = 1.0 / B; // makes the mean exactly 1
    d.heavy_p1_ = 0.0;
    d.heavy_p0_ = 1.0 - A / B;
    d.span_ = 1; // support contains 2 and 3
    return d;
}

void OffspringDistribution::compute_span() {
    std::uint32_t g = 0;
    for (std::size_t k = 1; k < table_.size(); ++k)
        if (table_[k] > 0.0)
            g = std::gcd(g, static_cast<std::uint32_t>(k));
    // Empty positive support leaves no constraint; record 1 so the residue
    // test is vacuous (such laws fail criticality anyway).
    span_ = g == 0 ? 1 : g;
}

double OffspringDistribution::pmf(std::uint64_t k) const {
    switch (kind_) {
    case OffspringKind::finite_table:
        return k < table_.size() ? table_[k] : 0.0;
    case OffspringKind::geometric_half:
        return k >= 1074 ? 0.0 : std::ldexp(1.0, -static_cast<int>(k) - 1);
    case OffspringKind::poisson_unit:
        return std::exp(-1.0 - std::lgamma(double(k) + 1.0));
    case OffspringKind::heavy_tail:
        if (k == 0)
            return heavy_p0_;
        if (k == 1)
            return heavy_p1_;
        return heavy_c_ * std::pow(double(k), -beta_ - 1.0);
    }
    return 0.0;
}

double OffspringDistribution::mean() const {
    // The closed-form kinds are critical analytically; only user tables
    // need the numeric sum (and may be perturbed on purpose).
    if (kind_ != OffspringKind::finite_table)
        return 1.0;
    double m = 0.0;
    for (std::size_t k = 1; k < table_.size(); ++k)
        m += double(k) * table_[k];
    return m;
}

double OffspringDistribution::moment(unsigned m) const {
    if (m == 0)
        return 1.0;
    switch (kind_) {
    case OffspringKind::finite_table: {
        double acc = 0.0;
        for (std::size_t k = 1; k < table_.size(); ++k)
            acc += std::pow(double(k), double(m)) * table_[k];
        return acc;
    }
    case OffspringKind::geometric_half:
    case OffspringKind::poisson_unit: {
        // E xi^m = sum_r S(m,r) E[falling(xi, r)]; the factorial moments
        // are r! for the geometric-half law and 1 for unit Poisson.
        auto s2 = stirling2_row(m);
        double acc = 0.0;
        double rfact = 1.0;
        for (unsigned r = 1; r <= m; ++r) {
            rfact *= double(r);
            acc += s2[r] * (kind_ == OffspringKind::geometric_half ? rfact : 1.0);
        }
        return acc;
    }
    case OffspringKind::heavy_tail: {
        if (double(m) >= beta_)
            return kInf;
        // sum_{k>=2} k^m c k^-(beta+1) = c (zeta(beta+1-m) - 1), plus the
        // mass at 1. Closed form, no series truncation.
        return heavy_c_ * (boost::math::zeta(beta_ + 1.0 - double(m)) - 1.0) + heavy_p1_;
    }
    }
    return 0.0;
}

double OffspringDistribution::factorial_moment(unsigned m) const {
    if (m == 0)
        return 1.0;
    switch (kind_) {
    case OffspringKind::finite_table: {
        double acc = 0.0;
        for (std::size_t k = 1; k < table_.size(); ++k)
            acc += falling_factorial(double(k), m) * table_[k];
        return acc;
    }
    case OffspringKind::geometric_half: {
        double acc = 1.0;
        for (unsigned r = 2; r <= m; ++r)
            acc *= double(r);
        return acc; // m!
    }
    case OffspringKind::poisson_unit:
        return 1.0;
    case OffspringKind::heavy_tail: {
        if (double(m) >= beta_)
            return kInf;
        auto s1 = stirling1_row(m);
        double acc = heavy_p1_ * falling_factorial(1.0, m);
        for (unsigned j = 1; j <= m; ++j)
            acc += s1[j] * heavy_c_ * (boost::math::zeta(beta_ + 1.0 - double(j)) - 1.0);
        return acc;
    }
    }
    return 0.0;
}

double OffspringDistribution::variance() const {
    const double m2 = moment(2);
    if (m2 == kInf)
        return kInf;
    const double mu = mean();
    return m2 - mu * mu;
}

ValidationReport OffspringDistribution::validate() const {
    ValidationReport r;
    r.mass_at_zero_positive = pmf(0) > 0.0;
    r.span = span_;
    if (kind_ == OffspringKind::finite_table) {
        double total = std::accumulate(table_.begin(), table_.end(), 0.0);
        r.normalized = std::abs(total - 1.0) <= 1e-12;
    } else {
        r.normalized = true; // analytic normalization
    }
    r.critical = std::abs(mean() - 1.0) <= 1e-9;
    return r;
}

void OffspringDistribution::require_valid() const {
    auto r = validate();
    if (r.ok())
        return;
    std::string what = "offspring law fails standing conditions:";
    if (!r.mass_at_zero_positive)
        what += " p(0)=0;";
    if (!r.normalized)
        what += " not normalized;";
    if (!r.critical)
        what += " mean " + format_double(mean()) + " != 1;";
    throw InvalidDistribution(what);
}

double OffspringDistribution::size_probability(std::uint64_t k) const {
    if (k == 0)
        throw std::invalid_argument("tree size must be >= 1");
    if (k == 1)
        return pmf(0);
    const std::size_t L = static_cast<std::size_t>(k - 1);

    // Base pmf restricted to [0, L]. Exact for the target cell: increments
    // above L overshoot S_k = k-1 no matter what accompanies them.
    std::vector<double> f(L + 1);
    for (std::size_t j = 0; j <= L; ++j)
        f[j] = pmf(j);
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j <= L; ++j)
        if (f[j] > 0.0)
            support.push_back(j);

    std::vector<double> g = f, next(L + 1);
    for (std::uint64_t step = 2; step <= k; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s <= L; ++s) {
            if (g[s] == 0.0)
                continue;
            for (std::size_t j : support) {
                if (s + j > L)
                    break;
                next[s + j] += g[s] * f[j];
            }
        }
        g.swap(next);
    }
    return g[L] / double(k);
}

std::vector<double> OffspringDistribution::size_probabilities(std::size_t k_max) const {
    std::vector<double> out(k_max + 1, 0.0);
    if (k_max == 0)
        return out;
    out[1] = pmf(0);
    if (k_max == 1)
        return out;
    const std::size_t L = k_max - 1;
    std::vector<double> f(L + 1);
    for (std::size_t j = 0; j <= L; ++j)
        f[j] = pmf(j);
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j <= L; ++j)
        if (f[j] > 0.0)
            support.push_back(j);

    std::vector<double> g = f, next(L + 1);
    for (std::size_t k = 2; k <= k_max; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s <= L; ++s) {
            if (g[s] == 0.0)
                continue;
            for (std::size_t j : support) {
                if (s + j > L)
                    break;
                next[s + j] += g[s] * f[j];
            }
        }
        g.swap(next);
        out[k] = g[k - 1] / double(k);
    }
    return out;
}

bool OffspringDistribution::feasible_size(std::uint64_t n) const {
    if (n == 0)
        return false;
    if (pmf(0) <= 0.0)
        return false; // every finite tree has a leaf
    if (n == 1)
        return true;
    const std::uint64_t target = n - 1;
    if (target % span_ != 0)
        return false;
    switch (kind_) {
    case OffspringKind::geometric_half:
    case OffspringKind::poisson_unit:
        return true;
    case OffspringKind::heavy_tail:
        // Positive support {2,3,...}: every target except 1 is a sum.
        return target != 1;
    case OffspringKind::finite_table: {
        std::vector<std::size_t> gens;
        for (std::size_t g = 1; g < table_.size(); ++g)
            if (table_[g] > 0.0)
                gens.push_back(g);
        if (gens.empty())
            return false;
        // Coin-change reachability. Beyond the cap every span-multiple is
        // reachable for any table with generators this small (the largest
        // gap of the generated semigroup is far below 2^20).
        constexpr std::uint64_t cap = 1u << 20;
        if (target > cap)
            return true;
        std::vector<char> reach(target + 1, 0);
        reach[0] = 1;
        for (std::size_t g : gens)
            for (std::size_t i = g; i <= target; ++i)
                reach[i] |= reach[i - g];
        return reach[target] != 0;
    }
    }
    return false;
}

OffspringDistribution OffspringDistribution::parse(std::string_view spec) {
    if (spec == "geom")
        return geometric_half();
    if (spec == "poisson")
        return poisson_unit();
    if (spec.rfind("table:", 0) == 0) {
        std::string_view body = spec.substr(6);
        std::vector<double> pmf;
        std::size_t i = 0;
        while (i < body.size()) {
            std::size_t end = body.find(',', i);
            if (end == std::string_view::npos)
                end = body.size();
            std::string_view entry = body.substr(i, end - i);
            std::size_t eq = entry.find('=');
            if (eq == std::string_view::npos)
                throw InvalidDistribution("expected k=v in spec '" + std::string(spec) + "'");
            std::uint32_t k = 0;
            auto kres = std::from_chars(entry.data(), entry.data() + eq, k);
            if (kres.ec != std::errc{} || kres.ptr != entry.data() + eq)
                throw InvalidDistribution("bad table key in spec '" + std::string(spec) + "'");
            if (k > 1'000'000)
                throw InvalidDistribution("table key " + std::to_string(k) + " is too large");
            double v = 0.0;
            auto vres = std::from_chars(entry.data() + eq + 1, entry.data() + entry.size(), v);
            if (vres.ec != std::errc{} || vres.ptr != entry.data() + entry.size())
                throw InvalidDistribution("bad table value in spec '" + std::string(spec) + "'");
            format_guard(v, spec, i);
            if (k + 1 > pmf.size())
                pmf.resize(k + 1, 0.0);
            if (pmf[k] != 0.0)
                throw InvalidDistribution("duplicate table key " + std::to_string(k));
            pmf[k] = v;
            i = end == body.size() ? end : end + 1;
        }
        if (pmf.empty())
            throw InvalidDistribution("empty table spec");
        return finite_table(std::move(pmf));
    }
    if (spec.rfind("heavytail:beta=", 0) == 0) {
        std::string_view num = spec.substr(15);
        double beta = 0.0;
        auto res = std::from_chars(num.data(), num.data() + num.size(), beta);
        if (res.ec != std::errc{} || res.ptr != num.data() + num.size())
            throw InvalidDistribution("bad beta in spec '" + std::string(spec) + "'");
        return heavy_tail(beta);
    }
    throw InvalidDistribution("unrecognized distribution spec '" + std::string(spec) + "'");
}

std::string OffspringDistribution::spec_string() const {
    switch (kind_) {
    case OffspringKind::geometric_half:
        return "geom";
    case OffspringKind::poisson_unit:
        return "poisson";
    case OffspringKind::heavy_tail:
        return "heavytail:beta=" + format_double(beta_);
    case OffspringKind::finite_table: {
        std::string out = "table:";
        bool first = true;
        for (std::size_t k = 0; k < table_.size(); ++k) {
            if (table_[k] == 0.0)
                continue;
            if (!first)
                out += ',';
            out += std::to_string(k) + "=" + format_double(table_[k]);
            first = false;
        }
        return out;
    }
    }
    return {};
}

SizeBiasedLaw::SizeBiasedLaw(OffspringDistribution base) : base_(std::move(base)) {}

double SizeBiasedLaw::moment(unsigned m) const {
    const double mass = total_mass();
    const double raw = base_.moment(m + 1);
    return raw / mass;
}

} // namespace gws
