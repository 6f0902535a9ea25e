#include "gws/degeneracy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gws/errors.hpp"
#include "gws/oracle.hpp"

namespace gws {

namespace {

constexpr std::uint64_t kMaxSearchBound = 12;

double tree_weight(const OffspringDistribution& dist, const OrderedTree& t) {
    double w = 1.0;
    for (std::size_t v = 0; v < t.size(); ++v) {
        w *= dist.pmf(t.outdegree(v));
        if (w == 0.0)
            return 0.0;
    }
    return w;
}

std::uint32_t cut_depth(const Pattern& pat) {
    return pat.height() > 0 ? pat.height() - 1 : 0;
}

double bound_coefficient(std::int64_t delta, double p1, double p2) {
    return double(delta) * double(delta) * p1 * p2 / (p1 + p2);
}

void check_bound(std::uint64_t size_bound) {
    if (size_bound < 1 || size_bound > kMaxSearchBound)
        throw OracleTooLarge("enumeration bound " + std::to_string(size_bound) +
                             " outside [1, " + std::to_string(kMaxSearchBound) + "]");
}

} // namespace

std::optional<DegeneracyCertificate> find_certificate(const OffspringDistribution& dist,
                                                      const Pattern& pat,
                                                      std::uint64_t size_bound) {
    dist.require_valid();
    check_bound(size_bound);
    const std::uint32_t depth = cut_depth(pat);

    for (std::uint64_t size = 1; size <= size_bound; ++size) {
        std::vector<OrderedTree> candidates;
        std::vector<double> weights;
        std::vector<OrderedTree> cuts;
        std::vector<std::int64_t> counts;
        for (const OrderedTree& t : enumerate_trees(size)) {
            double w = tree_weight(dist, t);
            if (w > 0.0) {
                candidates.push_back(t);
                weights.push_back(w);
                cuts.push_back(cut_at_depth(t, depth));
                counts.push_back(static_cast<std::int64_t>(subtree_count(pat, t)));
            }
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                if (!(cuts[i] == cuts[j]))
                    continue;
                std::int64_t ni = counts[i];
                std::int64_t nj = counts[j];
                if (ni == nj)
                    continue;
                DegeneracyCertificate cert{
                    candidates[i], candidates[j],   weights[i], weights[j],
                    ni - nj,       bound_coefficient(ni - nj, weights[i], weights[j])};
                return cert;
            }
        }
    }
    return std::nullopt;
}

bool verify_certificate(const OffspringDistribution& dist, const Pattern& pat,
                        const DegeneracyCertificate& cert) {
    if (cert.tau1.size() != cert.tau2.size())
        return false;
    double w1 = tree_weight(dist, cert.tau1);
    double w2 = tree_weight(dist, cert.tau2);
    if (!(w1 > 0.0) || !(w2 > 0.0))
        return false;
    if (w1 != cert.p1 || w2 != cert.p2)
        return false;
    const std::uint32_t depth = cut_depth(pat);
    if (!(cut_at_depth(cert.tau1, depth) == cut_at_depth(cert.tau2, depth)))
        return false;
    // Independent count path: injection enumeration, no shared DP.
    auto n1 = static_cast<std::int64_t>(brute_force_count(pat, cert.tau1, false));
    auto n2 = static_cast<std::int64_t>(brute_force_count(pat, cert.tau2, false));
    if (n1 - n2 != cert.delta || cert.delta == 0)
        return false;
    return std::abs(cert.coefficient - bound_coefficient(cert.delta, w1, w2)) <=
           1e-12 * std::max(1.0, std::abs(cert.coefficient));
}

double variance_lower_bound(const OffspringDistribution& dist, const Pattern& pat,
                            const DegeneracyCertificate& cert, std::uint64_t n) {
    if (!verify_certificate(dist, pat, cert))
        throw std::invalid_argument("certificate does not hold for this law and pattern");
    return cert.coefficient * double(n);
}

std::uint64_t count_fringe_occurrences(const OrderedTree& T, const OrderedTree& tau) {
    const auto degrees = T.outdegrees();
    const auto target = tau.outdegrees();
    if (target.size() > degrees.size())
        return 0;
    // The preorder degree run starting at v determines the fringe: if it
    // matches tau's full sequence, the fringe closes exactly there.
    std::uint64_t count = 0;
    for (std::size_t v = 0; v + target.size() <= degrees.size(); ++v) {
        bool match = true;
        for (std::size_t k = 0; k < target.size(); ++k) {
            if (degrees[v + k] != target[k]) {
                match = false;
                break;
            }
        }
        count += match;
    }
    return count;
}

LinearDecomposition fit_linear_decomposition(const OffspringDistribution& dist,
                                             const Pattern& pat, std::uint64_t size_bound) {
    dist.require_valid();
    check_bound(size_bound);

    std::vector<OrderedTree> trees;
    std::vector<std::uint64_t> sizes_present;
    for (std::uint64_t size = 1; size <= size_bound; ++size) {
        bool seen = false;
        for (const OrderedTree& t : enumerate_trees(size)) {
            if (tree_weight(dist, t) > 0.0) {
                trees.push_back(t);
                seen = true;
            }
        }
        if (seen)
            sizes_present.push_back(size);
    }
    if (trees.empty())
        throw InfeasibleSize("no positive-weight tree up to size " +
                             std::to_string(size_bound) + " under " + dist.spec_string());

    std::vector<OrderedTree> regressors;
    std::vector<Pattern> regressor_pats;
    for (const OrderedTree& fringe : pat.distinct_fringes()) {
        if (fringe.size() > 1) {
            regressors.push_back(fringe);
            regressor_pats.emplace_back(fringe);
        }
    }

    const std::size_t rows = trees.size();
    const std::size_t cols = sizes_present.size() + regressors.size();
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const OrderedTree& t = trees[r];
        auto size_slot = std::lower_bound(sizes_present.begin(), sizes_present.end(),
                                          t.size()) -
                         sizes_present.begin();
        design(r, size_slot) = 1.0;
        for (std::size_t f = 0; f < regressor_pats.size(); ++f)
            design(r, sizes_present.size() + f) = double(toll_count(regressor_pats[f], t));
        target(r) = double(subtree_count(pat, t));
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd solution = svd.solve(target);

    LinearDecomposition fit;
    fit.rank_deficient = svd.rank() < static_cast<Eigen::Index>(cols);
    for (std::size_t s = 0; s < sizes_present.size(); ++s)
        fit.g[sizes_present[s]] = solution(s);
    for (std::size_t f = 0; f < regressors.size(); ++f)
        fit.alphas.emplace_back(regressors[f], solution(sizes_present.size() + f));
    fit.max_residual = (design * solution - target).cwiseAbs().maxCoeff();
    fit.caveat = "exact fit over trees up to size " + std::to_string(size_bound) +
                 " is evidence of a size-and-toll decomposition, not a proof for all sizes";
    return fit;
}

} // namespace gws
