#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <doctest.h>

#include "gws/errors.hpp"
#include "gws/offspring.hpp"
#include "gws/rng.hpp"
#include "gws/sampler.hpp"
#include "gws/tree.hpp"

using namespace gws;

namespace {

constexpr std::uint64_t kSeed = 0x5eedf00dcafe1234ull;

bool is_lukasiewicz(const std::vector<std::uint32_t>& degs) {
    long long sum = 0;
    for (std::size_t i = 0; i < degs.size(); ++i) {
        sum += static_cast<long long>(degs[i]) - 1;
        if (i + 1 < degs.size() && sum < 0)
            return false;
    }
    return sum == -1;
}

// |freq - p| measured in binomial standard errors; a zero-probability
// cell must be exactly empty
double freq_gap_se(std::size_t hits, std::size_t reps, double p) {
    if (p == 0.0)
        return hits == 0 ? 0.0 : 1e9;
    double freq = double(hits) / double(reps);
    double se = std::sqrt(p * (1.0 - p) / double(reps));
    return std::abs(freq - p) / se;
}

} // namespace

TEST_CASE("rotation point of an outdegree sequence") {
    CHECK(lukasiewicz_rotation({0, 2, 0}) == 1);
    CHECK(lukasiewicz_rotation({1, 0, 1}) == 2);
    CHECK(lukasiewicz_rotation({2, 0, 0}) == 0); // already valid
    CHECK(lukasiewicz_rotation({0}) == 0);

    std::vector<std::uint32_t> v{0, 2, 0};
    std::rotate(v.begin(), v.begin() + lukasiewicz_rotation(v), v.end());
    CHECK(v == std::vector<std::uint32_t>{2, 0, 0});
}

TEST_CASE("cycle lemma: exactly one rotation is valid, and it is the chosen one") {
    // Exhaust all outdegree tuples over {0,..,3} with sum n-1 for n <= 6.
    for (std::size_t n = 1; n <= 6; ++n) {
        std::vector<std::uint32_t> tuple(n, 0);
        auto advance = [&]() {
            for (std::size_t i = 0; i < n; ++i) {
                if (tuple[i] < 3) {
                    ++tuple[i];
                    std::fill(tuple.begin(), tuple.begin() + i, 0u);
                    return true;
                }
            }
            return false;
        };
        std::size_t checked = 0;
        do {
            std::uint64_t sum = 0;
            for (auto d : tuple)
                sum += d;
            if (sum != n - 1)
                continue;
            ++checked;
            std::size_t valid = 0, valid_at = 0;
            for (std::size_t r = 0; r < n; ++r) {
                std::vector<std::uint32_t> rot(tuple.begin(), tuple.end());
                std::rotate(rot.begin(), rot.begin() + r, rot.end());
                if (is_lukasiewicz(rot)) {
                    ++valid;
                    valid_at = r;
                }
            }
            CHECK(valid == 1);
            CHECK(lukasiewicz_rotation(tuple) == valid_at);
        } while (advance());
        CHECK(checked > 0);
    }
}

TEST_CASE("offspring sampler draws match the pmf") {
    const std::size_t reps = 200000;
    struct Fixture {
        OffspringDistribution dist;
        std::vector<std::uint64_t> ks;
    };
    const Fixture fixtures[] = {
        {OffspringDistribution::geometric_half(), {0, 1, 2, 3, 6}},
        {OffspringDistribution::poisson_unit(), {0, 1, 2, 4}},
        {OffspringDistribution::finite_table({0.5, 0.0, 0.5}), {0, 1, 2}},
        {OffspringDistribution::heavy_tail(3.0), {0, 1, 2, 3, 7}},
    };
    std::uint64_t stream = 900;
    for (const auto& fx : fixtures) {
        OffspringSampler sampler(fx.dist);
        SeededRng rng(kSeed, stream++);
        std::map<std::uint64_t, std::size_t> hist;
        for (std::size_t i = 0; i < reps; ++i)
            ++hist[sampler.draw(rng)];
        for (auto k : fx.ks)
            CHECK(freq_gap_se(hist.count(k) ? hist[k] : 0, reps, fx.dist.pmf(k)) < 5.0);
    }
}

TEST_CASE("size-biased sampler draws match k p(k)") {
    const std::size_t reps = 200000;
    std::uint64_t stream = 950;

    SizeBiasedLaw geom(OffspringDistribution::geometric_half());
    OffspringSampler sg(geom);
    SeededRng rng(kSeed, stream++);
    std::map<std::uint64_t, std::size_t> hist;
    double mean_acc = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
        auto k = sg.draw(rng);
        ++hist[k];
        mean_acc += double(k);
    }
    CHECK(hist.count(0) == 0);
    for (std::uint64_t k : {1, 2, 3, 5})
        CHECK(freq_gap_se(hist[k], reps, geom.pmf(k)) < 5.0);
    // E xihat = E xi^2 = 3 for the geometric-half base; Var xihat = 13-9.
    CHECK(std::abs(mean_acc / double(reps) - 3.0) < 5.0 * std::sqrt(4.0 / double(reps)));

    SizeBiasedLaw point(OffspringDistribution::finite_table({0.5, 0.0, 0.5}));
    OffspringSampler sp(point);
    SeededRng rng2(kSeed, stream++);
    for (int i = 0; i < 100; ++i)
        CHECK(sp.draw(rng2) == 2);

    // Heavy beta=6: the spine law has all moments up to order 5.
    SizeBiasedLaw h6(OffspringDistribution::heavy_tail(6.0));
    OffspringSampler sh(h6);
    SeededRng rng3(kSeed, stream++);
    std::map<std::uint64_t, std::size_t> hist3;
    for (std::size_t i = 0; i < reps; ++i)
        ++hist3[sh.draw(rng3)];
    for (std::uint64_t k : {2, 3, 4})
        CHECK(freq_gap_se(hist3[k], reps, h6.pmf(k)) < 5.0);

    // The beta=3 spine law hits the suffix cap; the fold is tiny but real.
    SizeBiasedLaw h3(OffspringDistribution::heavy_tail(3.0));
    OffspringSampler sh3(h3);
    CHECK(sh3.truncated_mass() > 0.0);
    CHECK(sh3.truncated_mass() < 1e-10);
    CHECK(OffspringSampler(OffspringDistribution::geometric_half()).truncated_mass() == 0.0);
}

TEST_CASE("batch draws match single draws value for value") {
    for (auto spec : {"geom", "poisson", "heavytail:beta=3", "table:0=0.5,2=0.5"}) {
        auto dist = OffspringDistribution::parse(spec);
        OffspringSampler s(dist);
        SeededRng r1(kSeed, 60), r2(kSeed, 60), r3(kSeed, 60);
        const std::size_t n = 5000;
        std::vector<std::uint32_t> batch(n);
        s.draw_fill(r1, batch.data(), n);
        std::uint64_t sum_single = 0;
        bool same = true;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t v = s.draw(r2);
            sum_single += v;
            same &= batch[i] == v;
        }
        INFO(spec);
        CHECK(same);
        CHECK(s.draw_sum_capped(r3, n, UINT64_MAX) == sum_single);
        // After identical consumption all three streams coincide.
        CHECK(r1.state() == r2.state());
        CHECK(r2.state() == r3.state());
    }

    // The capped sum aborts exactly when the running sum first exceeds
    // the cap.
    auto geom = OffspringDistribution::geometric_half();
    OffspringSampler s(geom);
    SeededRng r1(kSeed, 61), r2(kSeed, 61);
    std::uint64_t capped = s.draw_sum_capped(r1, 1000, 50);
    std::uint64_t sum = 0;
    while (sum <= 50)
        sum += s.draw(r2);
    CHECK(capped == sum);
    CHECK(capped > 50);
    CHECK(r1.state() == r2.state());
}

TEST_CASE("sampler determinism across instances") {
    auto dist = OffspringDistribution::heavy_tail(3.0);
    OffspringSampler a(dist), b(dist);
    SeededRng r1(kSeed, 7), r2(kSeed, 7), r3(kSeed, 8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        auto x = a.draw(r1);
        all_equal &= x == b.draw(r2);
        any_diff |= x != a.draw(r3);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("unconditioned sampling") {
    auto geom = OffspringDistribution::geometric_half();

    SUBCASE("deterministic across runs") {
        SeededRng r1(kSeed, 1), r2(kSeed, 1);
        for (int i = 0; i < 50; ++i) {
            auto a = sample_gw(geom, r1);
            auto b = sample_gw(geom, r2);
            REQUIRE(a.has_value());
            REQUIRE(b.has_value());
            CHECK(serialize_tree(*a) == serialize_tree(*b));
        }
    }

    SUBCASE("cap of one separates immediate extinction from survival") {
        auto table = OffspringDistribution::finite_table({0.25, 0.5, 0.25});
        OffspringSampler s(table);
        std::uint64_t zero_stream = 0, pos_stream = 0;
        for (std::uint64_t st = 100; st < 200; ++st) {
            SeededRng probe(kSeed, st);
            if (s.draw(probe) == 0)
                zero_stream = st;
            else
                pos_stream = st;
        }
        REQUIRE(zero_stream != 0);
        REQUIRE(pos_stream != 0);
        SeededRng r0(kSeed, zero_stream);
        auto t0 = sample_gw(table, r0, 1);
        REQUIRE(t0.has_value());
        CHECK(serialize_tree(*t0) == "()");
        SeededRng r1(kSeed, pos_stream);
        CHECK_FALSE(sample_gw(table, r1, 1).has_value());
    }

    SUBCASE("empirical size-3 probability matches the exact value") {
        const std::size_t reps = 1000000;
        SeededRng rng(kSeed, 2);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < reps; ++i) {
            auto t = sample_gw(geom, rng, 10000);
            if (t && t->size() == 3)
                ++hits;
        }
        CHECK(freq_gap_se(hits, reps, 0.0625) < 4.0);
    }

    SUBCASE("rejects invalid laws") {
        auto sub = OffspringDistribution::finite_table({0.6, 0.4});
        SeededRng rng(kSeed, 3);
        CHECK_THROWS_AS(sample_gw(sub, rng), InvalidDistribution);
    }
}

TEST_CASE("conditioned sampling basics") {
    auto geom = OffspringDistribution::geometric_half();
    auto poisson = OffspringDistribution::poisson_unit();
    auto half2 = OffspringDistribution::finite_table({0.5, 0.0, 0.5});
    auto h3 = OffspringDistribution::heavy_tail(3.0);

    SUBCASE("single-node case consumes no randomness decisions") {
        SeededRng rng(kSeed, 10);
        CHECK(serialize_tree(sample_conditioned(geom, 1, rng)) == "()");
        CHECK(serialize_tree(sample_conditioned(h3, 1, rng)) == "()");
    }

    SUBCASE("exact sizes across laws") {
        SeededRng rng(kSeed, 11);
        for (std::uint64_t n = 2; n <= 12; ++n)
            CHECK(sample_conditioned(geom, n, rng).size() == n);
        for (std::uint64_t n = 2; n <= 12; ++n)
            CHECK(sample_conditioned(poisson, n, rng).size() == n);
        for (std::uint64_t n : {3, 5, 7, 9, 11})
            CHECK(sample_conditioned(half2, n, rng).size() == std::size_t(n));
        for (std::uint64_t n : {3, 4, 5, 6, 7, 1000})
            CHECK(sample_conditioned(h3, n, rng).size() == std::size_t(n));
    }

    SUBCASE("infeasible sizes are refused") {
        SeededRng rng(kSeed, 12);
        CHECK_THROWS_AS(sample_conditioned(half2, 4, rng), InfeasibleSize);
        CHECK_THROWS_AS(sample_conditioned(h3, 2, rng), InfeasibleSize);
        CHECK_THROWS_AS(sample_conditioned(geom, 0, rng), InfeasibleSize);
        auto gap = OffspringDistribution::parse("table:0=0.8,4=0.1,6=0.1");
        CHECK_THROWS_AS(sample_conditioned(gap, 3, rng), InfeasibleSize);
    }

    SUBCASE("deterministic, and the prebuilt-sampler overload agrees") {
        SeededRng r1(kSeed, 13), r2(kSeed, 13);
        OffspringSampler s(geom);
        for (int i = 0; i < 20; ++i)
            CHECK(serialize_tree(sample_conditioned(geom, 9, r1)) ==
                  serialize_tree(sample_conditioned(geom, s, 9, r2)));
    }
}

TEST_CASE("conditioned law at small sizes") {
    const std::size_t reps = 100000;

    SUBCASE("geometric-half at n=4 is uniform over the five shapes") {
        auto geom = OffspringDistribution::geometric_half();
        OffspringSampler s(geom);
        SeededRng rng(kSeed, 20);
        std::map<std::string, std::size_t> hist;
        for (std::size_t i = 0; i < reps; ++i)
            ++hist[serialize_tree(sample_conditioned(geom, s, 4, rng))];
        REQUIRE(hist.size() == 5);
        for (const auto& [shape, hits] : hist) {
            INFO(shape);
            CHECK(freq_gap_se(hits, reps, 0.2) < 5.0);
        }
    }

    SUBCASE("poisson at n=4 weights shapes by 1/prod d_v!") {
        auto poisson = OffspringDistribution::poisson_unit();
        OffspringSampler s(poisson);
        SeededRng rng(kSeed, 21);
        std::map<std::string, std::size_t> hist;
        for (std::size_t i = 0; i < reps; ++i)
            ++hist[serialize_tree(sample_conditioned(poisson, s, 4, rng))];
        const std::map<std::string, double> expect{
            {"(((())))", 6.0 / 16}, {"((()()))", 3.0 / 16}, {"((())())", 3.0 / 16},
            {"(()(()))", 3.0 / 16}, {"(()()())", 1.0 / 16},
        };
        REQUIRE(hist.size() == expect.size());
        for (const auto& [shape, p] : expect) {
            INFO(shape);
            REQUIRE(hist.count(shape) == 1);
            CHECK(freq_gap_se(hist[shape], reps, p) < 5.0);
        }
    }
}

TEST_CASE("spine-tree sampling") {
    auto geom = OffspringDistribution::geometric_half();

    SUBCASE("depth cut zero is the single node") {
        SeededRng rng(kSeed, 30);
        for (int i = 0; i < 10; ++i)
            CHECK(serialize_tree(sample_kesten(geom, 0, rng)) == "()");
    }

    SUBCASE("height never exceeds the cut and the root is never a leaf below it") {
        SeededRng rng(kSeed, 31);
        for (std::uint32_t m : {1, 2, 3, 5}) {
            for (int i = 0; i < 300; ++i) {
                auto t = sample_kesten(geom, m, rng);
                CHECK(t.height() <= m);
                CHECK(t.outdegree(0) >= 1);
            }
        }
    }

    SUBCASE("root outdegree follows the size-biased law") {
        const std::size_t reps = 100000;
        SeededRng rng(kSeed, 32);
        std::map<std::uint32_t, std::size_t> hist;
        for (std::size_t i = 0; i < reps; ++i)
            ++hist[sample_kesten(geom, 1, rng).outdegree(0)];
        SizeBiasedLaw sb(geom);
        for (std::uint32_t k : {1, 2, 3, 4})
            CHECK(freq_gap_se(hist[k], reps, sb.pmf(k)) < 5.0);
    }

    SUBCASE("point-mass spine law gives the deterministic cherry at depth 1") {
        auto half2 = OffspringDistribution::finite_table({0.5, 0.0, 0.5});
        SeededRng rng(kSeed, 33);
        for (int i = 0; i < 20; ++i)
            CHECK(serialize_tree(sample_kesten(half2, 1, rng)) == "(()())");
    }

    SUBCASE("density against the plain cut is the level width") {
        // P(spine cut = T) = w_2(T) P(gw cut = T); for the 3-path both
        // probabilities are 1/16 and w_2 = 1.
        const std::size_t reps = 200000;
        SeededRng rng(kSeed, 34);
        std::size_t spine_hits = 0, gw_hits = 0;
        for (std::size_t i = 0; i < reps; ++i)
            if (serialize_tree(sample_kesten(geom, 2, rng)) == "((()))")
                ++spine_hits;
        for (std::size_t i = 0; i < reps; ++i) {
            auto t = sample_gw(geom, rng, 100000);
            if (t && serialize_tree(cut_at_depth(*t, 2)) == "((()))")
                ++gw_hits;
        }
        CHECK(freq_gap_se(spine_hits, reps, 1.0 / 16) < 5.0);
        CHECK(freq_gap_se(gw_hits, reps, 1.0 / 16) < 5.0);
        double ratio = double(spine_hits) / double(gw_hits);
        CHECK(std::abs(ratio - 1.0) < 0.03);
    }

    SUBCASE("deterministic") {
        SeededRng r1(kSeed, 35), r2(kSeed, 35);
        for (int i = 0; i < 20; ++i)
            CHECK(serialize_tree(sample_kesten(geom, 4, r1)) ==
                  serialize_tree(sample_kesten(geom, 4, r2)));
    }
}
