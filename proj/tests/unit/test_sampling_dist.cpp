#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"

#include "curtail/errors.hpp"
#include "curtail/exact_core.hpp"
#include "curtail/sampling_dist.hpp"

using namespace curtail;

TEST_CASE("support of design(6,22)") {
    const SamplingDistribution dist(Design(6, 22));
    std::set<std::pair<int, int>> got;
    for (const auto& o : dist.support()) got.insert({o.m, o.s});
    std::set<std::pair<int, int>> want;
    for (int m = 6; m <= 22; ++m) want.insert({m, 6});
    for (int m = 17; m <= 22; ++m) want.insert({m, m - 17});
    CHECK(got == want);
    CHECK(dist.size() == want.size());
}

TEST_CASE("stage-wise order of design(6,22)") {
    const SamplingDistribution dist(Design(6, 22));
    const auto& sup = dist.support();
    // futility outcomes first by s, then efficacy outcomes latest stage first
    for (int i = 0; i <= 5; ++i) {
        CHECK(sup[i].m == 17 + i);
        CHECK(sup[i].s == i);
    }
    for (int i = 6; i < static_cast<int>(sup.size()); ++i) {
        CHECK(sup[i].s == 6);
        CHECK(sup[i].m == 22 - (i - 6));
    }
    CHECK(dist.compare(dist.outcome(17, 0), dist.outcome(18, 1)) == std::strong_ordering::less);
    CHECK(dist.compare(dist.outcome(22, 6), dist.outcome(21, 6)) == std::strong_ordering::less);
    CHECK(dist.compare(dist.outcome(10, 6), dist.outcome(10, 6)) == std::strong_ordering::equal);
    CHECK(dist.compare(dist.outcome(6, 6), dist.outcome(22, 5)) == std::strong_ordering::greater);
}

TEST_CASE("stage-wise comparison is a total order") {
    for (auto [u, K] : {std::pair{4, 9}, {6, 22}, {1, 5}, {10, 49}}) {
        const SamplingDistribution dist(Design(u, K));
        const auto& sup = dist.support();
        for (const auto& a : sup) {
            for (const auto& b : sup) {
                const auto ab = stagewise_compare(a, b);
                const auto ba = stagewise_compare(b, a);
                // antisymmetric and total
                CHECK((ab == 0) == (a.m == b.m && a.s == b.s));
                CHECK((ab < 0) == (ba > 0));
                CHECK(ab == dist.compare(a, b));
                for (const auto& c : sup) {
                    if (ab < 0 && stagewise_compare(b, c) < 0) {
                        REQUIRE(stagewise_compare(a, c) < 0);
                    }
                }
            }
        }
    }
}

TEST_CASE("compare rejects points outside the support") {
    const SamplingDistribution dist(Design(6, 22));
    TerminalOutcome bogus{5, 2, OutcomeKind::Futility, 1};
    CHECK_THROWS_AS(dist.compare(bogus, dist.outcome(6, 6)), NotInSupportError);
    CHECK_THROWS_AS(dist.rank(16, 0), NotInSupportError);
    CHECK_THROWS_AS(dist.pmf(10, 3, 0.5), NotInSupportError);
    CHECK_FALSE(dist.contains(23, 6));
}

TEST_CASE("path counts") {
    for (auto [u, K] : {std::pair{1, 1}, {3, 4}, {4, 9}, {6, 22}, {22, 72}}) {
        const SamplingDistribution dist(Design(u, K));
        CHECK(dist.outcome(u, u).path_count == 1);
    }
    const SamplingDistribution small(Design(3, 4));
    CHECK(small.outcome(3, 1).path_count == 2);
    const auto census = oracle::enumerate(3, 4, 0.5);
    CHECK(census.at({3, 1}).paths == 2);
}

TEST_CASE("path counts match the enumerated census and fill the cube") {
    for (int u = 1; u <= 5; ++u) {
        for (int K = u; K <= 14; ++K) {
            const SamplingDistribution dist(Design(u, K));
            const auto census = oracle::enumerate(u, K, 0.5);
            REQUIRE(census.size() == dist.size());
            BigInt total = 0;
            for (const auto& o : dist.support()) {
                const auto& c = census.at({o.m, o.s});
                REQUIRE(o.path_count == c.paths);
                // each stopped path is completed by every tail of length K - m
                REQUIRE(o.path_count * (BigInt(1) << (K - o.m)) == c.sequences);
                total += o.path_count << (K - o.m);
            }
            CHECK(total == (BigInt(1) << K));
        }
    }
}

TEST_CASE("terminal pmf examples") {
    const SamplingDistribution small(Design(3, 4));
    CHECK(terminal_pmf(small, 2, 0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(static_cast<double>(oracle::enumerate(3, 4, 0.5).at({2, 0}).probability) ==
          doctest::Approx(0.25));

    for (auto [u, K] : {std::pair{4, 9}, {6, 22}, {10, 49}, {34, 83}}) {
        const SamplingDistribution dist(Design(u, K));
        for (double p : {0.0, 0.1, 0.3, 0.55, 1.0}) {
            for (int m = u; m <= K; ++m) {
                CHECK(dist.pmf(m, u, p) == doctest::Approx(nb_pmf(u, m, p)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("normalization") {
    for (auto [u, K] : {std::pair{1, 1}, {3, 4}, {4, 9}, {6, 22}, {10, 49}, {22, 72}, {34, 83},
                        {21, 47}}) {
        const SamplingDistribution dist(Design(u, K));
        for (int i = 0; i <= 20; ++i) {
            const double p = i / 20.0;
            double t = 0.0;
            for (double f : dist.pmf_vector(p)) t += f;
            CHECK(std::abs(t - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("efficacy marginal equals the operating characteristic") {
    const Hypotheses hyp{0.1, 0.35, 0.025, 0.2};
    for (auto [u, K] : {std::pair{4, 9}, {6, 22}, {10, 49}}) {
        const SamplingDistribution dist(Design(u, K));
        const auto oc = operating_characteristics(u, K, hyp);
        CHECK(dist.exact_power(hyp.p0) == doctest::Approx(oc.alpha_actual).epsilon(1e-12));
        CHECK(dist.exact_power(hyp.p1) == doctest::Approx(oc.power).epsilon(1e-12));
    }
}

TEST_CASE("DP agrees with enumeration for every small design") {
    for (int u = 1; u <= 6; ++u) {
        for (int K = u; K <= 14; ++K) {
            const SamplingDistribution dist(Design(u, K));
            for (double p : {0.1, 0.3, 0.5, 0.7}) {
                const auto ref = oracle::enumerate(u, K, p);
                for (const auto& o : dist.support()) {
                    const double want = static_cast<double>(ref.at({o.m, o.s}).probability);
                    REQUIRE(std::abs(dist.pmf(o.m, o.s, p) - want) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("library brute force oracle") {
    const Design d(3, 4);
    const auto half = brute_force_oracle(d, 0.5);
    double total = 0.0;
    for (const auto& [key, cell] : half) total += cell.probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(brute_force_oracle(d, 0.1).at({3, 3}).probability ==
          doctest::Approx(nb_pmf(3, 3, 0.1)).epsilon(1e-14));
    CHECK(brute_force_oracle(d, 0.1).at({3, 3}).probability == doctest::Approx(0.001));
    CHECK_THROWS_AS(brute_force_oracle(Design(6, 25), 0.5), SizeError);
    CHECK_NOTHROW(brute_force_oracle(Design(6, 22), 0.5));

    const Design e(4, 11);
    const SamplingDistribution dist(e);
    for (const auto& [key, cell] : brute_force_oracle(e, 0.3)) {
        CHECK(std::abs(cell.probability - dist.pmf(key.first, key.second, 0.3)) < 1e-12);
        CHECK(cell.sequences == dist.outcome(key.first, key.second).path_count *
                                    (std::uint64_t{1} << (11 - key.first)));
    }
}

TEST_CASE("expectations") {
    const SamplingDistribution dist(Design(4, 9));
    CHECK(dist.expected_sample_size(1.0) == doctest::Approx(4.0));
    CHECK(dist.expected_sample_size(0.0) == doctest::Approx(6.0));
    CHECK(std::round(dist.exact_power(0.1) * 1000) / 1000 == doctest::Approx(0.008));
    CHECK(dist.expected_naive_estimate(0.0) == 0.0);
    CHECK(dist.expected_naive_estimate(1.0) == doctest::Approx(1.0));

    // against enumeration
    const auto ref = oracle::enumerate(4, 9, 0.37);
    long double asn = 0.0L;
    for (const auto& [key, c] : ref) asn += key.first * c.probability;
    CHECK(dist.expected_sample_size(0.37) ==
          doctest::Approx(static_cast<double>(asn)).epsilon(1e-13));
}

TEST_CASE("large designs stay finite") {
    const SamplingDistribution dist(Design(150, 700));
    double t = 0.0;
    for (double f : dist.pmf_vector(0.2)) {
        REQUIRE(std::isfinite(f));
        t += f;
    }
    CHECK(t == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(log_bigint(BigInt(1) << 2000) == doctest::Approx(2000 * std::log(2.0)));
}

TEST_CASE("support CSV") {
    const SamplingDistribution dist(Design(3, 4));
    std::ostringstream out;
    const double ps[] = {0.5};
    write_support_csv(out, dist, ps);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "m,s,kind,c_ms,f_0.5");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == static_cast<int>(dist.size()));
}
