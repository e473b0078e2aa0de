#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "curtail/errors.hpp"
#include "curtail/json_io.hpp"
#include "curtail/sampling_dist.hpp"
#include "curtail/sim_harness.hpp"

using namespace curtail;

namespace {

const Hypotheses k055{0.1, 0.55, 0.025, 0.2};
const Hypotheses k035{0.1, 0.35, 0.025, 0.2};

EvalOptions monte_carlo(std::uint64_t reps, std::uint64_t seed = 11, unsigned threads = 1) {
    EvalOptions o;
    o.mode = EvalMode::MonteCarlo;
    o.replications = reps;
    o.seed = seed;
    o.threads = threads;
    return o;
}

bool within(const Measure& mc, double exact, double k) {
    if (mc.se == 0.0) return std::abs(mc.value - exact) < 1e-12;
    return std::abs(mc.value - exact) <= k * mc.se;
}

}  // namespace

TEST_CASE("counter RNG is a pure function of seed, stream and position") {
    CounterRng a(5, 9);
    CounterRng b(5, 9);
    CounterRng c(5, 10);
    CounterRng d(6, 9);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        same_c += x == c.next();
        same_d += x == d.next();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);

    CounterRng u(1, 1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(std::abs(sum / 100000 - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("simulated trials at the degenerate rates") {
    const SamplingDistribution dist(Design(4, 9));
    CounterRng rng(3, 3);
    for (int i = 0; i < 50; ++i) {
        const auto& zero = simulate_trial(dist, 0.0, rng);
        CHECK(zero.m == 6);
        CHECK(zero.s == 0);
        const auto& one = simulate_trial(dist, 1.0, rng);
        CHECK(one.m == 4);
        CHECK(one.s == 4);
    }
}

TEST_CASE("simulated efficacy frequency at 0.55") {
    const SamplingDistribution dist(Design(4, 9));
    const double exact = dist.exact_power(0.55);
    CHECK(std::round(exact * 100) / 100 == doctest::Approx(0.83));
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        CounterRng rng(2024, static_cast<std::uint64_t>(i));
        hits += simulate_trial(dist, 0.55, rng).kind == OutcomeKind::Efficacy;
    }
    const double se = std::sqrt(exact * (1 - exact) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - exact) <= 3 * se);
}

TEST_CASE("standard scenario grid") {
    const auto g = ScenarioGrid::standard();
    CHECK(g.p_true.size() == 12);
    CHECK(g.p_true.front() == doctest::Approx(0.05));
    CHECK(g.p_true.back() == doctest::Approx(0.6));
    CHECK(g.hypothesis_pairs.size() == 12);
    CHECK(g.hypothesis_pairs.front() == std::pair{0.1, 0.25});
    CHECK(g.hypothesis_pairs.back() == std::pair{0.3, 0.5});
}

TEST_CASE("exact ASN shape") {
    const auto g = ScenarioGrid::standard();
    for (const auto& [p0, p1] : g.hypothesis_pairs) {
        const auto d = proposed_design({p0, p1, 0.025, 0.2});
        const auto rows = evaluate_oc(d, g.p_true);
        REQUIRE(rows.size() == g.p_true.size());
        double peak = 0.0;
        for (const auto& r : rows) peak = std::max(peak, r.asn.value);
        // beyond p1 the ASN falls with p
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i - 1].p_true >= p1 - 1e-9) CHECK(rows[i].asn.value < rows[i - 1].asn.value);
        }
        // curtailment pulls the ASN down again at small p
        CHECK(rows.front().asn.value < peak);
    }
}

TEST_CASE("exact and Monte Carlo operating characteristics agree") {
    const double ps[] = {0.3};
    const auto d = DesignUnderTest{"Proposed", k055, Design(4, 9)};
    const auto exact = evaluate_oc(d, ps);
    const auto mc = evaluate_oc(d, ps, monte_carlo(100000));
    CHECK(within(mc[0].asn, exact[0].asn.value, 3));
    CHECK(within(mc[0].power, exact[0].power.value, 3));

    // the comparators too
    for (const auto& b : benchmark_designs(k035)) {
        const double grid[] = {0.1, 0.35};
        const auto e = evaluate_oc(b, grid);
        const auto m = evaluate_oc(b, grid, monte_carlo(20000));
        for (std::size_t i = 0; i < e.size(); ++i) {
            CAPTURE(b.label);
            CHECK(within(m[i].asn, e[i].asn.value, 4));
            CHECK(within(m[i].power, e[i].power.value, 4));
        }
    }
}

TEST_CASE("exact rows ignore the seed; Monte Carlo rows are reproducible") {
    const auto d = proposed_design(k035);
    const auto g = ScenarioGrid::standard();
    EvalOptions a;
    a.seed = 1;
    EvalOptions b;
    b.seed = 2;
    CHECK(evaluate_oc(d, g.p_true, a) == evaluate_oc(d, g.p_true, b));

    const auto m1 = evaluate_oc(d, g.p_true, monte_carlo(5000, 77, 1));
    const auto m2 = evaluate_oc(d, g.p_true, monte_carlo(5000, 77, 4));
    CHECK(m1 == m2);
    CHECK(format_results(m1, ResultFormat::CSV) == format_results(m2, ResultFormat::CSV));
    const auto m3 = evaluate_oc(d, g.p_true, monte_carlo(5000, 78, 1));
    CHECK_FALSE(m1 == m3);
    for (const auto& r : m1) CHECK(r.seed == 77);
}

TEST_CASE("estimation performance: exact against Monte Carlo") {
    for (auto [u, K] : {std::pair{4, 9}, {6, 22}}) {
        const DesignUnderTest d{"Proposed", k035, Design(u, K)};
        const double ps[] = {0.1, 0.35};
        EvalOptions exact;
        exact.grid_step = 1e-3;
        auto mc = monte_carlo(20000, 5, 2);
        mc.grid_step = 1e-3;
        const auto e = evaluate_estimation(d, ps, exact);
        const auto m = evaluate_estimation(d, ps, mc);
        for (std::size_t i = 0; i < e.size(); ++i) {
            CHECK(within(m[i].power, e[i].power.value, 4));
            CHECK(within(m[i].asn, e[i].asn.value, 4));
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(within((*m[i].estimators)[k].bias, (*e[i].estimators)[k].bias.value, 4));
                CHECK(within((*m[i].estimators)[k].rmse, (*e[i].estimators)[k].rmse.value, 4));
            }
            for (std::size_t k = 0; k < 5; ++k) {
                CHECK(within((*m[i].intervals)[k].coverage, (*e[i].intervals)[k].coverage.value,
                             4));
                CHECK(within((*m[i].intervals)[k].length, (*e[i].intervals)[k].length.value, 4));
            }
        }
    }
}

TEST_CASE("exact estimation performance on design(4,9)") {
    const DesignUnderTest d{"Proposed", k055, Design(4, 9)};
    const auto g = ScenarioGrid::standard();
    const auto rows = evaluate_estimation(d, g.p_true);
    REQUIRE(rows.size() == g.p_true.size());
    double sum_adj = 0.0;
    double sum_naive = 0.0;
    for (const auto& r : rows) {
        CAPTURE(r.p_true);
        const auto& est = *r.estimators;
        sum_adj += std::abs(est[1].bias.value);
        sum_naive += std::abs(est[0].bias.value);
        const auto& ivs = *r.intervals;
        CHECK(ivs[0].coverage.value >= 0.95);  // CP
        CHECK(ivs[1].coverage.value >= 0.95);  // JT
        CHECK(ivs[2].coverage.value >= 0.92);  // mid-p CP
        CHECK(ivs[3].coverage.value >= 0.92);  // mid-p JT
        CHECK(ivs[4].coverage.value >= 0.95);  // DufSat
    }
    CHECK(sum_adj <= sum_naive);
    CHECK_THROWS_AS(evaluate_estimation(benchmark_designs(k055)[1], g.p_true), DomainError);
}

TEST_CASE("grid evaluation keeps every row") {
    auto g = ScenarioGrid::standard();
    g.hypothesis_pairs.resize(3);
    const auto rows = evaluate_oc(g);
    CHECK(rows.size() == 3 * 4 * g.p_true.size());
    std::set<std::tuple<std::string, double, double, double>> keys;
    for (const auto& r : rows) keys.insert({r.design, r.p0, r.p1, r.p_true});
    CHECK(keys.size() == rows.size());
}

TEST_CASE("CSV round trip") {
    const auto oc = evaluate_oc(benchmark_designs(k035)[2], ScenarioGrid::standard().p_true,
                                monte_carlo(2000, 3));
    CHECK(parse_results_csv(format_results(oc, ResultFormat::CSV)) == oc);

    const double ps[] = {0.2, 0.4};
    EvalOptions o;
    o.grid_step = 1e-2;
    const auto est = evaluate_estimation(proposed_design(k035), ps, o);
    CHECK(parse_results_csv(format_results(est, ResultFormat::CSV)) == est);

    CHECK_THROWS_AS(parse_results_csv("nope\n"), DomainError);
}

TEST_CASE("emitting results") {
    std::vector<PerformanceRow> none;
    CHECK_THROWS_AS(format_results(none, ResultFormat::CSV), DomainError);
    CHECK_THROWS_AS(emit_results(none, ResultFormat::CSV, "unused.csv"), DomainError);

    const auto rows = evaluate_oc(proposed_design(k035), ScenarioGrid::standard().p_true);
    const auto dir = std::filesystem::temp_directory_path() / "curtail_sim_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "rows.csv";
    emit_results(rows, ResultFormat::CSV, path);
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(parse_results_csv(text.str()) == rows);
    CHECK_THROWS_AS(emit_results(rows, ResultFormat::CSV, dir / "missing" / "rows.csv"),
                    std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("plot JSON carries one series per benchmark design") {
    std::vector<PerformanceRow> rows;
    for (const auto& d : benchmark_designs(k035)) {
        auto part = evaluate_oc(d, ScenarioGrid::standard().p_true);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    const auto doc = json::parse(format_results(rows, ResultFormat::PlotJSON));
    CHECK(doc.at("schema") == std::string(kPlotSchema));
    REQUIRE(doc.at("panels").size() == 1);
    const auto& panel = doc.at("panels")[0];
    CHECK(panel.at("p0") == 0.1);
    CHECK(panel.at("p1") == 0.35);
    std::vector<std::string> labels;
    for (const auto& s : panel.at("series")) {
        labels.push_back(s.at("design"));
        CHECK(s.at("p_true").size() == 12);
        CHECK(s.at("power").size() == 12);
        CHECK(s.at("asn").size() == 12);
    }
    CHECK(labels == std::vector<std::string>{"Proposed", "Fixed", "Minimax", "Optimal"});
}

TEST_CASE("power at or beyond p1 for every benchmark design") {
    const auto g = ScenarioGrid::standard();
    for (const auto& [p0, p1] : g.hypothesis_pairs) {
        for (const auto& d : benchmark_designs({p0, p1, 0.025, 0.2})) {
            for (const auto& r : evaluate_oc(d, g.p_true)) {
                if (r.p_true >= p1 - 1e-9) {
                    CAPTURE(d.label);
                    CAPTURE(r.p_true);
                    CHECK(r.power.value >= 0.8);
                }
                if (std::abs(r.p_true - p0) < 1e-9) CHECK(r.power.value <= 0.025);
            }
        }
    }
}
