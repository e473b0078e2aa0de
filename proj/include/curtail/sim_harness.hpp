#pragma once

// Operating characteristics and estimator performance over a scenario grid,
// by exact summation over the terminal support or by Monte Carlo.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "curtail/comparators.hpp"
#include "curtail/exact_core.hpp"
#include "curtail/sampling_dist.hpp"

namespace curtail {

// SplitMix64 keyed by (seed, stream). Every (scenario, replication) pair owns
// a stream, so results do not depend on how replications are scheduled.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    double uniform();  // [0, 1)
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

struct ScenarioGrid {
    std::vector<double> p_true;
    std::vector<std::pair<double, double>> hypothesis_pairs;
    double alpha = 0.025;
    double power = 0.8;

    // p = 0.05..0.60 by 0.05 and the twelve (p0, p1) pairs with
    // p0 in {0.1, 0.2, 0.3}, p1 in {0.25..0.5}, p1 - p0 >= 0.15.
    static ScenarioGrid standard();
};

enum class EvalMode { Exact, MonteCarlo };

std::string_view to_string(EvalMode m);

struct EvalOptions {
    EvalMode mode = EvalMode::Exact;
    std::uint64_t replications = 0;  // 0: 100000 for OC, 10000 for estimation
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    double grid_step = 1e-4;  // MUE and Duffy-Santner grid
};

inline constexpr std::uint64_t kDefaultOcReplications = 100000;
inline constexpr std::uint64_t kDefaultEstimationReplications = 10000;

struct DesignUnderTest {
    std::string label;  // Proposed, Fixed, Minimax, Optimal
    Hypotheses hyp;
    std::variant<Design, FixedDesign, SimonDesign> design;

    int max_n() const;
};

// Proposed, Fixed, Minimax and Optimal designs for one hypothesis pair.
std::vector<DesignUnderTest> benchmark_designs(const Hypotheses& hyp);

DesignUnderTest proposed_design(const Hypotheses& hyp);

// Standard errors are zero in exact mode.
struct Measure {
    double value = 0.0;
    double se = 0.0;

    friend bool operator==(const Measure&, const Measure&) = default;
};

struct EstimatorPerformance {
    Measure bias;
    Measure rmse;

    friend bool operator==(const EstimatorPerformance&, const EstimatorPerformance&) = default;
};

struct IntervalPerformance {
    Measure coverage;
    Measure length;

    friend bool operator==(const IntervalPerformance&, const IntervalPerformance&) = default;
};

inline constexpr std::array<std::string_view, 3> kEstimatorNames{"naive", "adjusted", "mue"};

struct PerformanceRow {
    std::string design;
    double p0 = 0.0;
    double p1 = 0.0;
    double p_true = 0.0;
    int max_n = 0;
    EvalMode mode = EvalMode::Exact;
    std::uint64_t replications = 0;
    std::uint64_t seed = 0;
    Measure power;
    Measure asn;
    // Present on estimation rows: naive, bias-adjusted (plug-in), MUE (stage-wise).
    std::optional<std::array<EstimatorPerformance, 3>> estimators;
    // Present on estimation rows, in kAllIntervalMethods order.
    std::optional<std::array<IntervalPerformance, 5>> intervals;

    friend bool operator==(const PerformanceRow&, const PerformanceRow&) = default;
};

// Draw patients until classify_state stops the trial.
const TerminalOutcome& simulate_trial(const SamplingDistribution& dist, double p, CounterRng& rng);

std::vector<PerformanceRow> evaluate_oc(const DesignUnderTest& design,
                                        std::span<const double> p_true,
                                        const EvalOptions& options = {});

// Every benchmark design for every hypothesis pair and p in the grid.
std::vector<PerformanceRow> evaluate_oc(const ScenarioGrid& grid, const EvalOptions& options = {});

// Bias/RMSE of the three estimators and coverage/length of the five interval
// methods for a proposed design; intervals are two-sided 1 - 2 alpha.
std::vector<PerformanceRow> evaluate_estimation(const DesignUnderTest& design,
                                                std::span<const double> p_true,
                                                const EvalOptions& options = {});

std::vector<PerformanceRow> evaluate_estimation(const ScenarioGrid& grid,
                                                const EvalOptions& options = {});

enum class ResultFormat { CSV, PlotJSON };

inline constexpr std::string_view kPlotSchema = "curtail.plot/1";

std::string format_results(std::span<const PerformanceRow> rows, ResultFormat format);
std::vector<PerformanceRow> parse_results_csv(std::string_view csv);

// Writes format_results to `path`; throws std::runtime_error naming the path
// on I/O failure and DomainError on empty input.
void emit_results(std::span<const PerformanceRow> rows, ResultFormat format,
                  const std::filesystem::path& path);

}  // namespace curtail
