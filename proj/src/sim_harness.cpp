#include "curtail/sim_harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "curtail/errors.hpp"
#include "curtail/estimation.hpp"
#include "curtail/intervals.hpp"

namespace curtail {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t scenario_key(const DesignUnderTest& d, double p_true) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "|%.6g|%.6g|%.6g", d.hyp.p0, d.hyp.p1, p_true);
    return mix64(fnv1a(d.label + buf));
}

// Run fn(i) for i in [0, n), split into contiguous blocks across threads.
template <typename Fn>
void parallel_for(std::uint64_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1U, threads);
    if (threads == 1 || n < 1024) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    const std::uint64_t block = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t lo = t * block;
        const std::uint64_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::uint64_t i = lo; i < hi; ++i) fn(i);
        });
    }
}

// Running sums for a sample mean and its standard error.
struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
    double se() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - n * m * m) / static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

Measure proportion(const Moments& m) {
    const double v = m.mean();
    return {v, m.n == 0 ? 0.0 : std::sqrt(v * (1.0 - v) / static_cast<double>(m.n))};
}

Measure mean_of(const Moments& m) { return {m.mean(), m.se()}; }

PerformanceRow row_header(const DesignUnderTest& d, double p, const EvalOptions& options,
                          std::uint64_t replications) {
    PerformanceRow row;
    row.design = d.label;
    row.p0 = d.hyp.p0;
    row.p1 = d.hyp.p1;
    row.p_true = p;
    row.max_n = d.max_n();
    row.mode = options.mode;
    if (options.mode == EvalMode::MonteCarlo) {
        row.replications = replications;
        row.seed = options.seed;
    }
    return row;
}

// Terminal enrolment and decision of one simulated comparator trial.
struct SimulatedTrial {
    int enrolled = 0;
    bool rejected = false;
};

SimulatedTrial simulate_fixed(const FixedDesign& d, double p, CounterRng& rng) {
    int responders = 0;
    for (int i = 0; i < d.n; ++i) responders += rng.bernoulli(p) ? 1 : 0;
    return {d.n, responders >= d.r};
}

SimulatedTrial simulate_simon(const SimonDesign& d, double p, CounterRng& rng) {
    int responders = 0;
    for (int i = 0; i < d.n1; ++i) responders += rng.bernoulli(p) ? 1 : 0;
    if (responders <= d.r1) return {d.n1, false};
    for (int i = d.n1; i < d.n; ++i) responders += rng.bernoulli(p) ? 1 : 0;
    return {d.n, responders > d.r};
}

// Estimator values and intervals at every support point of a design.
struct OutcomeTable {
    std::vector<std::array<double, 3>> estimates;
    std::vector<std::array<ConfidenceInterval, 5>> intervals;
};

OutcomeTable tabulate(const SamplingDistribution& dist, double alpha, double step) {
    const AcceptanceRegions regions(dist, alpha, step);
    OutcomeTable t;
    for (const auto& o : dist.support()) {
        const auto mue = median_unbiased_estimate(dist, o.m, o.s, Ordering::StageWise, step);
        t.estimates.push_back({naive_estimate(o.m, o.s),
                               bias_adjusted_estimate(dist, o.m, o.s, BiasMode::PlugIn),
                               mue.estimate});
        const auto ivs = all_intervals(dist, o.m, o.s, alpha, &regions);
        std::array<ConfidenceInterval, 5> arr;
        std::copy(ivs.begin(), ivs.end(), arr.begin());
        t.intervals.push_back(arr);
    }
    return t;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> csv_columns() {
    std::vector<std::string> cols{"design", "p0",   "p1",       "p_true", "max_n",
                                  "mode",   "replications", "seed", "power",  "power_se",
                                  "asn",    "asn_se"};
    for (auto name : kEstimatorNames) {
        const std::string n(name);
        for (const char* suffix : {"_bias", "_bias_se", "_rmse", "_rmse_se"}) cols.push_back(n + suffix);
    }
    for (auto method : kAllIntervalMethods) {
        std::string n(to_string(method));
        std::replace(n.begin(), n.end(), '-', '_');
        std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
        for (const char* prefix : {"cov_", "len_"}) {
            cols.push_back(prefix + n);
            cols.push_back(prefix + n + "_se");
        }
    }
    return cols;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw DomainError("bad number in results CSV: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw DomainError("bad integer in results CSV: '" + s + "'");
    }
    return v;
}

nlohmann::json plot_json(std::span<const PerformanceRow> rows) {
    using nlohmann::json;
    // Panels keyed by hypothesis pair, series by design label, both in order
    // of first appearance.
    std::vector<std::pair<std::pair<double, double>, std::vector<std::string>>> panels;
    std::map<std::pair<std::pair<double, double>, std::string>, std::vector<const PerformanceRow*>>
        series;
    for (const auto& r : rows) {
        const std::pair key{r.p0, r.p1};
        auto it = std::find_if(panels.begin(), panels.end(),
                               [&](const auto& pnl) { return pnl.first == key; });
        if (it == panels.end()) {
            panels.push_back({key, {}});
            it = std::prev(panels.end());
        }
        if (std::find(it->second.begin(), it->second.end(), r.design) == it->second.end()) {
            it->second.push_back(r.design);
        }
        series[{key, r.design}].push_back(&r);
    }

    json doc;
    doc["schema"] = kPlotSchema;
    doc["panels"] = json::array();
    for (const auto& [key, labels] : panels) {
        json panel;
        panel["p0"] = key.first;
        panel["p1"] = key.second;
        panel["series"] = json::array();
        for (const auto& label : labels) {
            const auto& pts = series.at({key, label});
            json s;
            s["design"] = label;
            s["mode"] = to_string(pts.front()->mode);
            s["max_n"] = pts.front()->max_n;
            for (const auto* r : pts) {
                s["p_true"].push_back(r->p_true);
                s["power"].push_back(r->power.value);
                s["asn"].push_back(r->asn.value);
                if (r->estimators) {
                    for (std::size_t e = 0; e < kEstimatorNames.size(); ++e) {
                        const std::string name(kEstimatorNames[e]);
                        s["bias"][name].push_back((*r->estimators)[e].bias.value);
                        s["rmse"][name].push_back((*r->estimators)[e].rmse.value);
                    }
                }
                if (r->intervals) {
                    for (std::size_t m = 0; m < kAllIntervalMethods.size(); ++m) {
                        const std::string name(to_string(kAllIntervalMethods[m]));
                        s["coverage"][name].push_back((*r->intervals)[m].coverage.value);
                        s["length"][name].push_back((*r->intervals)[m].length.value);
                    }
                }
            }
            panel["series"].push_back(std::move(s));
        }
        doc["panels"].push_back(std::move(panel));
    }
    return doc;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t CounterRng::next() {
    state_ += kGolden;
    return mix64(state_);
}

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

ScenarioGrid ScenarioGrid::standard() {
    ScenarioGrid g;
    for (int i = 1; i <= 12; ++i) g.p_true.push_back(i / 20.0);
    for (int i = 1; i <= 3; ++i) {
        for (int j = 5; j <= 10; ++j) {
            const double p0 = i / 10.0;
            const double p1 = j / 20.0;
            if (p1 - p0 >= 0.15 - 1e-9) g.hypothesis_pairs.emplace_back(p0, p1);
        }
    }
    return g;
}

std::string_view to_string(EvalMode m) { return m == EvalMode::Exact ? "exact" : "monte_carlo"; }

int DesignUnderTest::max_n() const {
    return std::visit(
        [](const auto& d) -> int {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Design>) {
                return d.max_n();
            } else {
                return d.n;
            }
        },
        design);
}

DesignUnderTest proposed_design(const Hypotheses& hyp) {
    return {"Proposed", hyp, search_design(hyp).design};
}

std::vector<DesignUnderTest> benchmark_designs(const Hypotheses& hyp) {
    return {proposed_design(hyp),
            {"Fixed", hyp, fixed_exact_design(hyp)},
            {"Minimax", hyp, simon_search(hyp, SimonCriterion::Minimax)},
            {"Optimal", hyp, simon_search(hyp, SimonCriterion::Optimal)}};
}

const TerminalOutcome& simulate_trial(const SamplingDistribution& dist, double p, CounterRng& rng) {
    const auto& design = dist.design();
    int s = 0;
    for (int k = 1; k <= design.max_n(); ++k) {
        s += rng.bernoulli(p) ? 1 : 0;
        if (classify_state(design, k, s) != StageDecision::Continue) return dist.outcome(k, s);
    }
    throw std::logic_error("trial ran past K without stopping");
}

std::vector<PerformanceRow> evaluate_oc(const DesignUnderTest& d, std::span<const double> p_true,
                                        const EvalOptions& options) {
    const std::uint64_t reps =
        options.replications > 0 ? options.replications : kDefaultOcReplications;
    std::optional<SamplingDistribution> dist;
    if (const auto* design = std::get_if<Design>(&d.design)) dist.emplace(*design);

    std::vector<PerformanceRow> rows;
    for (double p : p_true) {
        auto row = row_header(d, p, options, reps);
        if (options.mode == EvalMode::Exact) {
            if (dist) {
                row.power = {dist->exact_power(p), 0.0};
                row.asn = {dist->expected_sample_size(p), 0.0};
            } else if (const auto* f = std::get_if<FixedDesign>(&d.design)) {
                const auto c = fixed_characteristics(*f, p);
                row.power = {c.power, 0.0};
                row.asn = {c.asn, 0.0};
            } else {
                const auto c = simon_characteristics(std::get<SimonDesign>(d.design), p);
                row.power = {c.power, 0.0};
                row.asn = {c.asn, 0.0};
            }
        } else {
            const std::uint64_t key = scenario_key(d, p);
            std::vector<SimulatedTrial> trials(reps);
            parallel_for(reps, options.threads, [&](std::uint64_t i) {
                CounterRng rng(options.seed, key + i);
                if (dist) {
                    const auto& o = simulate_trial(*dist, p, rng);
                    trials[i] = {o.m, o.kind == OutcomeKind::Efficacy};
                } else if (const auto* f = std::get_if<FixedDesign>(&d.design)) {
                    trials[i] = simulate_fixed(*f, p, rng);
                } else {
                    trials[i] = simulate_simon(std::get<SimonDesign>(d.design), p, rng);
                }
            });
            Moments power;
            Moments asn;
            for (const auto& t : trials) {
                power.add(t.rejected ? 1.0 : 0.0);
                asn.add(t.enrolled);
            }
            row.power = proportion(power);
            row.asn = mean_of(asn);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PerformanceRow> evaluate_oc(const ScenarioGrid& grid, const EvalOptions& options) {
    std::vector<PerformanceRow> rows;
    for (const auto& [p0, p1] : grid.hypothesis_pairs) {
        const Hypotheses hyp{p0, p1, grid.alpha, 1.0 - grid.power};
        for (const auto& d : benchmark_designs(hyp)) {
            auto part = evaluate_oc(d, grid.p_true, options);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    }
    return rows;
}

std::vector<PerformanceRow> evaluate_estimation(const DesignUnderTest& d,
                                                std::span<const double> p_true,
                                                const EvalOptions& options) {
    const auto* design = std::get_if<Design>(&d.design);
    if (design == nullptr) {
        throw DomainError("estimation performance is defined for the sequential design only");
    }
    const std::uint64_t reps =
        options.replications > 0 ? options.replications : kDefaultEstimationReplications;
    const SamplingDistribution dist(*design);
    const auto table = tabulate(dist, d.hyp.alpha, options.grid_step);

    std::vector<PerformanceRow> rows;
    for (double p : p_true) {
        auto row = row_header(d, p, options, reps);
        std::array<EstimatorPerformance, 3> est{};
        std::array<IntervalPerformance, 5> ivs{};

        if (options.mode == EvalMode::Exact) {
            const auto f = dist.pmf_vector(p);
            std::array<double, 3> bias{};
            std::array<double, 3> mse{};
            std::array<double, 5> cov{};
            std::array<double, 5> len{};
            double power = 0.0;
            double asn = 0.0;
            for (std::size_t r = 0; r < dist.size(); ++r) {
                if (f[r] == 0.0) continue;
                for (std::size_t e = 0; e < 3; ++e) {
                    const double err = table.estimates[r][e] - p;
                    bias[e] += f[r] * err;
                    mse[e] += f[r] * err * err;
                }
                for (std::size_t m = 0; m < 5; ++m) {
                    const auto& ci = table.intervals[r][m];
                    if (ci.contains(p)) cov[m] += f[r];
                    len[m] += f[r] * ci.length();
                }
                if (dist.support()[r].kind == OutcomeKind::Efficacy) power += f[r];
                asn += f[r] * dist.support()[r].m;
            }
            for (std::size_t e = 0; e < 3; ++e) {
                est[e] = {{bias[e], 0.0}, {std::sqrt(mse[e]), 0.0}};
            }
            for (std::size_t m = 0; m < 5; ++m) ivs[m] = {{cov[m], 0.0}, {len[m], 0.0}};
            row.power = {power, 0.0};
            row.asn = {asn, 0.0};
        } else {
            const std::uint64_t key = scenario_key(d, p);
            std::vector<std::size_t> ranks(reps);
            parallel_for(reps, options.threads, [&](std::uint64_t i) {
                CounterRng rng(options.seed, key + i);
                const auto& o = simulate_trial(dist, p, rng);
                ranks[i] = dist.rank(o.m, o.s);
            });
            std::array<Moments, 3> err;
            std::array<Moments, 3> sq;
            std::array<Moments, 5> cov;
            std::array<Moments, 5> len;
            Moments power;
            Moments asn;
            for (const auto r : ranks) {
                for (std::size_t e = 0; e < 3; ++e) {
                    const double x = table.estimates[r][e] - p;
                    err[e].add(x);
                    sq[e].add(x * x);
                }
                for (std::size_t m = 0; m < 5; ++m) {
                    const auto& ci = table.intervals[r][m];
                    cov[m].add(ci.contains(p) ? 1.0 : 0.0);
                    len[m].add(ci.length());
                }
                power.add(dist.support()[r].kind == OutcomeKind::Efficacy ? 1.0 : 0.0);
                asn.add(dist.support()[r].m);
            }
            for (std::size_t e = 0; e < 3; ++e) {
                const double rmse = std::sqrt(sq[e].mean());
                // Delta method: se(sqrt(X)) = se(X) / (2 sqrt(X)).
                const double rmse_se = rmse > 0.0 ? sq[e].se() / (2.0 * rmse) : 0.0;
                est[e] = {mean_of(err[e]), {rmse, rmse_se}};
            }
            for (std::size_t m = 0; m < 5; ++m) ivs[m] = {proportion(cov[m]), mean_of(len[m])};
            row.power = proportion(power);
            row.asn = mean_of(asn);
        }
        row.estimators = est;
        row.intervals = ivs;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PerformanceRow> evaluate_estimation(const ScenarioGrid& grid,
                                                const EvalOptions& options) {
    std::vector<PerformanceRow> rows;
    for (const auto& [p0, p1] : grid.hypothesis_pairs) {
        const Hypotheses hyp{p0, p1, grid.alpha, 1.0 - grid.power};
        auto part = evaluate_estimation(proposed_design(hyp), grid.p_true, options);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::string format_results(std::span<const PerformanceRow> rows, ResultFormat format) {
    if (rows.empty()) throw DomainError("no result rows to emit");
    if (format == ResultFormat::PlotJSON) return plot_json(rows).dump(2) + "\n";

    std::ostringstream out;
    const auto cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : rows) {
        out << r.design << ',' << fmt_double(r.p0) << ',' << fmt_double(r.p1) << ','
            << fmt_double(r.p_true) << ',' << r.max_n << ',' << to_string(r.mode) << ','
            << r.replications << ',' << r.seed << ',' << fmt_double(r.power.value) << ','
            << fmt_double(r.power.se) << ',' << fmt_double(r.asn.value) << ','
            << fmt_double(r.asn.se);
        for (std::size_t e = 0; e < 3; ++e) {
            if (r.estimators) {
                const auto& x = (*r.estimators)[e];
                out << ',' << fmt_double(x.bias.value) << ',' << fmt_double(x.bias.se) << ','
                    << fmt_double(x.rmse.value) << ',' << fmt_double(x.rmse.se);
            } else {
                out << ",,,,";
            }
        }
        for (std::size_t m = 0; m < 5; ++m) {
            if (r.intervals) {
                const auto& x = (*r.intervals)[m];
                out << ',' << fmt_double(x.coverage.value) << ',' << fmt_double(x.coverage.se)
                    << ',' << fmt_double(x.length.value) << ',' << fmt_double(x.length.se);
            } else {
                out << ",,,,";
            }
        }
        out << '\n';
    }
    return out.str();
}

std::vector<PerformanceRow> parse_results_csv(std::string_view csv) {
    std::vector<PerformanceRow> rows;
    const auto cols = csv_columns();
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || split_line(line) != cols) {
        throw DomainError("results CSV header does not match the expected columns");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() != cols.size()) throw DomainError("results CSV row has wrong field count");
        PerformanceRow r;
        r.design = f[0];
        r.p0 = parse_double(f[1]);
        r.p1 = parse_double(f[2]);
        r.p_true = parse_double(f[3]);
        r.max_n = static_cast<int>(parse_u64(f[4]));
        if (f[5] == "exact") {
            r.mode = EvalMode::Exact;
        } else if (f[5] == "monte_carlo") {
            r.mode = EvalMode::MonteCarlo;
        } else {
            throw DomainError("unknown evaluation mode '" + f[5] + "'");
        }
        r.replications = parse_u64(f[6]);
        r.seed = parse_u64(f[7]);
        r.power = {parse_double(f[8]), parse_double(f[9])};
        r.asn = {parse_double(f[10]), parse_double(f[11])};
        std::size_t i = 12;
        if (!f[i].empty()) {
            std::array<EstimatorPerformance, 3> est{};
            for (auto& x : est) {
                x = {{parse_double(f[i]), parse_double(f[i + 1])},
                     {parse_double(f[i + 2]), parse_double(f[i + 3])}};
                i += 4;
            }
            r.estimators = est;
        } else {
            i += 12;
        }
        if (!f[i].empty()) {
            std::array<IntervalPerformance, 5> ivs{};
            for (auto& x : ivs) {
                x = {{parse_double(f[i]), parse_double(f[i + 1])},
                     {parse_double(f[i + 2]), parse_double(f[i + 3])}};
                i += 4;
            }
            r.intervals = ivs;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_results(std::span<const PerformanceRow> rows, ResultFormat format,
                  const std::filesystem::path& path) {
    const auto text = format_results(rows, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace curtail
