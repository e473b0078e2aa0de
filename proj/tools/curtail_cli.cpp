// curtail: command-line front end.
//
// Exit codes: 0 success, 2 invalid input or usage, 1 anything else.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "curtail/comparators.hpp"
#include "curtail/errors.hpp"
#include "curtail/estimation.hpp"
#include "curtail/exact_core.hpp"
#include "curtail/http_api.hpp"
#include "curtail/intervals.hpp"
#include "curtail/json_io.hpp"
#include "curtail/sampling_dist.hpp"
#include "curtail/sim_harness.hpp"
#include "curtail/trial_service.hpp"

using namespace curtail;

namespace {

enum class Format { Table, Json, Csv };

struct HypothesisFlags {
    std::optional<double> p0;
    std::optional<double> p1;
    double alpha = 0.025;
    double beta = 0.2;
    std::optional<int> u;
    std::optional<int> max_n;

    bool has_pair() const { return p0 && p1; }

    Hypotheses hypotheses() const {
        if (!has_pair()) throw DomainError("--p0 and --p1 are required");
        Hypotheses hyp{*p0, *p1, alpha, beta};
        hyp.validate();
        return hyp;
    }

    // Explicit --u/--K, otherwise the searched design.
    Design design() const {
        if (u.has_value() != max_n.has_value()) throw DomainError("--u and --K go together");
        if (u) return Design(*u, *max_n);
        if (!has_pair()) throw DomainError("give --p0 and --p1, or --u and --K");
        return search_design(hypotheses()).design;
    }
};

void add_hypothesis_flags(CLI::App* cmd, HypothesisFlags& f, bool allow_design) {
    cmd->add_option("--p0", f.p0, "Null response rate");
    cmd->add_option("--p1", f.p1, "Alternative response rate");
    cmd->add_option("--alpha", f.alpha, "One-sided type I level")->capture_default_str();
    cmd->add_option("--beta", f.beta, "Type II level")->capture_default_str();
    if (allow_design) {
        cmd->add_option("--u", f.u, "Efficacy threshold (skips the search)");
        cmd->add_option("--K", f.max_n, "Maximum sample size (with --u)");
    }
}

void add_format_flag(CLI::App* cmd, Format& fmt) {
    cmd->add_option("--format", fmt, "Output format")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Format>{
                {"table", Format::Table}, {"json", Format::Json}, {"csv", Format::Csv}},
            CLI::ignore_case)
                       .description(""))
        ->type_name("table|json|csv");
}

std::string num(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string full(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Left-aligned columns separated by two spaces.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        width.resize(std::max(width.size(), r.size()));
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) {
            line += r[i];
            if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
        }
        out << line << '\n';
    }
}

void print_csv(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }
}

std::string join_ints(const std::vector<int>& v, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
    return s;
}

// ---- design ---------------------------------------------------------------

void run_design(const HypothesisFlags& f, Format fmt) {
    const auto hyp = f.hypotheses();
    const auto result = search_design(hyp);
    const auto doc = design_search_document(hyp, result);
    if (fmt == Format::Json) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    if (fmt == Format::Csv) {
        print_csv(std::cout, {{"p0", "p1", "alpha", "beta", "u", "K", "alpha_actual", "power",
                               "K_alpha_max", "feasible_K"},
                              {full(hyp.p0), full(hyp.p1), full(hyp.alpha), full(hyp.beta),
                               std::to_string(result.design.u()),
                               std::to_string(result.design.max_n()),
                               full(result.oc.alpha_actual), full(result.oc.power),
                               std::to_string(result.alpha_max_n),
                               join_ints(result.feasible_max_n, " ")}});
        return;
    }
    print_table(std::cout,
                {{"u", std::to_string(result.design.u())},
                 {"K", std::to_string(result.design.max_n())},
                 {"alpha_actual", num(result.oc.alpha_actual)},
                 {"power", num(result.oc.power)},
                 {"feasible K", join_ints(result.feasible_max_n, " ")},
                 {"K_alpha_max", std::to_string(result.alpha_max_n)},
                 {"first futility stage", std::to_string(result.design.first_futility_stage())}});
}

// ---- boundaries -----------------------------------------------------------

struct BoundaryLayout {
    Design proposed{1, 1};
    std::optional<FixedDesign> fixed;
    std::optional<SimonDesign> minimax;
    std::optional<SimonDesign> optimal;
};

std::optional<int> simon_threshold(const std::optional<SimonDesign>& d, int k) {
    if (!d) return std::nullopt;
    if (k == d->n1) return d->r1;
    if (k == d->n) return d->r;
    return std::nullopt;
}

void run_boundaries(const HypothesisFlags& f, bool proposed_only, Format fmt) {
    BoundaryLayout b;
    b.proposed = f.design();
    if (!proposed_only && f.has_pair()) {
        const auto hyp = f.hypotheses();
        b.fixed = fixed_exact_design(hyp);
        b.minimax = simon_search(hyp, SimonCriterion::Minimax);
        b.optimal = simon_search(hyp, SimonCriterion::Optimal);
    }
    int last = b.proposed.max_n();
    if (b.fixed) last = std::max(last, b.fixed->n);
    if (b.minimax) last = std::max(last, b.minimax->n);
    if (b.optimal) last = std::max(last, b.optimal->n);

    auto opt_json = [](std::optional<int> v) { return v ? json(*v) : json(nullptr); };
    auto opt_str = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string("-"); };

    json stages = json::array();
    std::vector<std::vector<std::string>> rows{{"k", "u", "l_k"}};
    if (b.fixed) rows[0].insert(rows[0].end(), {"fixed", "minimax", "optimal"});
    for (int k = 1; k <= last; ++k) {
        std::optional<int> eff;
        std::optional<int> fut;
        if (k <= b.proposed.max_n()) {
            if (k >= b.proposed.u()) eff = b.proposed.u();
            if (b.proposed.futility_bound(k) >= 0) fut = b.proposed.futility_bound(k);
        }
        std::optional<int> fixed;
        if (b.fixed && k == b.fixed->n) fixed = b.fixed->r;
        const auto mm = simon_threshold(b.minimax, k);
        const auto op = simon_threshold(b.optimal, k);
        if (!eff && !fut && !fixed && !mm && !op) continue;

        json row{{"k", k}, {"efficacy", opt_json(eff)}, {"futility", opt_json(fut)}};
        std::vector<std::string> line{std::to_string(k), opt_str(eff), opt_str(fut)};
        if (b.fixed) {
            row["fixed"] = opt_json(fixed);
            row["minimax"] = opt_json(mm);
            row["optimal"] = opt_json(op);
            line.insert(line.end(), {opt_str(fixed), opt_str(mm), opt_str(op)});
        }
        stages.push_back(std::move(row));
        rows.push_back(std::move(line));
    }

    if (fmt == Format::Json) {
        json doc{{"u", b.proposed.u()}, {"K", b.proposed.max_n()}, {"stages", stages}};
        if (b.fixed) {
            doc["fixed"] = to_json(*b.fixed);
            doc["minimax"] = to_json(*b.minimax);
            doc["optimal"] = to_json(*b.optimal);
        }
        std::cout << doc.dump(2) << '\n';
        return;
    }
    if (fmt == Format::Csv) {
        for (auto& r : rows) {
            for (auto& c : r) {
                if (c == "-") c.clear();
            }
        }
        print_csv(std::cout, rows);
        return;
    }
    std::cout << "proposed: u=" << b.proposed.u() << " K=" << b.proposed.max_n() << '\n';
    if (b.fixed) {
        std::cout << "fixed: r=" << b.fixed->r << " N=" << b.fixed->n << '\n'
                  << "minimax: " << b.minimax->r1 << '/' << b.minimax->n1 << ", " << b.minimax->r
                  << '/' << b.minimax->n << '\n'
                  << "optimal: " << b.optimal->r1 << '/' << b.optimal->n1 << ", " << b.optimal->r
                  << '/' << b.optimal->n << '\n';
    }
    std::cout << '\n';
    print_table(std::cout, rows);
}

// ---- oc / simulate --------------------------------------------------------

struct SimFlags {
    std::string mode = "exact";
    std::uint64_t replications = 0;
    std::uint64_t seed = EvalOptions{}.seed;
    unsigned threads = 1;
    double grid_step = 1e-4;
    std::vector<double> p_true;
    std::string what = "oc";
    std::string output;

    EvalOptions options() const {
        EvalOptions o;
        o.mode = mode == "mc" ? EvalMode::MonteCarlo : EvalMode::Exact;
        o.replications = replications;
        o.seed = seed;
        o.threads = threads;
        o.grid_step = grid_step;
        return o;
    }
};

void add_sim_flags(CLI::App* cmd, SimFlags& s) {
    cmd->add_option("--mode", s.mode, "exact or mc")
        ->check(CLI::IsMember({"exact", "mc"}))
        ->capture_default_str();
    cmd->add_option("--replications", s.replications, "Monte Carlo replications (0: default)");
    cmd->add_option("--seed", s.seed, "Monte Carlo seed")->capture_default_str();
    cmd->add_option("--threads", s.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    cmd->add_option("--grid-step", s.grid_step, "Grid step for the MUE and DufSat grids")
        ->check(CLI::Range(1e-6, 0.1));
    cmd->add_option("--p", s.p_true, "True response rates to evaluate")
        ->check(CLI::Range(0.0, 1.0))
        ->delimiter(',');
}

void print_rows(const std::vector<PerformanceRow>& rows, Format fmt, const std::string& output) {
    if (!output.empty()) {
        emit_results(rows, fmt == Format::Json ? ResultFormat::PlotJSON : ResultFormat::CSV, output);
        return;
    }
    if (fmt == Format::Csv) {
        std::cout << format_results(rows, ResultFormat::CSV);
        return;
    }
    if (fmt == Format::Json) {
        std::cout << format_results(rows, ResultFormat::PlotJSON);
        return;
    }
    std::vector<std::vector<std::string>> t{{"design", "p0", "p1", "p", "K", "power", "ASN"}};
    const bool has_est = !rows.empty() && rows.front().estimators.has_value();
    if (has_est) {
        for (auto n : kEstimatorNames) t[0].push_back(std::string(n) + " bias");
        for (auto m : kAllIntervalMethods) t[0].push_back(std::string(to_string(m)) + " cov");
    }
    for (const auto& r : rows) {
        std::vector<std::string> line{r.design,         num(r.p0, 2),       num(r.p1, 2),
                                      num(r.p_true, 2), std::to_string(r.max_n), num(r.power.value),
                                      num(r.asn.value, 2)};
        if (r.estimators) {
            for (const auto& e : *r.estimators) line.push_back(num(e.bias.value));
        }
        if (r.intervals) {
            for (const auto& i : *r.intervals) line.push_back(num(i.coverage.value));
        }
        t.push_back(std::move(line));
    }
    print_table(std::cout, t);
}

std::vector<double> p_values_or_grid(const SimFlags& s) {
    return s.p_true.empty() ? ScenarioGrid::standard().p_true : s.p_true;
}

void run_oc(const HypothesisFlags& f, const SimFlags& s, bool all_designs, Format fmt) {
    const auto ps = p_values_or_grid(s);
    std::vector<DesignUnderTest> designs;
    if (f.u) {
        Hypotheses hyp{f.p0.value_or(0.0), f.p1.value_or(0.0), f.alpha, f.beta};
        designs.push_back({"Proposed", hyp, f.design()});
    } else if (all_designs) {
        designs = benchmark_designs(f.hypotheses());
    } else {
        designs.push_back(proposed_design(f.hypotheses()));
    }
    std::vector<PerformanceRow> rows;
    for (const auto& d : designs) {
        auto part = evaluate_oc(d, ps, s.options());
        rows.insert(rows.end(), part.begin(), part.end());
    }
    print_rows(rows, fmt, s.output);
}

void run_simulate(const HypothesisFlags& f, const SimFlags& s, Format fmt) {
    std::vector<PerformanceRow> rows;
    if (f.has_pair()) {
        const auto hyp = f.hypotheses();
        const auto ps = p_values_or_grid(s);
        if (s.what == "estimation") {
            rows = evaluate_estimation(proposed_design(hyp), ps, s.options());
        } else {
            for (const auto& d : benchmark_designs(hyp)) {
                auto part = evaluate_oc(d, ps, s.options());
                rows.insert(rows.end(), part.begin(), part.end());
            }
        }
    } else {
        auto grid = ScenarioGrid::standard();
        grid.alpha = f.alpha;
        grid.power = 1.0 - f.beta;
        if (!s.p_true.empty()) grid.p_true = s.p_true;
        rows = s.what == "estimation" ? evaluate_estimation(grid, s.options())
                                      : evaluate_oc(grid, s.options());
    }
    print_rows(rows, fmt, s.output);
}

// ---- estimate -------------------------------------------------------------

struct EstimateFlags {
    int m = 0;
    int s = 0;
    std::string ordering = "stagewise";
    std::string bias = "plug_in";
    std::optional<double> ci_alpha;
};

json estimate_document(const Design& design, int m, int s, Ordering ordering, BiasMode bias,
                       double ci_alpha) {
    const SamplingDistribution dist(design);
    const auto report = estimate(dist, m, s, ordering, bias);
    const auto other = bias == BiasMode::PlugIn ? BiasMode::RootSolve : BiasMode::PlugIn;
    json intervals = json::array();
    for (const auto& ci : all_intervals(dist, m, s, ci_alpha)) intervals.push_back(to_json(ci));
    json doc{{"u", design.u()},
             {"K", design.max_n()},
             {"m", m},
             {"s", s},
             {"estimate", to_json(report)},
             {"intervals", std::move(intervals)}};
    doc["bias_adjusted_" + std::string(to_string(other))] =
        bias_adjusted_estimate(dist, m, s, other);
    return doc;
}

void print_estimate(const json& doc, Format fmt) {
    if (fmt == Format::Json) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    const auto& e = doc.at("estimate");
    std::string other_key;
    for (const auto& [k, v] : doc.items()) {
        if (k.rfind("bias_adjusted_", 0) == 0) other_key = k;
    }
    if (fmt == Format::Csv) {
        std::vector<std::vector<std::string>> rows{{"quantity", "lower", "value", "upper"}};
        rows.push_back({"naive", "", full(e.at("naive")), ""});
        rows.push_back({"bias_adjusted_" + e.at("bias_mode").get<std::string>(), "",
                        full(e.at("bias_adjusted")), ""});
        rows.push_back({other_key, "", full(doc.at(other_key)), ""});
        rows.push_back({"mue_" + e.at("ordering").get<std::string>(), full(e.at("mue_lower")),
                        full(e.at("mue")), full(e.at("mue_upper"))});
        for (const auto& ci : doc.at("intervals")) {
            rows.push_back({ci.at("method").get<std::string>(), full(ci.at("lower")), "",
                            full(ci.at("upper"))});
        }
        print_csv(std::cout, rows);
        return;
    }
    std::cout << "design u=" << doc.at("u") << " K=" << doc.at("K") << ", stopped at m="
              << doc.at("m") << " s=" << doc.at("s") << "\n\n";
    print_table(std::cout,
                {{"naive", num(e.at("naive"))},
                 {"bias adjusted (" + e.at("bias_mode").get<std::string>() + ")",
                  num(e.at("bias_adjusted"))},
                 {"bias adjusted (" + other_key.substr(14) + ")", num(doc.at(other_key))},
                 {"median unbiased (" + e.at("ordering").get<std::string>() + ")",
                  num(e.at("mue"))}});
    std::cout << '\n';
    std::vector<std::vector<std::string>> rows{{"interval", "level", "lower", "upper"}};
    for (const auto& ci : doc.at("intervals")) {
        rows.push_back({ci.at("method").get<std::string>(), num(ci.at("level"), 3),
                        num(ci.at("lower")), num(ci.at("upper"))});
    }
    print_table(std::cout, rows);
}

void run_estimate(const HypothesisFlags& f, const EstimateFlags& e, Format fmt) {
    const auto design = f.design();
    const auto ordering = e.ordering == "stagewise" ? Ordering::StageWise : Ordering::SampleSpace;
    const auto bias = e.bias == "plug_in" ? BiasMode::PlugIn : BiasMode::RootSolve;
    print_estimate(estimate_document(design, e.m, e.s, ordering, bias, e.ci_alpha.value_or(f.alpha)),
                   fmt);
}

// ---- monitor --------------------------------------------------------------

int run_monitor(const HypothesisFlags& f, Format fmt, std::istream& in) {
    const auto design = f.design();
    if (fmt == Format::Table) {
        std::cout << "design u=" << design.u() << " K=" << design.max_n()
                  << "; enter y (responder), n (non-responder), u (undo), q (quit)\n";
    }
    std::vector<bool> outcomes;
    int s = 0;
    std::string token;
    bool header = false;
    while (in >> token) {
        if (token == "q" || token == "quit") break;
        if (token == "u" || token == "undo") {
            if (outcomes.empty()) {
                std::cerr << "nothing to undo\n";
                continue;
            }
            s -= outcomes.back() ? 1 : 0;
            outcomes.pop_back();
        } else if (token == "y" || token == "yes" || token == "1") {
            outcomes.push_back(true);
            ++s;
        } else if (token == "n" || token == "no" || token == "0") {
            outcomes.push_back(false);
        } else {
            std::cerr << "unrecognised input '" << token << "'\n";
            continue;
        }
        const int k = static_cast<int>(outcomes.size());
        const auto decision = k == 0 ? StageDecision::Continue : classify_state(design, k, s);
        const int needed = std::max(0, design.u() - s);
        if (fmt == Format::Json) {
            std::cout << json{{"k", k},
                              {"s", s},
                              {"decision", std::string(to_string(decision))},
                              {"responders_needed", needed}}
                             .dump()
                      << '\n';
        } else if (fmt == Format::Csv) {
            if (!header) std::cout << "k,s,decision,responders_needed\n";
            header = true;
            std::cout << k << ',' << s << ',' << to_string(decision) << ',' << needed << '\n';
        } else {
            std::cout << "k=" << k << " s=" << s << "  " << to_string(decision);
            if (decision == StageDecision::Continue) {
                std::cout << " (" << needed << " responders needed for success)";
            }
            std::cout << '\n';
        }
        if (decision != StageDecision::Continue) {
            const json doc = estimate_document(design, k, s, Ordering::StageWise,
                                               BiasMode::PlugIn, f.alpha);
            if (fmt == Format::Json) {
                std::cout << doc.dump() << '\n';
            } else if (fmt == Format::Table) {
                std::cout << '\n';
                print_estimate(doc, fmt);
            }
            return 0;
        }
    }
    std::cerr << "input ended before a stopping boundary was reached\n";
    return 0;
}

// ---- compare --------------------------------------------------------------

void run_compare(const HypothesisFlags& f, Format fmt) {
    std::vector<Hypotheses> pairs;
    if (f.has_pair()) {
        pairs.push_back(f.hypotheses());
    } else {
        for (const auto& [p0, p1] : ScenarioGrid::standard().hypothesis_pairs) {
            Hypotheses h{p0, p1, f.alpha, f.beta};
            h.validate();
            pairs.push_back(h);
        }
    }
    json docs = json::array();
    std::vector<std::vector<std::string>> rows{{"p0", "p1", "proposed u/K", "fixed r/N",
                                                "minimax", "optimal", "wald N", "score N",
                                                "ASN0 proposed", "EN0 minimax", "EN0 optimal"}};
    for (const auto& hyp : pairs) {
        const auto proposed = search_design(hyp);
        const auto fixed = fixed_exact_design(hyp);
        const auto mm = simon_search(hyp, SimonCriterion::Minimax);
        const auto op = simon_search(hyp, SimonCriterion::Optimal);
        const double asn0 = SamplingDistribution(proposed.design).expected_sample_size(hyp.p0);
        docs.push_back({{"hypotheses", to_json(hyp)},
                        {"proposed", design_search_document(hyp, proposed)},
                        {"proposed_asn0", asn0},
                        {"fixed", to_json(fixed)},
                        {"minimax", to_json(mm)},
                        {"optimal", to_json(op)},
                        {"wald_N", wald_sample_size(hyp)},
                        {"score_N", score_sample_size(hyp)}});
        auto simon = [](const SimonDesign& d) {
            return std::to_string(d.r1) + "/" + std::to_string(d.n1) + " " + std::to_string(d.r) +
                   "/" + std::to_string(d.n);
        };
        rows.push_back({num(hyp.p0, 2), num(hyp.p1, 2),
                        std::to_string(proposed.design.u()) + "/" +
                            std::to_string(proposed.design.max_n()),
                        std::to_string(fixed.r) + "/" + std::to_string(fixed.n), simon(mm),
                        simon(op), std::to_string(wald_sample_size(hyp)),
                        std::to_string(score_sample_size(hyp)), num(asn0, 2),
                        num(mm.expected_n0, 2), num(op.expected_n0, 2)});
    }
    if (fmt == Format::Json) {
        std::cout << docs.dump(2) << '\n';
    } else if (fmt == Format::Csv) {
        print_csv(std::cout, rows);
    } else {
        print_table(std::cout, rows);
    }
}

// ---- serve ----------------------------------------------------------------

void run_serve(const std::string& listen, const std::string& data_dir,
               const std::string& static_dir) {
    auto cfg = config_from_env();
    if (!listen.empty()) {
        ServiceConfig over = cfg;
        const auto colon = listen.rfind(':');
        try {
            over.port = std::stoi(colon == std::string::npos ? listen : listen.substr(colon + 1));
        } catch (const std::exception&) {
            throw DomainError("--listen must be host:port or port");
        }
        if (colon != std::string::npos && colon > 0) over.host = listen.substr(0, colon);
        cfg = over;
    }
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (!static_dir.empty()) cfg.static_dir = static_dir;

    TrialStore store(cfg.data_dir);
    HttpService service(store, cfg.static_dir);
    const int port = service.bind(cfg.host, cfg.port);
    std::cerr << "listening on " << cfg.host << ':' << port;
    if (!cfg.data_dir.empty()) std::cerr << ", data in " << cfg.data_dir.string();
    std::cerr << std::endl;
    service.listen();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact single-arm designs with deterministic curtailment"};
    app.failure_message(CLI::FailureMessage::help);
    app.require_subcommand(1);

    Format fmt = Format::Table;
    HypothesisFlags hyp;
    SimFlags sim;
    EstimateFlags est;
    bool proposed_only = false;
    bool all_designs = false;
    std::string listen;
    std::string data_dir;
    std::string static_dir;

    auto* design = app.add_subcommand("design", "Search the minimal curtailed design");
    add_hypothesis_flags(design, hyp, false);
    add_format_flag(design, fmt);

    auto* boundaries = app.add_subcommand("boundaries", "Per-stage thresholds of each design");
    add_hypothesis_flags(boundaries, hyp, true);
    boundaries->add_flag("--proposed-only", proposed_only, "Skip the comparator designs");
    add_format_flag(boundaries, fmt);

    auto* oc = app.add_subcommand("oc", "Power and expected sample size");
    add_hypothesis_flags(oc, hyp, true);
    add_sim_flags(oc, sim);
    oc->add_flag("--all-designs", all_designs, "Include fixed and two-stage comparators");
    oc->add_option("--output", sim.output, "Write results to a file");
    add_format_flag(oc, fmt);

    auto* estimate_cmd = app.add_subcommand("estimate", "Estimates and intervals at a stop");
    add_hypothesis_flags(estimate_cmd, hyp, true);
    estimate_cmd->add_option("--m", est.m, "Patients enrolled at the stop")->required();
    estimate_cmd->add_option("--s", est.s, "Responders at the stop")->required();
    estimate_cmd->add_option("--ordering", est.ordering, "stagewise or sample_space")
        ->check(CLI::IsMember({"stagewise", "sample_space"}))
        ->capture_default_str();
    estimate_cmd->add_option("--bias", est.bias, "plug_in or root_solve")
        ->check(CLI::IsMember({"plug_in", "root_solve"}))
        ->capture_default_str();
    estimate_cmd->add_option("--ci-alpha", est.ci_alpha, "Tail level of the intervals")
        ->check(CLI::Range(0.0, 0.5));
    add_format_flag(estimate_cmd, fmt);

    auto* monitor = app.add_subcommand("monitor", "Interactive patient-by-patient monitoring");
    add_hypothesis_flags(monitor, hyp, true);
    add_format_flag(monitor, fmt);

    auto* simulate = app.add_subcommand("simulate", "Evaluate designs over the scenario grid");
    add_hypothesis_flags(simulate, hyp, false);
    add_sim_flags(simulate, sim);
    simulate->add_option("--what", sim.what, "oc or estimation")
        ->check(CLI::IsMember({"oc", "estimation"}))
        ->capture_default_str();
    simulate->add_option("--output", sim.output, "Write results to a file");
    add_format_flag(simulate, fmt);

    auto* compare = app.add_subcommand("compare", "Proposed design against the comparators");
    add_hypothesis_flags(compare, hyp, false);
    add_format_flag(compare, fmt);

    auto* serve = app.add_subcommand("serve", "Run the trial monitoring HTTP service");
    serve->add_option("--listen", listen, "host:port (default CURTAIL_LISTEN or 127.0.0.1:8080)");
    serve->add_option("--data-dir", data_dir, "Event log directory (default CURTAIL_DATA_DIR)");
    serve->add_option("--static-dir", static_dir, "Serve a static UI bundle from this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*design) run_design(hyp, fmt);
        if (*boundaries) run_boundaries(hyp, proposed_only, fmt);
        if (*oc) run_oc(hyp, sim, all_designs, fmt);
        if (*estimate_cmd) run_estimate(hyp, est, fmt);
        if (*monitor) return run_monitor(hyp, fmt, std::cin);
        if (*simulate) run_simulate(hyp, sim, fmt);
        if (*compare) run_compare(hyp, fmt);
        if (*serve) run_serve(listen, data_dir, static_dir);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
