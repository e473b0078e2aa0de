#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "curtail/comparators.hpp"
#include "curtail/errors.hpp"
#include "curtail/estimation.hpp"
#include "curtail/exact_core.hpp"
#include "curtail/intervals.hpp"
#include "curtail/json_io.hpp"
#include "curtail/sampling_dist.hpp"
#include "curtail/sim_harness.hpp"

namespace py = pybind11;
using namespace curtail;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Hypotheses make_hyp(double p0, double p1, double alpha, double beta) {
    Hypotheses h{p0, p1, alpha, beta};
    h.validate();
    return h;
}

Ordering ordering_from(const std::string& s) {
    if (s == "stagewise") return Ordering::StageWise;
    if (s == "sample_space") return Ordering::SampleSpace;
    throw DomainError("ordering must be stagewise or sample_space");
}

BiasMode bias_mode_from(const std::string& s) {
    if (s == "plug_in") return BiasMode::PlugIn;
    if (s == "root_solve") return BiasMode::RootSolve;
    throw DomainError("bias_mode must be plug_in or root_solve");
}

SimonCriterion criterion_from(const std::string& s) {
    if (s == "minimax") return SimonCriterion::Minimax;
    if (s == "optimal") return SimonCriterion::Optimal;
    throw DomainError("criterion must be minimax or optimal");
}

EvalOptions options_from(const std::string& mode, std::uint64_t replications, std::uint64_t seed,
                         unsigned threads, double grid_step) {
    EvalOptions o;
    if (mode == "exact") {
        o.mode = EvalMode::Exact;
    } else if (mode == "mc") {
        o.mode = EvalMode::MonteCarlo;
    } else {
        throw DomainError("mode must be exact or mc");
    }
    o.replications = replications;
    o.seed = seed;
    o.threads = threads;
    o.grid_step = grid_step;
    return o;
}

std::vector<DesignUnderTest> pick_designs(const Hypotheses& hyp,
                                          const std::optional<std::string>& label) {
    auto all = benchmark_designs(hyp);
    if (!label) return all;
    for (auto& d : all) {
        std::string lower = d.label;
        for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (lower == *label) return {d};
    }
    throw DomainError("design must be proposed, fixed, minimax or optimal");
}

py::dict measure(const Measure& m) {
    py::dict d;
    d["value"] = m.value;
    d["se"] = m.se;
    return d;
}

py::dict row_dict(const PerformanceRow& r) {
    py::dict d;
    d["design"] = r.design;
    d["p0"] = r.p0;
    d["p1"] = r.p1;
    d["p"] = r.p_true;
    d["max_n"] = r.max_n;
    d["mode"] = std::string(to_string(r.mode));
    d["replications"] = r.replications;
    d["seed"] = r.seed;
    d["power"] = measure(r.power);
    d["asn"] = measure(r.asn);
    if (r.estimators) {
        py::dict est;
        for (std::size_t i = 0; i < kEstimatorNames.size(); ++i) {
            py::dict e;
            e["bias"] = measure((*r.estimators)[i].bias);
            e["rmse"] = measure((*r.estimators)[i].rmse);
            est[py::str(std::string(kEstimatorNames[i]))] = e;
        }
        d["estimators"] = est;
    }
    if (r.intervals) {
        py::dict ivs;
        for (std::size_t i = 0; i < kAllIntervalMethods.size(); ++i) {
            py::dict e;
            e["coverage"] = measure((*r.intervals)[i].coverage);
            e["length"] = measure((*r.intervals)[i].length);
            ivs[py::str(std::string(to_string(kAllIntervalMethods[i])))] = e;
        }
        d["intervals"] = ivs;
    }
    return d;
}

py::list rows_list(const std::vector<PerformanceRow>& rows) {
    py::list out;
    for (const auto& r : rows) out.append(row_dict(r));
    return out;
}

}  // namespace

PYBIND11_MODULE(_curtail, m) {
    m.doc() = "Exact curtailed single-arm designs";

    auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NotInSupportError>(m, "NotInSupportError", domain.ptr());
    py::register_exception<SizeError>(m, "SizeError", domain.ptr());
    py::register_exception<SearchExhaustedError>(m, "SearchExhaustedError", PyExc_RuntimeError);

    m.def("nb_pmf", &nb_pmf, py::arg("s"), py::arg("k"), py::arg("p"));
    m.def("efficacy_probability", &efficacy_probability, py::arg("u"), py::arg("K"), py::arg("p"));
    m.def("futility_boundaries", &futility_boundaries, py::arg("u"), py::arg("K"));

    m.def(
        "operating_characteristics",
        [](int u, int K, double p0, double p1, double alpha, double beta) {
            const auto hyp = make_hyp(p0, p1, alpha, beta);
            return to_py(design_document(hyp, Design(u, K)));
        },
        py::arg("u"), py::arg("K"), py::arg("p0"), py::arg("p1"), py::arg("alpha") = 0.025,
        py::arg("beta") = 0.2);

    m.def(
        "search_design",
        [](double p0, double p1, double alpha, double beta) {
            const auto hyp = make_hyp(p0, p1, alpha, beta);
            return to_py(design_search_document(hyp, search_design(hyp)));
        },
        py::arg("p0"), py::arg("p1"), py::arg("alpha") = 0.025, py::arg("beta") = 0.2);

    m.def(
        "boundary_table", [](int u, int K) { return to_py(boundary_table(Design(u, K))); },
        py::arg("u"), py::arg("K"));

    py::class_<SamplingDistribution>(m, "SamplingDistribution")
        .def(py::init([](int u, int K) { return SamplingDistribution(Design(u, K)); }),
             py::arg("u"), py::arg("K"))
        .def_property_readonly("u", [](const SamplingDistribution& d) { return d.design().u(); })
        .def_property_readonly("K",
                               [](const SamplingDistribution& d) { return d.design().max_n(); })
        .def("__len__", &SamplingDistribution::size)
        .def("support",
             [](const SamplingDistribution& d) {
                 py::list out;
                 const auto as_int = py::module_::import("builtins").attr("int");
                 for (const auto& t : d.support()) {
                     py::dict row;
                     row["m"] = t.m;
                     row["s"] = t.s;
                     row["kind"] = std::string(to_string(t.kind));
                     row["paths"] = as_int(t.path_count.str());
                     out.append(row);
                 }
                 return out;
             })
        .def("rank", &SamplingDistribution::rank, py::arg("m"), py::arg("s"))
        .def("pmf", &SamplingDistribution::pmf, py::arg("m"), py::arg("s"), py::arg("p"))
        .def("pmf_vector", &SamplingDistribution::pmf_vector, py::arg("p"))
        .def("expected_sample_size", &SamplingDistribution::expected_sample_size, py::arg("p"))
        .def("power", &SamplingDistribution::exact_power, py::arg("p"));

    m.def("bias_function", &bias_function, py::arg("dist"), py::arg("p"));

    m.def(
        "estimate",
        [](const SamplingDistribution& dist, int mm, int s, const std::string& ordering,
           const std::string& bias_mode, double step) {
            return to_py(to_json(estimate(dist, mm, s, ordering_from(ordering),
                                          bias_mode_from(bias_mode), step)));
        },
        py::arg("dist"), py::arg("m"), py::arg("s"), py::arg("ordering") = "stagewise",
        py::arg("bias_mode") = "plug_in", py::arg("step") = 1e-4);

    m.def(
        "intervals",
        [](const SamplingDistribution& dist, int mm, int s, double alpha) {
            py::list out;
            for (const auto& ci : all_intervals(dist, mm, s, alpha)) out.append(to_py(to_json(ci)));
            return out;
        },
        py::arg("dist"), py::arg("m"), py::arg("s"), py::arg("alpha") = 0.025);

    m.def(
        "fixed_design",
        [](double p0, double p1, double alpha, double beta) {
            return to_py(to_json(fixed_exact_design(make_hyp(p0, p1, alpha, beta))));
        },
        py::arg("p0"), py::arg("p1"), py::arg("alpha") = 0.025, py::arg("beta") = 0.2);

    m.def(
        "simon_design",
        [](double p0, double p1, const std::string& criterion, double alpha, double beta) {
            return to_py(
                to_json(simon_search(make_hyp(p0, p1, alpha, beta), criterion_from(criterion))));
        },
        py::arg("p0"), py::arg("p1"), py::arg("criterion") = "minimax", py::arg("alpha") = 0.025,
        py::arg("beta") = 0.2);

    m.def(
        "wald_sample_size",
        [](double p0, double p1, double alpha, double beta) {
            return wald_sample_size(make_hyp(p0, p1, alpha, beta));
        },
        py::arg("p0"), py::arg("p1"), py::arg("alpha") = 0.025, py::arg("beta") = 0.2);

    m.def(
        "score_sample_size",
        [](double p0, double p1, double alpha, double beta) {
            return score_sample_size(make_hyp(p0, p1, alpha, beta));
        },
        py::arg("p0"), py::arg("p1"), py::arg("alpha") = 0.025, py::arg("beta") = 0.2);

    m.def(
        "evaluate_oc",
        [](double p0, double p1, const std::vector<double>& p, std::optional<std::string> design,
           const std::string& mode, std::uint64_t replications, std::uint64_t seed,
           unsigned threads, double alpha, double beta) {
            const auto hyp = make_hyp(p0, p1, alpha, beta);
            const auto opts = options_from(mode, replications, seed, threads, 1e-4);
            std::vector<PerformanceRow> rows;
            {
                py::gil_scoped_release release;
                for (const auto& d : pick_designs(hyp, design)) {
                    auto r = evaluate_oc(d, p, opts);
                    rows.insert(rows.end(), r.begin(), r.end());
                }
            }
            return rows_list(rows);
        },
        py::arg("p0"), py::arg("p1"), py::arg("p"), py::arg("design") = py::none(),
        py::arg("mode") = "exact", py::arg("replications") = 0,
        py::arg("seed") = EvalOptions{}.seed, py::arg("threads") = 1, py::arg("alpha") = 0.025,
        py::arg("beta") = 0.2);

    m.def(
        "evaluate_estimation",
        [](double p0, double p1, const std::vector<double>& p, const std::string& mode,
           std::uint64_t replications, std::uint64_t seed, unsigned threads, double grid_step,
           double alpha, double beta) {
            const auto hyp = make_hyp(p0, p1, alpha, beta);
            const auto opts = options_from(mode, replications, seed, threads, grid_step);
            std::vector<PerformanceRow> rows;
            {
                py::gil_scoped_release release;
                rows = evaluate_estimation(proposed_design(hyp), p, opts);
            }
            return rows_list(rows);
        },
        py::arg("p0"), py::arg("p1"), py::arg("p"), py::arg("mode") = "exact",
        py::arg("replications") = 0, py::arg("seed") = EvalOptions{}.seed,
        py::arg("threads") = 1, py::arg("grid_step") = 1e-4, py::arg("alpha") = 0.025,
        py::arg("beta") = 0.2);
}
