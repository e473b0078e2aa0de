#include "curtail/json_io.hpp"

#include <string>

#include "curtail/errors.hpp"

namespace curtail {

namespace {

double number_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_number()) {
        throw DomainError(std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

IntervalMethod method_from_string(const std::string& s) {
    for (auto m : kAllIntervalMethods) {
        if (to_string(m) == s) return m;
    }
    throw DomainError("unknown interval method '" + s + "'");
}

}  // namespace

json to_json(const Hypotheses& hyp) {
    return {{"p0", hyp.p0}, {"p1", hyp.p1}, {"alpha", hyp.alpha}, {"beta", hyp.beta}};
}

Hypotheses hypotheses_from_json(const json& j) {
    Hypotheses hyp{number_field(j, "p0"), number_field(j, "p1"), number_field(j, "alpha"),
                   number_field(j, "beta")};
    hyp.validate();
    return hyp;
}

json design_document(const Hypotheses& hyp, const Design& design) {
    const auto oc = operating_characteristics(design.u(), design.max_n(), hyp);
    json doc = to_json(hyp);
    doc["u"] = design.u();
    doc["K"] = design.max_n();
    doc["l"] = design.futility_bounds();
    doc["alpha_actual"] = oc.alpha_actual;
    doc["power"] = oc.power;
    return doc;
}

json design_search_document(const Hypotheses& hyp, const DesignSearchResult& result) {
    json doc = design_document(hyp, result.design);
    doc["feasible_K"] = result.feasible_max_n;
    doc["K_alpha_max"] = result.alpha_max_n;
    return doc;
}

json to_json(const EstimateReport& r) {
    return {{"naive", r.naive},
            {"bias_adjusted", r.bias_adjusted},
            {"mue", r.mue},
            {"mue_lower", r.mue_lower},
            {"mue_upper", r.mue_upper},
            {"ordering", std::string(to_string(r.ordering))},
            {"bias_mode", std::string(to_string(r.bias_mode))}};
}

EstimateReport estimate_report_from_json(const json& j) {
    EstimateReport r;
    r.naive = number_field(j, "naive");
    r.bias_adjusted = number_field(j, "bias_adjusted");
    r.mue = number_field(j, "mue");
    r.mue_lower = number_field(j, "mue_lower");
    r.mue_upper = number_field(j, "mue_upper");
    r.ordering = j.value("ordering", "stagewise") == "stagewise" ? Ordering::StageWise
                                                                 : Ordering::SampleSpace;
    r.bias_mode = j.value("bias_mode", "plug_in") == "plug_in" ? BiasMode::PlugIn
                                                               : BiasMode::RootSolve;
    return r;
}

json to_json(const ConfidenceInterval& ci) {
    return {{"method", std::string(to_string(ci.method))},
            {"level", ci.level},
            {"lower", ci.lower},
            {"upper", ci.upper}};
}

ConfidenceInterval interval_from_json(const json& j) {
    return {number_field(j, "lower"), number_field(j, "upper"),
            method_from_string(j.at("method").get<std::string>()), number_field(j, "level")};
}

json to_json(const FixedDesign& d) {
    return {{"N", d.n}, {"r", d.r}, {"alpha_actual", d.alpha_actual}, {"power", d.power}};
}

json to_json(const SimonDesign& d) {
    return {{"criterion", std::string(to_string(d.criterion))},
            {"n1", d.n1},
            {"r1", d.r1},
            {"n", d.n},
            {"r", d.r},
            {"alpha_actual", d.alpha_actual},
            {"power", d.power},
            {"EN0", d.expected_n0},
            {"PET0", d.pet0}};
}

json boundary_table(const Design& design) {
    json rows = json::array();
    for (int k = 1; k <= design.max_n(); ++k) {
        const int l = design.futility_bound(k);
        rows.push_back({{"k", k},
                        {"efficacy", k >= design.u() ? json(design.u()) : json(nullptr)},
                        {"futility", l >= 0 ? json(l) : json(nullptr)}});
    }
    return {{"u", design.u()}, {"K", design.max_n()}, {"stages", std::move(rows)}};
}

}  // namespace curtail
