#pragma once

// JSON documents shared by the CLI, the HTTP service and the Python module.

#include "json.hpp"

#include "curtail/comparators.hpp"
#include "curtail/estimation.hpp"
#include "curtail/exact_core.hpp"
#include "curtail/intervals.hpp"

namespace curtail {

using nlohmann::json;

// {p0, p1, alpha, beta, u, K, l: [...], alpha_actual, power}
json design_document(const Hypotheses& hyp, const Design& design);

// design_document plus the feasible K list and the overshoot limit.
json design_search_document(const Hypotheses& hyp, const DesignSearchResult& result);

json to_json(const Hypotheses& hyp);
Hypotheses hypotheses_from_json(const json& j);

json to_json(const EstimateReport& r);
EstimateReport estimate_report_from_json(const json& j);

json to_json(const ConfidenceInterval& ci);
ConfidenceInterval interval_from_json(const json& j);

json to_json(const FixedDesign& d);
json to_json(const SimonDesign& d);

// Per-stage thresholds: k, efficacy threshold (null while k < u), futility
// bound (null while negative).
json boundary_table(const Design& design);

}  // namespace curtail
