#include "curtail/exact_core.hpp"

#include <cmath>
#include <string>

#include "curtail/binomial.hpp"
#include "curtail/comparators.hpp"
#include "curtail/errors.hpp"

namespace curtail {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void check_u_k(int u, int max_n) {
    if (u < 1 || max_n < u) {
        throw DomainError("design requires 1 <= u <= K (got u=" + std::to_string(u) +
                          ", K=" + std::to_string(max_n) + ")");
    }
}

}  // namespace

void Hypotheses::validate() const {
    if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("p0 must lie in (0, 1)");
    if (!(p1 > 0.0 && p1 < 1.0)) throw DomainError("p1 must lie in (0, 1)");
    if (!(p0 < p1)) throw DomainError("p0 must be < p1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
}

Design::Design(int u, int max_n) : u_(u), max_n_(max_n), bounds_(futility_boundaries(u, max_n)) {}

int Design::futility_bound(int k) const {
    if (k < 1 || k > max_n_) {
        throw DomainError("stage " + std::to_string(k) + " outside 1.." + std::to_string(max_n_));
    }
    return bounds_[k - 1];
}

std::string_view to_string(StageDecision d) {
    switch (d) {
        case StageDecision::Continue: return "continue";
        case StageDecision::StopEfficacy: return "stop_efficacy";
        case StageDecision::StopFutility: return "stop_futility";
    }
    return "unknown";
}

double nb_pmf(int s, int k, double p) {
    if (s < 1 || s > k) {
        throw DomainError("nb_pmf requires 1 <= s <= k (got s=" + std::to_string(s) +
                          ", k=" + std::to_string(k) + ")");
    }
    if (!is_probability(p)) throw DomainError("nb_pmf requires p in [0, 1]");
    return std::exp(log_choose(k - 1, s - 1) + log_bernoulli_path(s, k - s, p));
}

double efficacy_probability(int u, int max_n, double p) {
    check_u_k(u, max_n);
    double sum = 0.0;
    for (int k = u; k <= max_n; ++k) sum += nb_pmf(u, k, p);
    return sum;
}

OperatingCharacteristics operating_characteristics(int u, int max_n, const Hypotheses& hyp) {
    check_u_k(u, max_n);
    return {efficacy_probability(u, max_n, hyp.p0), efficacy_probability(u, max_n, hyp.p1), u,
            max_n};
}

std::vector<int> futility_boundaries(int u, int max_n) {
    check_u_k(u, max_n);
    std::vector<int> l(static_cast<std::size_t>(max_n));
    l[max_n - 1] = u - 1;
    for (int k = max_n - 1; k >= 1; --k) l[k - 1] = l[k] - 1;
    return l;
}

StageDecision classify_state(const Design& design, int k, int s) {
    if (k < 1 || k > design.max_n()) {
        throw DomainError("stage " + std::to_string(k) + " outside 1.." +
                          std::to_string(design.max_n()));
    }
    if (s < 0 || s > k) {
        throw DomainError("responders " + std::to_string(s) + " outside 0.." + std::to_string(k));
    }
    if (s >= design.u()) return StageDecision::StopEfficacy;
    if (s <= design.futility_bound(k)) return StageDecision::StopFutility;
    return StageDecision::Continue;
}

DesignSearchResult search_design(const Hypotheses& hyp, SearchLimits limits) {
    hyp.validate();
    const int n_cap = limits.max_n > 0 ? limits.max_n : 10 * score_sample_size(hyp);
    const double power_target = 1.0 - hyp.beta;

    for (int u = 1; u <= limits.max_u && u <= n_cap; ++u) {
        // Both sums only grow with K, so the alpha-feasible K form a prefix
        // u..alpha_max_n and the feasible ones a suffix of that prefix.
        double alpha_actual = 0.0;
        double power = 0.0;
        std::vector<int> feasible;
        int alpha_max_n = 0;
        for (int k = u; k <= n_cap; ++k) {
            alpha_actual += nb_pmf(u, k, hyp.p0);
            power += nb_pmf(u, k, hyp.p1);
            if (alpha_actual > hyp.alpha) break;
            alpha_max_n = k;
            if (power >= power_target) feasible.push_back(k);
        }
        if (!feasible.empty()) {
            const int max_n = feasible.front();
            return {Design(u, max_n), std::move(feasible), alpha_max_n,
                    operating_characteristics(u, max_n, hyp)};
        }
    }
    throw SearchExhaustedError("no (u, K) meets alpha=" + std::to_string(hyp.alpha) +
                               " and power=" + std::to_string(power_target) + " with u <= " +
                               std::to_string(limits.max_u) + " and K <= " + std::to_string(n_cap));
}

}  // namespace curtail
