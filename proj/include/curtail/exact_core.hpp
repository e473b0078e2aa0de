#pragma once

// Exact single-arm sequential design with a constant efficacy threshold and
// deterministic-curtailment futility stopping.
//
// Patients are monitored one at a time. After k patients with S_k responders
// the trial stops for efficacy once S_k >= u, stops for futility once
// S_k <= l_k (u is out of reach even if everyone left responds), and
// continues otherwise. The first-passage time to u responders is negative
// binomial, which makes the error rates exact finite sums.

#include <cstdint>
#include <string_view>
#include <vector>

namespace curtail {

struct Hypotheses {
    double p0 = 0.0;     // null response rate
    double p1 = 0.0;     // expected response rate under the alternative
    double alpha = 0.0;  // one-sided nominal type I level
    double beta = 0.0;   // nominal type II level

    // Throws DomainError unless 0 < p0 < p1 < 1 and alpha, beta in (0, 1).
    void validate() const;
};

// Efficacy threshold u, maximum sample size K and futility boundaries
// l_1..l_K. Boundaries below zero mean futility cannot be declared yet.
class Design {
public:
    Design(int u, int max_n);

    int u() const { return u_; }
    int max_n() const { return max_n_; }

    // l_k for 1 <= k <= K.
    int futility_bound(int k) const;
    const std::vector<int>& futility_bounds() const { return bounds_; }

    // First stage at which a futility stop is possible, K - u + 1.
    int first_futility_stage() const { return max_n_ - u_ + 1; }

    friend bool operator==(const Design&, const Design&) = default;

private:
    int u_;
    int max_n_;
    std::vector<int> bounds_;  // bounds_[k - 1] == l_k
};

enum class StageDecision { Continue, StopEfficacy, StopFutility };

std::string_view to_string(StageDecision d);

struct OperatingCharacteristics {
    double alpha_actual = 0.0;
    double power = 0.0;
    int u = 0;
    int max_n = 0;
};

// C(k-1, s-1) p^s (1-p)^(k-s): probability that the s-th response arrives
// with patient k.
double nb_pmf(int s, int k, double p);

// Sum of nb_pmf(u, k, p) for k = u..K.
double efficacy_probability(int u, int max_n, double p);

OperatingCharacteristics operating_characteristics(int u, int max_n, const Hypotheses& hyp);

// l_K = u - 1 and l_k = l_{k+1} - 1; index 0 holds l_1.
std::vector<int> futility_boundaries(int u, int max_n);

StageDecision classify_state(const Design& design, int k, int s);

struct DesignSearchResult {
    Design design;
    // Every K at this u with alpha_actual <= alpha and power >= 1 - beta,
    // ascending. design.max_n() is the front.
    std::vector<int> feasible_max_n;
    // Largest K at this u whose type I error stays within alpha; enrollment
    // may overshoot up to this value.
    int alpha_max_n = 0;
    OperatingCharacteristics oc;
};

struct SearchLimits {
    int max_u = 200;
    // 0 selects 10 * ceil(score-formula sample size).
    int max_n = 0;
};

// Smallest u admitting a feasible K, and the smallest such K.
DesignSearchResult search_design(const Hypotheses& hyp, SearchLimits limits = {});

}  // namespace curtail
