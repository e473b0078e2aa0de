#pragma once

// Reference designs the sequential design is benchmarked against: the exact
// one-stage binomial test, Simon's two-stage designs and the normal-theory
// sample-size formulas.

#include <string_view>

#include "curtail/exact_core.hpp"

namespace curtail {

// Reject H0 iff at least `r` of `n` patients respond.
struct FixedDesign {
    int n = 0;
    int r = 0;
    double alpha_actual = 0.0;
    double power = 0.0;

    friend bool operator==(const FixedDesign&, const FixedDesign&) = default;
};

// Smallest N such that the exact test at every N' >= N (using the smallest
// critical value with type I error <= alpha) has power >= 1 - beta. Power of
// a one-stage exact test saw-tooths in N; the returned N is the point past
// which it never dips below target again. `horizon` bounds that check
// (0 selects 10 * score N).
FixedDesign fixed_exact_design(const Hypotheses& hyp, int horizon = 0);

// Smallest critical value r with Pr[Bin(n, p0) >= r] <= alpha (n + 1 if none).
int fixed_critical_value(int n, double p0, double alpha);

// Upper q-quantile of the standard normal, z_q = Phi^{-1}(1 - q).
double normal_upper_quantile(double q);

// ceil((z_a + z_b)^2 p1 (1 - p1) / (p1 - p0)^2)
int wald_sample_size(const Hypotheses& hyp);

// ceil(((z_a sqrt(p0 q0) + z_b sqrt(p1 q1)) / (p1 - p0))^2)
int score_sample_size(const Hypotheses& hyp);

// Wald statistic with the Agresti-Coull shrunk proportion
//   p~ = (s/k + z^2/(2k)) / (1 + z^2/k),  Z = sqrt(k) (p~ - p0) / sqrt(p~ (1 - p~)).
struct AdjustedStatistic {
    double p_tilde = 0.0;
    double z = 0.0;
};
AdjustedStatistic agresti_coull_z(int k, int s, double p0, double z_alpha);

enum class SimonCriterion { Minimax, Optimal };

std::string_view to_string(SimonCriterion c);

// Stop for futility after stage 1 iff responses <= r1; reject H0 iff total
// responses over n patients > r.
struct SimonDesign {
    int n1 = 0;
    int r1 = 0;
    int n = 0;
    int r = 0;
    SimonCriterion criterion = SimonCriterion::Minimax;
    double alpha_actual = 0.0;
    double power = 0.0;
    double expected_n0 = 0.0;  // ASN under p0
    double pet0 = 0.0;         // early termination probability under p0
};

// Exhaustive search over (n1, r1, n, r) with exact two-stage probabilities.
// Minimax minimises n, then EN(p0); Optimal minimises EN(p0). Remaining ties
// go to smaller n, then smaller n1. `max_n` 0 selects 3 * score N.
SimonDesign simon_search(const Hypotheses& hyp, SimonCriterion criterion, int max_n = 0);

struct TwoStageCharacteristics {
    double pet = 0.0;
    double asn = 0.0;
    double power = 0.0;  // Pr[reject H0]
};

TwoStageCharacteristics simon_characteristics(const SimonDesign& design, double p);

struct FixedCharacteristics {
    double asn = 0.0;
    double power = 0.0;
};

FixedCharacteristics fixed_characteristics(const FixedDesign& design, double p);

}  // namespace curtail
