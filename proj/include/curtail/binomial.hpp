#pragma once

// Log-domain binomial helpers shared by the design, comparator and interval
// code.

#include <cmath>

namespace curtail {

double log_choose(int n, int k);

// n * log(x) with the convention 0 * log(0) = 0.
inline double xlogy(int n, double x) {
    return n == 0 ? 0.0 : n * std::log(x);
}

// log(p^s (1-p)^f), -inf when the probability is exactly zero.
inline double log_bernoulli_path(int successes, int failures, double p) {
    return xlogy(successes, p) + xlogy(failures, 1.0 - p);
}

double binom_pmf(int n, int x, double p);

// Pr[Bin(n, p) >= x].
double binom_upper(int n, int x, double p);

// Pr[Bin(n, p) <= x].
double binom_lower(int n, int x, double p);

}  // namespace curtail
