#include "curtail/binomial.hpp"

#include <algorithm>

namespace curtail {

double log_choose(int n, int k) {
    if (k < 0 || k > n) return -INFINITY;
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binom_pmf(int n, int x, double p) {
    if (x < 0 || x > n) return 0.0;
    return std::exp(log_choose(n, x) + log_bernoulli_path(x, n - x, p));
}

double binom_upper(int n, int x, double p) {
    if (x <= 0) return 1.0;
    if (x > n) return 0.0;
    double sum = 0.0;
    for (int i = n; i >= x; --i) sum += binom_pmf(n, i, p);
    return std::min(sum, 1.0);
}

double binom_lower(int n, int x, double p) {
    if (x < 0) return 0.0;
    if (x >= n) return 1.0;
    double sum = 0.0;
    for (int i = 0; i <= x; ++i) sum += binom_pmf(n, i, p);
    return std::min(sum, 1.0);
}

}  // namespace curtail
