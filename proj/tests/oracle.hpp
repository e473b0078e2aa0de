#pragma once

// Reference computations that share no code with the library: sequence
// enumeration, naive binomial sums and textbook recurrences. Tests compare
// the library against these and freeze the results.

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

inline long double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0L;
    long double c = 1.0L;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

inline long double binom_pmf(int n, int x, long double p) {
    return choose(n, x) * std::pow(p, x) * std::pow(1.0L - p, n - x);
}

// Pr[X >= x], X ~ Binomial(n, p).
inline long double binom_upper(int n, int x, long double p) {
    long double t = 0.0L;
    for (int i = std::max(x, 0); i <= n; ++i) t += binom_pmf(n, i, p);
    return t;
}

// Pr[X <= x].
inline long double binom_lower(int n, int x, long double p) {
    long double t = 0.0L;
    for (int i = 0; i <= std::min(x, n); ++i) t += binom_pmf(n, i, p);
    return t;
}

struct Cell {
    long double probability = 0.0L;
    std::uint64_t sequences = 0;  // full-length sequences that end here
    std::uint64_t paths = 0;      // distinct stopped prefixes
};

// Walk every 0/1 sequence of length K. A trial stops at the first k where
// s reaches u, or where s plus all remaining patients cannot reach u.
inline std::map<std::pair<int, int>, Cell> enumerate(int u, int K, long double p) {
    std::map<std::pair<int, int>, Cell> out;
    std::map<std::pair<int, int>, std::vector<std::uint64_t>> seen;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << K); ++bits) {
        int s = 0;
        long double prob = 1.0L;
        for (int k = 1; k <= K; ++k) {
            const bool r = (bits >> (k - 1)) & 1U;
            s += r ? 1 : 0;
            prob *= r ? p : 1.0L - p;
            const bool eff = s >= u;
            const bool fut = s + (K - k) < u;
            if (eff || fut) {
                auto& c = out[{k, s}];
                c.sequences += 1;
                // each stopped prefix is hit by 2^(K-k) full sequences; count
                // it once, at the all-zero completion
                if ((bits >> k) == 0) {
                    c.probability += prob;
                    c.paths += 1;
                }
                break;
            }
        }
    }
    return out;
}

// Pr[efficacy stop by K] by summing enumerated sequences.
inline long double efficacy_mass(int u, int K, long double p) {
    long double t = 0.0L;
    for (const auto& [key, c] : enumerate(u, K, p)) {
        if (key.second == u) t += c.probability;
    }
    return t;
}

// Pr[reject] for a two-stage design: stop after n1 if responses <= r1,
// otherwise reject when total responses > r.
inline long double two_stage_reject(int n1, int r1, int n, int r, long double p) {
    long double t = 0.0L;
    for (int x1 = r1 + 1; x1 <= n1; ++x1) {
        t += binom_pmf(n1, x1, p) * binom_upper(n - n1, r + 1 - x1, p);
    }
    return t;
}

}  // namespace oracle
