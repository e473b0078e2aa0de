#include "curtail/comparators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "curtail/binomial.hpp"
#include "curtail/errors.hpp"

namespace curtail {

namespace {

std::vector<double> binom_pmf_row(int n, double p) {
    std::vector<double> row(static_cast<std::size_t>(n) + 1);
    for (int x = 0; x <= n; ++x) row[x] = binom_pmf(n, x, p);
    return row;
}

// upper[x] = Pr[X >= x] for x in 0..n+1.
std::vector<double> upper_tails(const std::vector<double>& pmf) {
    std::vector<double> up(pmf.size() + 1, 0.0);
    for (std::size_t x = pmf.size(); x-- > 0;) up[x] = up[x + 1] + pmf[x];
    return up;
}

// Binomial pmf and survival tables for every n up to a cap at one p.
class BinomialTables {
public:
    BinomialTables(int max_n, double p) : pmf_(max_n + 1), upper_(max_n + 1) {
        for (int n = 0; n <= max_n; ++n) {
            pmf_[n] = binom_pmf_row(n, p);
            upper_[n] = upper_tails(pmf_[n]);
        }
    }

    double pmf(int n, int x) const { return pmf_[n][x]; }

    // Pr[Bin(n) > y]
    double exceeds(int n, int y) const {
        if (y < 0) return 1.0;
        if (y >= n) return 0.0;
        return upper_[n][y + 1];
    }

    double at_most(int n, int y) const { return 1.0 - exceeds(n, y); }

private:
    std::vector<std::vector<double>> pmf_;
    std::vector<std::vector<double>> upper_;
};

// Pr[stage 1 > r1 and total > r].
double two_stage_reject(const BinomialTables& t, int n1, int r1, int n2, int r) {
    double sum = 0.0;
    for (int x1 = r1 + 1; x1 <= n1; ++x1) sum += t.pmf(n1, x1) * t.exceeds(n2, r - x1);
    return sum;
}

}  // namespace

int fixed_critical_value(int n, double p0, double alpha) {
    const auto up = upper_tails(binom_pmf_row(n, p0));
    for (int r = 0; r <= n; ++r) {
        if (up[r] <= alpha) return r;
    }
    return n + 1;
}

FixedDesign fixed_exact_design(const Hypotheses& hyp, int horizon) {
    hyp.validate();
    if (horizon <= 0) horizon = 10 * score_sample_size(hyp);
    const double power_target = 1.0 - hyp.beta;

    std::vector<FixedDesign> candidates(static_cast<std::size_t>(horizon) + 1);
    int last_infeasible = 0;
    for (int n = 1; n <= horizon; ++n) {
        const auto up0 = upper_tails(binom_pmf_row(n, hyp.p0));
        const auto up1 = upper_tails(binom_pmf_row(n, hyp.p1));
        int r = 0;
        while (r <= n && up0[r] > hyp.alpha) ++r;
        FixedDesign d{n, r, up0[r], up1[r]};
        if (d.power < power_target) last_infeasible = n;
        candidates[n] = d;
    }
    if (last_infeasible >= horizon) {
        throw SearchExhaustedError("no fixed design keeps power >= " +
                                   std::to_string(power_target) + " up to N=" +
                                   std::to_string(horizon));
    }
    return candidates[last_infeasible + 1];
}

FixedCharacteristics fixed_characteristics(const FixedDesign& design, double p) {
    return {static_cast<double>(design.n), binom_upper(design.n, design.r, p)};
}

double normal_upper_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("normal quantile requires q in (0, 1)");
    return boost::math::quantile(boost::math::complement(boost::math::normal(), q));
}

int wald_sample_size(const Hypotheses& hyp) {
    hyp.validate();
    const double z = normal_upper_quantile(hyp.alpha) + normal_upper_quantile(hyp.beta);
    const double delta = hyp.p1 - hyp.p0;
    return static_cast<int>(std::ceil(z * z * hyp.p1 * (1.0 - hyp.p1) / (delta * delta)));
}

int score_sample_size(const Hypotheses& hyp) {
    hyp.validate();
    const double num = normal_upper_quantile(hyp.alpha) * std::sqrt(hyp.p0 * (1.0 - hyp.p0)) +
                       normal_upper_quantile(hyp.beta) * std::sqrt(hyp.p1 * (1.0 - hyp.p1));
    const double ratio = num / (hyp.p1 - hyp.p0);
    return static_cast<int>(std::ceil(ratio * ratio));
}

AdjustedStatistic agresti_coull_z(int k, int s, double p0, double z_alpha) {
    if (k < 1 || s < 0 || s > k) throw DomainError("agresti_coull_z requires 0 <= s <= k, k >= 1");
    const double p_hat = static_cast<double>(s) / k;
    const double z2 = z_alpha * z_alpha;
    const double p_tilde = (p_hat + z2 / (2.0 * k)) / (1.0 + z2 / k);
    const double z = std::sqrt(static_cast<double>(k)) * (p_tilde - p0) /
                     std::sqrt(p_tilde * (1.0 - p_tilde));
    return {p_tilde, z};
}

std::string_view to_string(SimonCriterion c) {
    return c == SimonCriterion::Minimax ? "minimax" : "optimal";
}

SimonDesign simon_search(const Hypotheses& hyp, SimonCriterion criterion, int max_n) {
    hyp.validate();
    if (max_n <= 0) max_n = 3 * score_sample_size(hyp);
    const BinomialTables null_tab(max_n, hyp.p0);
    const BinomialTables alt_tab(max_n, hyp.p1);
    const double power_target = 1.0 - hyp.beta;
    constexpr double kTie = 1e-12;

    bool found = false;
    SimonDesign best;
    best.criterion = criterion;
    best.expected_n0 = std::numeric_limits<double>::infinity();

    for (int n = 2; n <= max_n; ++n) {
        if (found && criterion == SimonCriterion::Minimax && n > best.n) break;
        for (int n1 = 1; n1 < n; ++n1) {
            // EN(p0) >= n1, so no larger first stage can beat the incumbent.
            if (static_cast<double>(n1) >= best.expected_n0 + kTie) break;
            const int n2 = n - n1;
            for (int r1 = 0; r1 < n1; ++r1) {
                const double pet0 = null_tab.at_most(n1, r1);
                const double en0 = n1 + (1.0 - pet0) * n2;
                if (en0 >= best.expected_n0 - kTie) continue;

                // Type I error falls with r; take the smallest admissible r.
                int lo = r1 + 1;
                int hi = n;  // sentinel: r = n never rejects
                while (lo < hi) {
                    const int mid = lo + (hi - lo) / 2;
                    if (two_stage_reject(null_tab, n1, r1, n2, mid) <= hyp.alpha) {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                const int r = lo;
                if (r >= n) continue;
                const double power = two_stage_reject(alt_tab, n1, r1, n2, r);
                if (power < power_target) continue;

                found = true;
                best.n1 = n1;
                best.r1 = r1;
                best.n = n;
                best.r = r;
                best.alpha_actual = two_stage_reject(null_tab, n1, r1, n2, r);
                best.power = power;
                best.expected_n0 = en0;
                best.pet0 = pet0;
            }
        }
    }
    if (!found) {
        throw SearchExhaustedError("no Simon design found with n <= " + std::to_string(max_n));
    }
    return best;
}

TwoStageCharacteristics simon_characteristics(const SimonDesign& design, double p) {
    const int n2 = design.n - design.n1;
    const double pet = binom_lower(design.n1, design.r1, p);
    double power = 0.0;
    for (int x1 = design.r1 + 1; x1 <= design.n1; ++x1) {
        power += binom_pmf(design.n1, x1, p) * binom_upper(n2, design.r - x1 + 1, p);
    }
    return {pet, design.n1 + (1.0 - pet) * n2, power};
}

}  // namespace curtail
