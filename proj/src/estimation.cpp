#include "curtail/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curtail/errors.hpp"
#include "curtail/roots.hpp"

namespace curtail {

namespace {

// Mass of outcomes ranked above (strict) or at-or-above (m, s).
double upper_mass(const SamplingDistribution& dist, int m, int s, double p, Ordering ordering,
                  bool strict) {
    const std::size_t r = dist.rank(m, s);
    const auto& support = dist.support();
    double sum = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        bool above = false;
        if (ordering == Ordering::StageWise) {
            above = strict ? i > r : i >= r;
        } else {
            above = strict ? support[i].s > s : support[i].s >= s;
        }
        if (above) sum += dist.pmf_at(i, p);
    }
    return std::min(sum, 1.0);
}

// Grid root of a nondecreasing function crossing 0.5.
double grid_half_crossing(const std::function<double(double)>& fn, double step) {
    const int n = grid_cells(step);
    auto at = [&](int i) { return fn(static_cast<double>(i) / n); };
    if (at(0) >= 0.5) return 0.0;
    if (at(n) < 0.5) return 1.0;
    int lo = 0;
    int hi = n;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (at(mid) >= 0.5) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return (static_cast<double>(lo) + 0.5) / n;
}

}  // namespace

std::string_view to_string(Ordering o) {
    return o == Ordering::StageWise ? "stagewise" : "sample_space";
}

std::string_view to_string(BiasMode m) { return m == BiasMode::PlugIn ? "plug_in" : "root_solve"; }

int grid_cells(double step) {
    if (!(step > 0.0 && step <= 0.5)) throw DomainError("grid step must lie in (0, 0.5]");
    return static_cast<int>(std::lround(1.0 / step));
}

double naive_estimate(int m, int s) {
    if (m < 1 || s < 0 || s > m) {
        throw DomainError("naive estimate requires 0 <= s <= m, m >= 1");
    }
    return static_cast<double>(s) / static_cast<double>(m);
}

double bias_function(const SamplingDistribution& dist, double p) {
    return dist.expected_naive_estimate(p) - p;
}

double bias_adjusted_estimate(const SamplingDistribution& dist, int m, int s, BiasMode mode) {
    dist.rank(m, s);
    const double naive = naive_estimate(m, s);
    if (mode == BiasMode::PlugIn) {
        return std::clamp(naive - bias_function(dist, naive), 0.0, 1.0);
    }
    // p + B(p) = E[S/M | p]; find where it equals the observed naive estimate.
    const auto root = bisect([&](double p) { return dist.expected_naive_estimate(p) - naive; },
                             0.0, 1.0, 1e-8);
    return std::clamp(root.value_or(naive <= 0.5 ? 0.0 : 1.0), 0.0, 1.0);
}

double pvalue_P(const SamplingDistribution& dist, int m, int s, double p, Ordering ordering) {
    return upper_mass(dist, m, s, p, ordering, false);
}

double pvalue_Q(const SamplingDistribution& dist, int m, int s, double p, Ordering ordering) {
    return upper_mass(dist, m, s, p, ordering, true);
}

MedianUnbiased median_unbiased_estimate(const SamplingDistribution& dist, int m, int s,
                                        Ordering ordering, double step) {
    dist.rank(m, s);
    MedianUnbiased out;
    out.lower = grid_half_crossing(
        [&](double p) { return pvalue_P(dist, m, s, p, ordering); }, step);
    out.upper = grid_half_crossing(
        [&](double p) { return pvalue_Q(dist, m, s, p, ordering); }, step);
    out.estimate = 0.5 * (out.lower + out.upper);
    return out;
}

EstimateReport estimate(const SamplingDistribution& dist, int m, int s, Ordering ordering,
                        BiasMode bias_mode, double step) {
    const auto mue = median_unbiased_estimate(dist, m, s, ordering, step);
    return {naive_estimate(m, s),
            bias_adjusted_estimate(dist, m, s, bias_mode),
            mue.estimate,
            mue.lower,
            mue.upper,
            ordering,
            bias_mode};
}

}  // namespace curtail
