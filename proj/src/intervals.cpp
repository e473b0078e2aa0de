#include "curtail/intervals.hpp"

#include <algorithm>
#include <string>

#include "curtail/binomial.hpp"
#include "curtail/errors.hpp"
#include "curtail/estimation.hpp"
#include "curtail/roots.hpp"

namespace curtail {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("alpha must lie in (0, 0.5)");
}

void check_binomial(int m, int s) {
    if (m < 1 || s < 0 || s > m) throw DomainError("interval requires 0 <= s <= m, m >= 1");
}

// Lower end from a tail that rises in p: 0 if it already reaches alpha at 0.
double lower_end(const std::function<double(double)>& tail, double alpha) {
    if (tail(0.0) >= alpha) return 0.0;
    return bisect([&](double p) { return tail(p) - alpha; }, 0.0, 1.0, kIntervalTolerance)
        .value_or(1.0);
}

// Upper end from a tail that falls in p: 1 if it still reaches alpha at 1.
double upper_end(const std::function<double(double)>& tail, double alpha) {
    if (tail(1.0) >= alpha) return 1.0;
    return bisect([&](double p) { return tail(p) - alpha; }, 0.0, 1.0, kIntervalTolerance)
        .value_or(0.0);
}

// weight = 1 for exact tails, 1/2 for mid-p.
double ranks_below(const SamplingDistribution& dist, std::size_t r, double p, double weight) {
    double sum = weight * dist.pmf_at(r, p);
    for (std::size_t i = 0; i < r; ++i) sum += dist.pmf_at(i, p);
    return sum;
}

double ranks_above(const SamplingDistribution& dist, std::size_t r, double p, double weight) {
    double sum = weight * dist.pmf_at(r, p);
    for (std::size_t i = r + 1; i < dist.size(); ++i) sum += dist.pmf_at(i, p);
    return sum;
}

ConfidenceInterval make(double lower, double upper, IntervalMethod method, double alpha) {
    return {lower, std::max(lower, upper), method, 1.0 - 2.0 * alpha};
}

ConfidenceInterval stagewise_interval(const SamplingDistribution& dist, int m, int s,
                                      double alpha, double weight, IntervalMethod method) {
    check_alpha(alpha);
    const std::size_t r = dist.rank(m, s);
    const double lower =
        r == 0 ? 0.0
               : lower_end([&](double p) { return ranks_above(dist, r, p, weight); }, alpha);
    const double upper =
        r + 1 == dist.size()
            ? 1.0
            : upper_end([&](double p) { return ranks_below(dist, r, p, weight); }, alpha);
    return make(lower, upper, method, alpha);
}

}  // namespace

std::string_view to_string(IntervalMethod m) {
    switch (m) {
        case IntervalMethod::CP: return "CP";
        case IntervalMethod::JT: return "JT";
        case IntervalMethod::MidpCP: return "midp-CP";
        case IntervalMethod::MidpJT: return "midp-JT";
        case IntervalMethod::DufSat: return "DufSat";
    }
    return "unknown";
}

ConfidenceInterval cp_interval(int m, int s, double alpha) {
    check_alpha(alpha);
    check_binomial(m, s);
    const double lower =
        s == 0 ? 0.0 : lower_end([&](double p) { return binom_upper(m, s, p); }, alpha);
    const double upper =
        s == m ? 1.0 : upper_end([&](double p) { return binom_lower(m, s, p); }, alpha);
    return make(lower, upper, IntervalMethod::CP, alpha);
}

ConfidenceInterval midp_cp_interval(int m, int s, double alpha) {
    check_alpha(alpha);
    check_binomial(m, s);
    const double lower = s == 0 ? 0.0 : lower_end([&](double p) {
        return binom_upper(m, s + 1, p) + 0.5 * binom_pmf(m, s, p);
    }, alpha);
    const double upper = s == m ? 1.0 : upper_end([&](double p) {
        return binom_lower(m, s - 1, p) + 0.5 * binom_pmf(m, s, p);
    }, alpha);
    return make(lower, upper, IntervalMethod::MidpCP, alpha);
}

ConfidenceInterval jt_interval(const SamplingDistribution& dist, int m, int s, double alpha) {
    return stagewise_interval(dist, m, s, alpha, 1.0, IntervalMethod::JT);
}

ConfidenceInterval midp_jt_interval(const SamplingDistribution& dist, int m, int s,
                                    double alpha) {
    return stagewise_interval(dist, m, s, alpha, 0.5, IntervalMethod::MidpJT);
}

AcceptanceRegions::AcceptanceRegions(const SamplingDistribution& dist, double alpha, double step)
    : alpha_(alpha) {
    check_alpha(alpha);
    const int cells = grid_cells(step);
    const double target = 1.0 - 2.0 * alpha;
    const std::size_t last = dist.size() - 1;
    regions_.reserve(static_cast<std::size_t>(cells) + 1);

    for (int i = 0; i <= cells; ++i) {
        const double p = static_cast<double>(i) / cells;
        const auto f = dist.pmf_vector(p);
        std::size_t mode = 0;
        for (std::size_t r = 1; r <= last; ++r) {
            if (f[r] >= f[mode]) mode = r;
        }
        std::size_t lo = mode;
        std::size_t hi = mode;
        double mass = f[mode];
        while (mass < target && (lo > 0 || hi < last)) {
            const double left = lo > 0 ? f[lo - 1] : -1.0;
            const double right = hi < last ? f[hi + 1] : -1.0;
            if (right >= left) {
                mass += f[++hi];
            } else {
                mass += f[--lo];
            }
        }
        regions_.push_back({p, lo, hi});
    }

    // Widen so both ends are nondecreasing in p; coverage can only grow.
    for (std::size_t i = 1; i < regions_.size(); ++i) {
        regions_[i].upper = std::max(regions_[i].upper, regions_[i - 1].upper);
    }
    for (std::size_t i = regions_.size() - 1; i-- > 0;) {
        regions_[i].lower = std::min(regions_[i].lower, regions_[i + 1].lower);
    }
}

ConfidenceInterval AcceptanceRegions::interval(std::size_t rank) const {
    std::size_t first = regions_.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < regions_.size(); ++i) {
        if (regions_[i].contains(rank)) {
            if (first == regions_.size()) first = i;
            last = i;
        }
    }
    if (first == regions_.size()) {
        // No region holds this outcome; collapse onto the grid point where
        // the upper ends first pass it.
        const auto it = std::find_if(regions_.begin(), regions_.end(),
                                     [&](const Region& g) { return g.upper >= rank; });
        const double p = it == regions_.end() ? 1.0 : it->p;
        return make(p, p, IntervalMethod::DufSat, alpha_);
    }
    return make(regions_[first].p, regions_[last].p, IntervalMethod::DufSat, alpha_);
}

ConfidenceInterval dufsat_interval(const SamplingDistribution& dist, int m, int s, double alpha,
                                   double grid_step) {
    const std::size_t r = dist.rank(m, s);
    return AcceptanceRegions(dist, alpha, grid_step).interval(r);
}

std::vector<ConfidenceInterval> all_intervals(const SamplingDistribution& dist, int m, int s,
                                              double alpha, const AcceptanceRegions* regions) {
    const std::size_t r = dist.rank(m, s);
    if (regions != nullptr && regions->alpha() != alpha) {
        throw DomainError("acceptance regions were built for a different alpha");
    }
    std::vector<ConfidenceInterval> out;
    out.reserve(kAllIntervalMethods.size());
    out.push_back(cp_interval(m, s, alpha));
    out.push_back(jt_interval(dist, m, s, alpha));
    out.push_back(midp_cp_interval(m, s, alpha));
    out.push_back(midp_jt_interval(dist, m, s, alpha));
    if (regions != nullptr) {
        out.push_back(regions->interval(r));
    } else {
        out.push_back(AcceptanceRegions(dist, alpha).interval(r));
    }
    return out;
}

}  // namespace curtail
