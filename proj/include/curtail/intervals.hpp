#pragma once

// Two-sided (1 - 2 alpha) confidence intervals for the response rate after a
// curtailed trial stops at (m, s).

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "curtail/sampling_dist.hpp"

namespace curtail {

enum class IntervalMethod { CP, JT, MidpCP, MidpJT, DufSat };

inline constexpr std::array kAllIntervalMethods{IntervalMethod::CP, IntervalMethod::JT,
                                                IntervalMethod::MidpCP, IntervalMethod::MidpJT,
                                                IntervalMethod::DufSat};

std::string_view to_string(IntervalMethod m);

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 1.0;
    IntervalMethod method = IntervalMethod::CP;
    double level = 0.95;

    bool contains(double p) const { return lower <= p && p <= upper; }
    double length() const { return upper - lower; }
};

inline constexpr double kIntervalTolerance = 1e-10;

// Clopper-Pearson, treating s as Binomial(m, p) and ignoring the monitoring.
ConfidenceInterval cp_interval(int m, int s, double alpha);
ConfidenceInterval midp_cp_interval(int m, int s, double alpha);

// Exact interval from the stage-wise ordering of (M, S):
//   Pr[(M,S) <= (m,s) | p_U] = alpha,  Pr[(M,S) >= (m,s) | p_L] = alpha.
ConfidenceInterval jt_interval(const SamplingDistribution& dist, int m, int s, double alpha);
ConfidenceInterval midp_jt_interval(const SamplingDistribution& dist, int m, int s, double alpha);

// Acceptance regions [L(p_i), U(p_i)] over the stage-wise ranks for every
// grid point p_i = i * step. Each region is grown from the modal outcome,
// always adding the neighbouring outcome with the larger pmf (ties go up),
// until it holds at least 1 - 2 alpha. Lower and upper ends are then made
// nondecreasing in p_i by widening.
class AcceptanceRegions {
public:
    AcceptanceRegions(const SamplingDistribution& dist, double alpha, double step = 1e-4);

    struct Region {
        double p = 0.0;
        std::size_t lower = 0;  // rank of L(p_i)
        std::size_t upper = 0;  // rank of U(p_i)

        bool contains(std::size_t rank) const { return lower <= rank && rank <= upper; }
    };

    const std::vector<Region>& regions() const { return regions_; }
    double alpha() const { return alpha_; }

    // Smallest and largest p_i whose region holds the outcome of this rank.
    ConfidenceInterval interval(std::size_t rank) const;

private:
    double alpha_;
    std::vector<Region> regions_;
};

ConfidenceInterval dufsat_interval(const SamplingDistribution& dist, int m, int s, double alpha,
                                   double grid_step = 1e-4);

// All five methods at one outcome, in kAllIntervalMethods order. Pass
// prebuilt regions to skip the Duffy-Santner grid sweep.
std::vector<ConfidenceInterval> all_intervals(const SamplingDistribution& dist, int m, int s,
                                              double alpha,
                                              const AcceptanceRegions* regions = nullptr);

}  // namespace curtail
