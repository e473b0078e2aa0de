#pragma once

// Point estimation of the response rate at the end of a curtailed trial.

#include <string_view>

#include "curtail/sampling_dist.hpp"

namespace curtail {

// Ordering of terminal outcomes used by the p-value functions.
//   SampleSpace: by the terminal responder count S alone.
//   StageWise:   the stage-wise rank (futility by s, then efficacy latest-first).
enum class Ordering { SampleSpace, StageWise };

enum class BiasMode {
    PlugIn,     // p_n - B(p_n)
    RootSolve,  // p such that p + B(p) = p_n
};

std::string_view to_string(Ordering o);
std::string_view to_string(BiasMode m);

struct EstimateReport {
    double naive = 0.0;
    double bias_adjusted = 0.0;
    double mue = 0.0;
    double mue_lower = 0.0;
    double mue_upper = 0.0;
    Ordering ordering = Ordering::StageWise;
    BiasMode bias_mode = BiasMode::PlugIn;
};

double naive_estimate(int m, int s);

// B(p) = E[S/M | p] - p.
double bias_function(const SamplingDistribution& dist, double p);

double bias_adjusted_estimate(const SamplingDistribution& dist, int m, int s,
                              BiasMode mode = BiasMode::PlugIn);

// P(p): probability of an outcome at or above (m, s); Q(p): strictly above.
// Both are nondecreasing in p. Their difference is the mass of the outcomes
// tied with (m, s) under the ordering.
double pvalue_P(const SamplingDistribution& dist, int m, int s, double p, Ordering ordering);
double pvalue_Q(const SamplingDistribution& dist, int m, int s, double p, Ordering ordering);

struct MedianUnbiased {
    double lower = 0.0;  // P(lower) = 0.5
    double upper = 0.0;  // Q(upper) = 0.5
    double estimate = 0.0;
};

// Roots located on a grid of spacing `step` and reported as the midpoint of
// the bracketing grid cell. A function already >= 0.5 at p = 0 gives 0; one
// still below 0.5 at p = 1 gives 1.
MedianUnbiased median_unbiased_estimate(const SamplingDistribution& dist, int m, int s,
                                        Ordering ordering, double step = 1e-4);

EstimateReport estimate(const SamplingDistribution& dist, int m, int s,
                        Ordering ordering = Ordering::StageWise,
                        BiasMode bias_mode = BiasMode::PlugIn, double step = 1e-4);

// Number of grid cells for a spacing, e.g. 10000 for 1e-4.
int grid_cells(double step);

}  // namespace curtail
