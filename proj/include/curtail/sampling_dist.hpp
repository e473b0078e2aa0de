#pragma once

// Exact distribution of the terminal state (M, S) of a curtailed design:
// the stopping stage M and the responder count S at that stage.
//
// Every terminal outcome is either an efficacy stop (m, u) with u <= m <= K
// or a futility stop (m, l_m) with K - u + 1 <= m <= K. Its probability is
// c_{m,s} p^s (1-p)^(m-s), where c_{m,s} counts the response sequences that
// reach (m, s) without stopping earlier. Path counts come from a lattice DP
// over continuation states l_k < s < u.

#include <compare>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "curtail/exact_core.hpp"

namespace curtail {

using BigInt = boost::multiprecision::cpp_int;

enum class OutcomeKind { Futility, Efficacy };

std::string_view to_string(OutcomeKind k);

struct TerminalOutcome {
    int m = 0;  // patients enrolled at the stop
    int s = 0;  // responders at the stop
    OutcomeKind kind = OutcomeKind::Futility;
    BigInt path_count = 0;
};

class SamplingDistribution {
public:
    explicit SamplingDistribution(Design design);

    const Design& design() const { return design_; }

    // Terminal outcomes in stage-wise order: futility stops by ascending s,
    // then efficacy stops by descending m. Index in this vector is the rank.
    const std::vector<TerminalOutcome>& support() const { return support_; }
    std::size_t size() const { return support_.size(); }

    // Sequences reaching continuation state (k, s); zero for states that are
    // stopped or unreachable. 0 <= k <= K, 0 <= s < u.
    const BigInt& continuation_count(int k, int s) const;

    // Rank of (m, s) in the stage-wise ordering; throws NotInSupportError.
    std::size_t rank(int m, int s) const;
    bool contains(int m, int s) const;

    const TerminalOutcome& outcome(int m, int s) const { return support_[rank(m, s)]; }

    // f(m, s | p).
    double pmf(int m, int s, double p) const;
    double pmf_at(std::size_t rank, double p) const;

    // f at every support point, in rank order.
    std::vector<double> pmf_vector(double p) const;

    // Stage-wise comparison; both outcomes must belong to this support.
    std::strong_ordering compare(const TerminalOutcome& a, const TerminalOutcome& b) const;

    // E[g(M, S) | p].
    double expectation(double p, const std::function<double(const TerminalOutcome&)>& g) const;

    double expected_sample_size(double p) const;
    double exact_power(double p) const;
    double expected_naive_estimate(double p) const;

private:
    Design design_;
    std::vector<std::vector<BigInt>> continuation_;  // [k][s]
    std::vector<TerminalOutcome> support_;
    std::vector<double> log_counts_;
    std::map<std::pair<int, int>, std::size_t> index_;
};

SamplingDistribution build_distribution(const Design& design);

// Free-standing f(m, s | p) for a prebuilt distribution.
double terminal_pmf(const SamplingDistribution& dist, int m, int s, double p);

// Stage-wise order on outcomes of one design, without a support lookup:
// futility before efficacy, futility by ascending s, efficacy by descending m.
std::strong_ordering stagewise_compare(const TerminalOutcome& a, const TerminalOutcome& b);

double log_bigint(const BigInt& x);

// Enumerate all 2^K response sequences, run them through classify_state and
// record where each one stops. Independent of the lattice DP.
struct OracleCell {
    double probability = 0.0;
    // Full-length sequences whose prefix stops here: c_{m,s} * 2^(K - m).
    std::uint64_t sequences = 0;
};

inline constexpr int kOracleMaxN = 24;

std::map<std::pair<int, int>, OracleCell> brute_force_oracle(const Design& design, double p);

// CSV with columns m,s,kind,c_ms and one f column per requested p.
void write_support_csv(std::ostream& out, const SamplingDistribution& dist,
                       std::span<const double> ps);

}  // namespace curtail
