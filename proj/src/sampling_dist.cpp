#include "curtail/sampling_dist.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "curtail/binomial.hpp"
#include "curtail/errors.hpp"

namespace curtail {

std::string_view to_string(OutcomeKind k) {
    return k == OutcomeKind::Efficacy ? "efficacy" : "futility";
}

// GCC flags a bogus memcpy bound inside the inlined cpp_int shift.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wstringop-overflow"
#pragma GCC diagnostic ignored "-Wstringop-overread"
double log_bigint(const BigInt& x) {
    if (x <= 0) return -INFINITY;
    const auto bits = boost::multiprecision::msb(x);
    if (bits < 1000) return std::log(x.convert_to<double>());
    const auto shift = static_cast<unsigned>(bits - 60);
    const BigInt top = x >> shift;
    return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}
#pragma GCC diagnostic pop

SamplingDistribution::SamplingDistribution(Design design) : design_(std::move(design)) {
    const int u = design_.u();
    const int max_n = design_.max_n();
    continuation_.assign(static_cast<std::size_t>(max_n) + 1,
                         std::vector<BigInt>(static_cast<std::size_t>(u), BigInt(0)));
    continuation_[0][0] = 1;

    std::vector<TerminalOutcome> futility;
    std::vector<TerminalOutcome> efficacy;
    for (int k = 1; k <= max_n; ++k) {
        const auto& prev = continuation_[k - 1];
        const int lk = design_.futility_bound(k);
        // Efficacy is entered by a response from u - 1.
        if (prev[u - 1] != 0) {
            efficacy.push_back({k, u, OutcomeKind::Efficacy, prev[u - 1]});
        }
        // Futility is entered by a non-response from l_k = l_{k-1} + 1.
        if (lk >= 0 && prev[lk] != 0) {
            futility.push_back({k, lk, OutcomeKind::Futility, prev[lk]});
        }
        for (int s = std::max(lk + 1, 0); s < u; ++s) {
            BigInt n = prev[s];
            if (s > 0) n += prev[s - 1];
            continuation_[k][s] = std::move(n);
        }
    }

    // Futility stops occur once per stage with s rising by one, so stage
    // order is already ascending s; efficacy stops go latest-first.
    support_ = std::move(futility);
    support_.insert(support_.end(), efficacy.rbegin(), efficacy.rend());
    log_counts_.reserve(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i) {
        log_counts_.push_back(log_bigint(support_[i].path_count));
        index_.emplace(std::pair{support_[i].m, support_[i].s}, i);
    }
}

const BigInt& SamplingDistribution::continuation_count(int k, int s) const {
    if (k < 0 || k > design_.max_n() || s < 0 || s >= design_.u()) {
        throw DomainError("continuation state (" + std::to_string(k) + ", " + std::to_string(s) +
                          ") out of range");
    }
    return continuation_[k][s];
}

bool SamplingDistribution::contains(int m, int s) const { return index_.contains({m, s}); }

std::size_t SamplingDistribution::rank(int m, int s) const {
    const auto it = index_.find({m, s});
    if (it == index_.end()) {
        throw NotInSupportError("(" + std::to_string(m) + ", " + std::to_string(s) +
                                ") is not a terminal outcome of design u=" +
                                std::to_string(design_.u()) + ", K=" +
                                std::to_string(design_.max_n()));
    }
    return it->second;
}

double SamplingDistribution::pmf_at(std::size_t r, double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
    const auto& o = support_[r];
    return std::exp(log_counts_[r] + log_bernoulli_path(o.s, o.m - o.s, p));
}

double SamplingDistribution::pmf(int m, int s, double p) const { return pmf_at(rank(m, s), p); }

std::vector<double> SamplingDistribution::pmf_vector(double p) const {
    std::vector<double> out(support_.size());
    for (std::size_t r = 0; r < support_.size(); ++r) out[r] = pmf_at(r, p);
    return out;
}

std::strong_ordering SamplingDistribution::compare(const TerminalOutcome& a,
                                                   const TerminalOutcome& b) const {
    const auto ra = rank(a.m, a.s);
    const auto rb = rank(b.m, b.s);
    return ra <=> rb;
}

double SamplingDistribution::expectation(
    double p, const std::function<double(const TerminalOutcome&)>& g) const {
    double sum = 0.0;
    for (std::size_t r = 0; r < support_.size(); ++r) {
        const double f = pmf_at(r, p);
        if (f != 0.0) sum += g(support_[r]) * f;
    }
    return sum;
}

double SamplingDistribution::expected_sample_size(double p) const {
    return expectation(p, [](const TerminalOutcome& o) { return static_cast<double>(o.m); });
}

double SamplingDistribution::exact_power(double p) const {
    return expectation(p, [](const TerminalOutcome& o) {
        return o.kind == OutcomeKind::Efficacy ? 1.0 : 0.0;
    });
}

double SamplingDistribution::expected_naive_estimate(double p) const {
    return expectation(p, [](const TerminalOutcome& o) {
        return static_cast<double>(o.s) / static_cast<double>(o.m);
    });
}

SamplingDistribution build_distribution(const Design& design) {
    return SamplingDistribution(design);
}

double terminal_pmf(const SamplingDistribution& dist, int m, int s, double p) {
    return dist.pmf(m, s, p);
}

std::strong_ordering stagewise_compare(const TerminalOutcome& a, const TerminalOutcome& b) {
    if (a.kind != b.kind) return a.kind == OutcomeKind::Futility ? std::strong_ordering::less
                                                                 : std::strong_ordering::greater;
    if (a.kind == OutcomeKind::Futility) return a.s <=> b.s;
    return b.m <=> a.m;
}

std::map<std::pair<int, int>, OracleCell> brute_force_oracle(const Design& design, double p) {
    const int max_n = design.max_n();
    if (max_n > kOracleMaxN) {
        throw SizeError("brute-force oracle supports K <= " + std::to_string(kOracleMaxN) +
                        " (got " + std::to_string(max_n) + ")");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");

    std::map<std::pair<int, int>, OracleCell> cells;
    const std::uint64_t total = std::uint64_t{1} << max_n;
    for (std::uint64_t seq = 0; seq < total; ++seq) {
        int s = 0;
        int stop_m = 0;
        int stop_s = 0;
        for (int k = 1; k <= max_n; ++k) {
            s += static_cast<int>((seq >> (k - 1)) & 1U);
            if (stop_m == 0 && classify_state(design, k, s) != StageDecision::Continue) {
                stop_m = k;
                stop_s = s;
            }
        }
        // Weight of the whole sequence; summed over completions this is the
        // probability of the stopping prefix.
        const int ones = std::popcount(seq);
        auto& cell = cells[{stop_m, stop_s}];
        cell.probability += std::exp(log_bernoulli_path(ones, max_n - ones, p));
        cell.sequences += 1;
    }
    return cells;
}

void write_support_csv(std::ostream& out, const SamplingDistribution& dist,
                       std::span<const double> ps) {
    out << "m,s,kind,c_ms";
    char buf[64];
    for (double p : ps) {
        std::snprintf(buf, sizeof buf, ",f_%g", p);
        out << buf;
    }
    out << '\n';
    for (std::size_t r = 0; r < dist.size(); ++r) {
        const auto& o = dist.support()[r];
        out << o.m << ',' << o.s << ',' << to_string(o.kind) << ',' << o.path_count.str();
        for (double p : ps) {
            std::snprintf(buf, sizeof buf, ",%.17g", dist.pmf_at(r, p));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace curtail
