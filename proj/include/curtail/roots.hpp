#pragma once

#include <functional>
#include <optional>

namespace curtail {

// Bisection for a sign change of `fn` on [lo, hi]. Returns nullopt when the
// endpoint values share a sign.
inline std::optional<double> bisect(const std::function<double(double)>& fn, double lo,
                                    double hi, double tol) {
    double f_lo = fn(lo);
    const double f_hi = fn(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo < 0.0) == (f_hi < 0.0)) return std::nullopt;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = fn(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace curtail
