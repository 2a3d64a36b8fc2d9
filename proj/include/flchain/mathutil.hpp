// Small probability helpers used by the queue model.
#pragma once

#include <cmath>
#include <limits>

namespace flchain {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Poisson pmf P(N = k) for N ~ Poisson(mean), computed in log space so large
// means underflow to zero instead of producing NaN.
inline double poisson_pmf(int k, double mean) {
    if (k < 0) return 0.0;
    if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
    const double lp = k * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0);
    return std::exp(lp);
}

// P(Erlang(k, rate) <= t): probability that the k-th Poisson(rate) arrival
// has occurred by time t. Equals P(N(t) >= k).
inline double erlang_cdf(int k, double rate, double t) {
    if (k <= 0) return 1.0;
    if (t <= 0.0) return 0.0;
    if (t == kInfinity) return 1.0;
    const double mean = rate * t;
    double below = 0.0;  // P(N(t) < k)
    for (int j = 0; j < k; ++j) below += poisson_pmf(j, mean);
    if (below > 1.0) below = 1.0;
    return 1.0 - below;
}

inline double erlang_survival(int k, double rate, double t) {
    return 1.0 - erlang_cdf(k, rate, t);
}

}  // namespace flchain
