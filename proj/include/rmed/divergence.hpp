// divergence.hpp
#pragma once

#include <cmath>
#include <stdexcept>

namespace rmed {

// Bernoulli parameter, checked on construction.
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw std::domain_error("probability outside [0,1]");
        }
    }
    constexpr double value() const { return value_; }
    constexpr operator double() const { return value_; }

private:
    double value_{0.5};
};

namespace detail {

// x * log(x / y) with 0 log 0 = 0.
inline double xlogxy(double x, double y) {
    return x == 0.0 ? 0.0 : x * std::log(x / y);
}

}  // namespace detail

/// KL divergence d(p,q) between Bernoulli(p) and Bernoulli(q), natural log.
/// p may sit on {0,1}; q must be strictly interior.
inline double bernoulli_kl(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("bernoulli_kl: p outside [0,1]");
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("bernoulli_kl: q must lie in (0,1)");
    const double d = detail::xlogxy(p, q) + detail::xlogxy(1.0 - p, 1.0 - q);
    // rounding can leave a tiny negative residue near p == q
    return d > 0.0 ? d : 0.0;
}

/// d(p,q) when p < q, zero otherwise.
inline double kl_plus(double p, double q) {
    const double d = bernoulli_kl(p, q);
    return p < q ? d : 0.0;
}

}  // namespace rmed
