#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace pgmcts::bench {

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    double ci_low = 0.0;  // normal-approximation interval on the mean
    double ci_high = 0.0;

    double half_width() const noexcept { return (ci_high - ci_low) / 2; }
};

inline Summary summarize(std::span<const double> xs, double z = kZ99) {
    if (xs.empty()) throw std::invalid_argument("summarize: no values");
    Summary s;
    s.n = xs.size();
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    const double half = z * s.stddev / std::sqrt(static_cast<double>(s.n));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

/// Interval on mean(a - b) for paired observations.
inline Summary paired_difference(std::span<const double> a, std::span<const double> b, double z = kZ99) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_difference: length mismatch");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return summarize(d, z);
}

}  // namespace pgmcts::bench
