#pragma once

#include <random>
#include <span>
#include <vector>

#include "pgmcts/random.hpp"

namespace pgmcts::training {

/// Dir(alpha) sample of dimension n via normalized Gamma(alpha, 1) draws.
inline std::vector<double> sample_dirichlet(std::size_t n, double alpha, CounterRng& rng) {
    std::vector<double> x(n, 0.0);
    if (n == 0) return x;
    std::gamma_distribution<double> gamma(alpha, 1.0);
    double sum = 0.0;
    for (auto& v : x) {
        v = gamma(rng);
        sum += v;
    }
    if (!(sum > 0.0)) {
        // Every draw underflowed (tiny alpha): the limit puts all mass on one component.
        std::fill(x.begin(), x.end(), 0.0);
        x[rng.below(n)] = 1.0;
        return x;
    }
    for (auto& v : x) v /= sum;
    return x;
}

/// (1 - epsilon) * priors + epsilon * Dir(alpha), over the given (legal) entries.
inline std::vector<double> dirichlet_mix(std::span<const double> priors, double alpha, double epsilon,
                                         CounterRng& rng) {
    std::vector<double> out(priors.begin(), priors.end());
    if (epsilon <= 0.0 || priors.empty()) return out;
    const auto noise = sample_dirichlet(priors.size(), alpha, rng);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - epsilon) * priors[i] + epsilon * noise[i];
    return out;
}

}  // namespace pgmcts::training
