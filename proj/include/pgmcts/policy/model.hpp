#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pgmcts/planes.hpp"
#include "pgmcts/samegame/encoding.hpp"
#include "pgmcts/samegame/rules.hpp"

namespace pgmcts::policy {

/// State -> action distribution over a fixed-size output grid.
class PolicyModel {
public:
    virtual ~PolicyModel() = default;

    virtual int output_size() const = 0;

    /// Probability vector of length output_size(). Must be safe to call concurrently.
    virtual std::vector<float> evaluate(const Planes& input) const = 0;

    virtual std::vector<std::vector<float>> evaluate_batch(std::span<const Planes> inputs) const {
        std::vector<std::vector<float>> out;
        out.reserve(inputs.size());
        for (const auto& x : inputs) out.push_back(evaluate(x));
        return out;
    }
};

/**
 * Restricts a raw distribution to the legal indices and rescales it to sum 1.
 *
 * Falls back to uniform over the legal set when the legal mass is below 1e-12
 * or not finite. Returns a vector of raw.size().
 */
inline std::vector<double> masked_renormalize(std::span<const float> raw, std::span<const int> legal,
                                              bool* degenerate = nullptr) {
    if (legal.empty()) throw std::invalid_argument("masked_renormalize: empty legal action set");
    std::vector<double> out(raw.size(), 0.0);
    double mass = 0.0;
    for (int i : legal) {
        const double p = raw[static_cast<std::size_t>(i)];
        if (!(p >= 0.0) || !std::isfinite(p)) {
            mass = std::nan("");
            break;
        }
        mass += p;
    }
    const bool fallback = !(mass >= 1e-12) || !std::isfinite(mass);
    if (degenerate) *degenerate = fallback;
    if (fallback) {
        const double u = 1.0 / static_cast<double>(legal.size());
        for (int i : legal) out[static_cast<std::size_t>(i)] = u;
        return out;
    }
    for (int i : legal) out[static_cast<std::size_t>(i)] = raw[static_cast<std::size_t>(i)] / mass;
    return out;
}

/// 1/|legal| on each legal action's grid index, 0 elsewhere.
inline std::vector<float> uniform_policy(const samegame::Board& b) {
    const auto legal = samegame::legal_actions(b);
    if (legal.empty()) throw ContractError("uniform_policy: board is terminal");
    std::vector<float> out(static_cast<std::size_t>(b.cell_count()), 0.0f);
    const float u = 1.0f / static_cast<float>(legal.size());
    for (const auto& a : legal) out[static_cast<std::size_t>(samegame::action_index(b, a))] = u;
    return out;
}

}  // namespace pgmcts::policy
