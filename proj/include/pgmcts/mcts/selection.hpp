#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/random.hpp"

namespace pgmcts::mcts {

/// Per-edge search statistics.
struct EdgeStats {
    int visits = 0;          // N: selections, incremented when the edge is chosen
    int virtual_losses = 0;  // W: selections whose backpropagation is still pending
    double value_sum = 0.0;  // Q_total
    double mean_value = 0.0; // Q_bar; holds the optimistic initial value until the first backprop
    double prior = 0.0;      // P(s, a) after masking and renormalization
    int updates = 0;         // completed backpropagations
    double min_return = 0.0; // extrema of individual returns, used by return-based normalization
    double max_return = 0.0;
};

/// L(s, a) = w * W(s, a) * |Q_bar(s, a)|.
inline double virtual_loss(const EdgeStats& e, double weight) noexcept {
    return weight * static_cast<double>(e.virtual_losses) * std::abs(e.mean_value);
}

/// U(s, a) = c_puct * P(s, a) * sqrt(N(s)) / (1 + N(s, a)).
inline double puct_bonus(const EdgeStats& e, int parent_visits, double c_puct) noexcept {
    return c_puct * e.prior * std::sqrt(static_cast<double>(parent_visits)) / (1.0 + static_cast<double>(e.visits));
}

/**
 * Node-local max-min scaling onto [-1, 1].
 *
 * Every output is 1 when all inputs are equal (including a single input).
 */
inline std::vector<double> normalize_values(std::span<const double> values) {
    std::vector<double> out(values.size(), 1.0);
    if (values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double max = *hi;
    if (!(max > min)) return out;
    const double range = max - min;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = 2.0 * (values[i] - min) / range - 1.0;
        out[i] = std::clamp(v, -1.0, 1.0);
    }
    return out;
}

struct SelectionParams {
    double c_puct = 1.0;
    double virtual_loss_weight = 0.01;
    bool normalize_by_returns = false;
};

/// Q_bar - L for every edge.
inline std::vector<double> effective_values(std::span<const EdgeStats> edges, double weight) {
    std::vector<double> v(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) v[i] = edges[i].mean_value - virtual_loss(edges[i], weight);
    return v;
}

/**
 * (Q_bar - L)_norm + U for every edge of a node.
 *
 * The parent count N(s) is the node's visit count including the visit in
 * progress, i.e. 1 + sum of edge visits, so a freshly expanded node already
 * ranks its edges by prior. With normalize_by_returns the scaling range is the span of individual
 * returns seen below the node instead of the span of the edge means.
 */
inline std::vector<double> selection_scores(std::span<const EdgeStats> edges, const SelectionParams& p) {
    int parent_visits = 1;
    for (const auto& e : edges) parent_visits += e.visits;
    const auto values = effective_values(edges, p.virtual_loss_weight);
    std::vector<double> norm;
    if (p.normalize_by_returns) {
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (const auto& e : edges) {
            if (e.updates == 0) continue;
            lo = any ? std::min(lo, e.min_return) : e.min_return;
            hi = any ? std::max(hi, e.max_return) : e.max_return;
            any = true;
        }
        norm.assign(edges.size(), 1.0);
        if (any && hi > lo)
            for (std::size_t i = 0; i < edges.size(); ++i)
                norm[i] = std::clamp(2.0 * (values[i] - lo) / (hi - lo) - 1.0, -1.0, 1.0);
    } else {
        norm = normalize_values(values);
    }
    for (std::size_t i = 0; i < edges.size(); ++i) norm[i] += puct_bonus(edges[i], parent_visits, p.c_puct);
    return norm;
}

/// Indices attaining the maximum score (exact comparison).
inline std::vector<int> argmax_set(std::span<const double> scores) {
    std::vector<int> best;
    double top = -INFINITY;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > top) {
            top = scores[i];
            best.assign(1, static_cast<int>(i));
        } else if (scores[i] == top) {
            best.push_back(static_cast<int>(i));
        }
    }
    return best;
}

/**
 * Picks argmax of selection_scores (uniform random among exact ties) and
 * records the selection: N <- N + 1, W <- W + 1.
 */
inline std::size_t select_edge(std::span<EdgeStats> edges, const SelectionParams& p, CounterRng& rng) {
    if (edges.empty()) throw ContractError("select_edge: node has no edges (terminal or unexpanded)");
    const auto scores = selection_scores(edges, p);
    const auto best = argmax_set(scores);
    const std::size_t i =
        best.empty() ? rng.below(edges.size()) : static_cast<std::size_t>(best[rng.below(best.size())]);
    ++edges[i].visits;
    ++edges[i].virtual_losses;
    return i;
}

}  // namespace pgmcts::mcts
