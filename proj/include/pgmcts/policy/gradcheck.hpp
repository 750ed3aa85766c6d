#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pgmcts/policy/conv_net.hpp"
#include "pgmcts/random.hpp"

namespace pgmcts::policy {

struct GradCheckOptions {
    double step = 1e-4;             // central difference step
    double tolerance = 1e-4;        // on the relative error
    double absolute_floor = 1e-8;   // below this magnitude both gradients are compared absolutely
    std::size_t max_coordinates = 0;  // 0 checks every parameter
    std::uint64_t seed = 0;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    double max_absolute_error = 0.0;  // among coordinates under the absolute floor
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    bool passed = true;
};

/**
 * Coordinates to check: all of them, or a sample that draws from every
 * weight and bias tensor in proportion, at least one each.
 */
inline std::vector<std::size_t> gradcheck_coordinates(const std::vector<std::pair<std::size_t, std::size_t>>& blocks,
                                                      std::size_t total, std::size_t max_coordinates,
                                                      std::uint64_t seed) {
    std::vector<std::size_t> out;
    if (max_coordinates == 0 || max_coordinates >= total) {
        out.resize(total);
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    CounterRng rng(derive_key(seed, {0x9c4eULL}));
    for (const auto& [offset, size] : blocks) {
        std::size_t want = std::max<std::size_t>(1, max_coordinates * size / total);
        want = std::min(want, size);
        // Floyd's sampling without replacement.
        std::vector<std::size_t> pick;
        for (std::size_t j = size - want; j < size; ++j) {
            const std::size_t t = rng.below(j + 1);
            if (std::find(pick.begin(), pick.end(), t) == pick.end())
                pick.push_back(t);
            else
                pick.push_back(j);
        }
        std::sort(pick.begin(), pick.end());
        for (std::size_t p : pick) out.push_back(offset + p);
    }
    return out;
}

/// Compares a supplied analytic gradient against central differences of the loss on one sample.
inline GradCheckReport gradient_check(ConvPolicyNet<double>& net, const Planes& input, int target,
                                      std::span<const double> analytic, const GradCheckOptions& opts = {}) {
    if (analytic.size() != net.parameter_count()) throw ShapeError("gradient_check: gradient size mismatch");
    const Planes* x = &input;
    const std::span<const Planes> xs(x, 1);
    const std::span<const int> ys(&target, 1);
    GradCheckReport rep;
    auto params = net.parameters();
    for (std::size_t i :
         gradcheck_coordinates(net.parameter_blocks(), net.parameter_count(), opts.max_coordinates, opts.seed)) {
        const double saved = params[i];
        params[i] = saved + opts.step;
        const double up = net.loss(xs, ys);
        params[i] = saved - opts.step;
        const double down = net.loss(xs, ys);
        params[i] = saved;
        const double numeric = (up - down) / (2.0 * opts.step);
        const double a = analytic[i];
        const double scale = std::max(std::abs(a), std::abs(numeric));
        const double diff = std::abs(a - numeric);
        ++rep.checked;
        if (scale < opts.absolute_floor) {
            rep.max_absolute_error = std::max(rep.max_absolute_error, diff);
            if (diff >= opts.absolute_floor) rep.passed = false;
            continue;
        }
        const double rel = diff / scale;
        if (rel > rep.max_relative_error) {
            rep.max_relative_error = rel;
            rep.worst_index = i;
        }
        if (!(rel < opts.tolerance)) rep.passed = false;
    }
    return rep;
}

/// Checks the network's own backpropagation on one sample.
inline GradCheckReport gradient_check(ConvPolicyNet<double>& net, const Planes& input, int target,
                                      const GradCheckOptions& opts = {}) {
    std::vector<double> grad(net.parameter_count());
    const Planes* x = &input;
    net.loss_and_gradients(std::span<const Planes>(x, 1), std::span<const int>(&target, 1), grad);
    return gradient_check(net, input, target, grad, opts);
}

}  // namespace pgmcts::policy
