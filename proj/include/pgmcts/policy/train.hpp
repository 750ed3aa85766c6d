#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/planes.hpp"
#include "pgmcts/policy/conv_net.hpp"
#include "pgmcts/random.hpp"

namespace pgmcts::policy {

/// One supervised example: encoded state and the index of the action played there.
struct TrainSample {
    Planes input;
    int target = 0;
    std::uint32_t generation = 0;  // generation whose episodes produced it
    std::uint64_t episode = 0;     // source episode id within that generation
    std::uint32_t step = 0;        // move number within the episode
};

struct AdamOptions {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam over a flat parameter vector.
template <std::floating_point T>
class Adam {
public:
    Adam(std::size_t n, AdamOptions opts = {}) : opts_(opts), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<T> params, std::span<const T> grad) {
        if (params.size() != m_.size() || grad.size() != m_.size()) throw ShapeError("adam: size mismatch");
        ++t_;
        const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grad[i];
            m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g;
            v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g * g;
            const double mhat = m_[i] / c1;
            const double vhat = v_[i] / c2;
            params[i] -= static_cast<T>(opts_.learning_rate * mhat / (std::sqrt(vhat) + opts_.epsilon));
        }
    }

    std::uint64_t steps() const noexcept { return t_; }

private:
    AdamOptions opts_;
    std::vector<double> m_, v_;
    std::uint64_t t_ = 0;
};

/// Stops after `patience` consecutive epochs without a strict improvement of the validation loss.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {
        if (patience < 1) throw ConfigError("patience must be >= 1");
    }

    /// Records the loss of the next epoch (1-based). Returns true when training should stop.
    bool update(double validation_loss) {
        ++epoch_;
        if (validation_loss < best_loss_) {
            best_loss_ = validation_loss;
            best_epoch_ = epoch_;
            stale_ = 0;
            improved_ = true;
        } else {
            ++stale_;
            improved_ = false;
        }
        return stale_ >= patience_;
    }

    bool improved() const noexcept { return improved_; }
    int best_epoch() const noexcept { return best_epoch_; }
    double best_loss() const noexcept { return best_loss_; }
    int epochs() const noexcept { return epoch_; }

private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    int stale_ = 0;
    bool improved_ = false;
    double best_loss_ = std::numeric_limits<double>::infinity();
};

struct TrainOptions {
    int batch_size = 256;
    int patience = 3;
    int max_epochs = 100;
    AdamOptions adam{};
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss;       // mean minibatch loss of each epoch
    std::vector<double> validation_loss;  // after each epoch
    int best_epoch = 0;                   // 1-based; the returned parameters are from this epoch
    double best_validation_loss = 0.0;
    std::uint64_t steps = 0;
};

/// Mean cross-entropy over a sample set, evaluated in chunks.
template <std::floating_point T>
double dataset_loss(const ConvPolicyNet<T>& net, std::span<const TrainSample> samples, std::size_t chunk = 256) {
    if (samples.empty()) throw ConfigError("dataset_loss: empty sample set");
    double total = 0.0;
    std::vector<Planes> xs;
    std::vector<int> ys;
    for (std::size_t start = 0; start < samples.size(); start += chunk) {
        const std::size_t n = std::min(chunk, samples.size() - start);
        xs.clear();
        ys.clear();
        for (std::size_t i = start; i < start + n; ++i) {
            xs.push_back(samples[i].input);
            ys.push_back(samples[i].target);
        }
        total += net.loss(xs, ys) * static_cast<double>(n);
    }
    return total / static_cast<double>(samples.size());
}

/**
 * Minibatch Adam with early stopping on the validation loss.
 *
 * Each epoch reshuffles the training set with a seeded generator. On return the
 * network holds the parameters of the best validation epoch.
 */
template <std::floating_point T>
TrainHistory train_epochs(ConvPolicyNet<T>& net, std::span<const TrainSample> train,
                          std::span<const TrainSample> validation, const TrainOptions& opts) {
    if (train.empty()) throw ConfigError("training set is empty");
    if (validation.empty()) throw ConfigError("validation set is empty; early stopping needs a held-out split");
    if (opts.batch_size < 1 || opts.max_epochs < 1) throw ConfigError("batch size and epoch limit must be >= 1");

    TrainHistory hist;
    Adam<T> adam(net.parameter_count(), opts.adam);
    EarlyStopping stopper(opts.patience);
    std::vector<T> grad(net.parameter_count());
    std::vector<T> best(net.parameters().begin(), net.parameters().end());
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Planes> xs;
    std::vector<int> ys;

    for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
        CounterRng rng(derive_key(opts.seed, {0x7a1bULL, static_cast<std::uint64_t>(epoch)}));
        std::shuffle(order.begin(), order.end(), rng);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
            const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(opts.batch_size), order.size() - start);
            xs.clear();
            ys.clear();
            for (std::size_t i = start; i < start + n; ++i) {
                xs.push_back(train[order[i]].input);
                ys.push_back(train[order[i]].target);
            }
            sum += net.loss_and_gradients(xs, ys, grad);
            adam.step(net.parameters(), grad);
            ++batches;
        }
        hist.train_loss.push_back(sum / static_cast<double>(batches));
        const double val = dataset_loss(net, validation);
        hist.validation_loss.push_back(val);
        const bool stop = stopper.update(val);
        if (stopper.improved()) std::copy(net.parameters().begin(), net.parameters().end(), best.begin());
        if (stop) break;
    }
    std::copy(best.begin(), best.end(), net.parameters().begin());
    hist.best_epoch = stopper.best_epoch();
    hist.best_validation_loss = stopper.best_loss();
    hist.steps = adam.steps();
    return hist;
}

}  // namespace pgmcts::policy
