#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

#include "pgmcts/mcts/game.hpp"
#include "pgmcts/policy/model.hpp"

namespace pgmcts::mcts {

/// Supplies raw (unmasked) action distributions of length G::action_space(state).
template <SingleAgentGame G>
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual std::vector<float> evaluate(const typename G::State& state) = 0;

    /// True when evaluate() is uniform over legal actions; lets the search skip the call.
    virtual bool is_uniform() const { return false; }
};

template <SingleAgentGame G>
class UniformEvaluator final : public Evaluator<G> {
public:
    std::vector<float> evaluate(const typename G::State& state) override {
        std::vector<float> out(static_cast<std::size_t>(G::action_space(state)), 0.0f);
        const auto legal = G::legal_actions(state);
        for (const auto& a : legal) out[static_cast<std::size_t>(G::action_index(state, a))] = 1.0f / legal.size();
        return out;
    }
    bool is_uniform() const override { return true; }
};

/// Direct per-call model evaluation on the calling thread.
template <EncodableGame G>
class ModelEvaluator final : public Evaluator<G> {
public:
    explicit ModelEvaluator(const policy::PolicyModel& model) : model_(model) {}
    std::vector<float> evaluate(const typename G::State& state) override { return model_.evaluate(G::encode(state)); }

private:
    const policy::PolicyModel& model_;
};

/**
 * Multi-producer, single-consumer evaluation queue.
 *
 * Callers block in evaluate() until their result is ready. The consumer thread
 * flushes a batch when max_batch requests are pending or when the oldest
 * pending request has waited for timeout.
 */
template <EncodableGame G>
class BatchedEvaluator final : public Evaluator<G> {
public:
    BatchedEvaluator(const policy::PolicyModel& model, std::size_t max_batch,
                     std::chrono::microseconds timeout = std::chrono::microseconds(2000))
        : model_(model), max_batch_(std::max<std::size_t>(1, max_batch)), timeout_(timeout),
          consumer_([this](std::stop_token st) { run(st); }) {}

    ~BatchedEvaluator() override {
        {
            std::lock_guard lock(mutex_);
            consumer_.request_stop();
        }
        cv_.notify_all();
    }

    BatchedEvaluator(const BatchedEvaluator&) = delete;
    BatchedEvaluator& operator=(const BatchedEvaluator&) = delete;

    std::vector<float> evaluate(const typename G::State& state) override {
        Request req{G::encode(state), {}, std::chrono::steady_clock::now()};
        auto fut = req.reply.get_future();
        {
            std::lock_guard lock(mutex_);
            pending_.push_back(std::move(req));
        }
        cv_.notify_one();
        return fut.get();
    }

    std::size_t batches() const {
        std::lock_guard lock(mutex_);
        return batches_;
    }
    std::size_t requests() const {
        std::lock_guard lock(mutex_);
        return requests_;
    }

private:
    struct Request {
        Planes input;
        std::promise<std::vector<float>> reply;
        std::chrono::steady_clock::time_point submitted;
    };

    void run(std::stop_token st) {
        std::vector<Request> batch;
        while (true) {
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return st.stop_requested() || !pending_.empty(); });
                if (pending_.empty()) return;
                const auto deadline = pending_.front().submitted + timeout_;
                cv_.wait_until(lock, deadline, [&] { return st.stop_requested() || pending_.size() >= max_batch_; });
                const std::size_t n = std::min(pending_.size(), max_batch_);
                for (std::size_t i = 0; i < n; ++i) {
                    batch.push_back(std::move(pending_.front()));
                    pending_.pop_front();
                }
                ++batches_;
                requests_ += n;
            }
            std::vector<Planes> inputs;
            inputs.reserve(batch.size());
            for (auto& r : batch) inputs.push_back(std::move(r.input));
            try {
                auto outputs = model_.evaluate_batch(inputs);
                for (std::size_t i = 0; i < batch.size(); ++i) batch[i].reply.set_value(std::move(outputs[i]));
            } catch (...) {
                for (auto& r : batch) r.reply.set_exception(std::current_exception());
            }
            batch.clear();
        }
    }

    const policy::PolicyModel& model_;
    std::size_t max_batch_;
    std::chrono::microseconds timeout_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Request> pending_;
    std::size_t batches_ = 0;
    std::size_t requests_ = 0;
    std::jthread consumer_;  // declared last so it starts after the queue state exists
};

}  // namespace pgmcts::mcts
