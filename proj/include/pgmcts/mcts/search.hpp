#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/mcts/evaluator.hpp"
#include "pgmcts/mcts/game.hpp"
#include "pgmcts/mcts/selection.hpp"
#include "pgmcts/policy/model.hpp"
#include "pgmcts/random.hpp"
#include "pgmcts/training/dirichlet.hpp"

namespace pgmcts::mcts {

enum class RolloutMode { Random, PolicyGuided };

struct SearchConfig {
    double c_puct = 1.0;
    double virtual_loss_weight = 0.01;
    int simulations = 100;  // k, per committed move
    RolloutMode rollout = RolloutMode::Random;
    int threads = 1;
    std::optional<double> dirichlet_alpha;  // root noise is applied only when set
    double dirichlet_epsilon = 0.25;
    std::uint64_t seed = 0;
    bool reuse_tree = false;
    std::size_t batch_size = 0;  // evaluation queue flush size; 0 means one slot per search thread
    std::chrono::microseconds batch_timeout{2000};
    bool normalize_by_returns = false;  // experimental
    double time_budget_seconds = 0.0;   // > 0 replaces the simulation budget with a wall-clock budget

    void validate() const {
        if (!(c_puct > 0.0)) throw ConfigError("c_puct must be > 0");
        if (!(virtual_loss_weight >= 0.0)) throw ConfigError("virtual_loss_weight must be >= 0");
        if (simulations < 1 && time_budget_seconds <= 0.0) throw ConfigError("simulations must be >= 1");
        if (threads < 1) throw ConfigError("threads must be >= 1");
        if (!(dirichlet_epsilon >= 0.0 && dirichlet_epsilon <= 1.0)) throw ConfigError("dirichlet_epsilon must be in [0,1]");
        if (dirichlet_alpha && !(*dirichlet_alpha > 0.0)) throw ConfigError("dirichlet_alpha must be > 0");
        if (time_budget_seconds < 0.0) throw ConfigError("time_budget_seconds must be >= 0");
    }

    SelectionParams selection() const { return {c_puct, virtual_loss_weight, normalize_by_returns}; }
};

template <SingleAgentGame G>
struct RootEdge {
    typename G::Action action;
    EdgeStats stats;
};

template <SingleAgentGame G>
struct SearchResult {
    typename G::Action best_action{};
    std::vector<RootEdge<G>> root_edges;
    std::uint64_t simulations = 0;
    std::uint64_t expansions = 0;       // includes leaf_expansions
    std::uint64_t leaf_expansions = 0;  // first visits of terminal nodes
    std::uint64_t degenerate_priors = 0;
    double wall_seconds = 0.0;
};

/// Search-tree node. All mutable fields are guarded by mutex once the node is shared.
template <SingleAgentGame G>
struct Node {
    using State = typename G::State;
    using Action = typename G::Action;
    enum class Phase { Fresh, Expanding, Expanded };

    Node(State s, double reward, bool is_terminal)
        : state(std::move(s)), incoming_reward(reward), terminal(is_terminal) {}

    const State state;
    const double incoming_reward;  // reward of the move leading here
    const bool terminal;

    std::mutex mutex;
    std::condition_variable expanded_cv;
    Phase phase = Phase::Fresh;
    bool initialized = false;   // optimistic init done
    bool leaf_counted = false;  // terminal node already counted as a leaf expansion
    std::vector<Action> actions;
    std::vector<EdgeStats> edges;
    std::vector<std::unique_ptr<Node>> children;

    /// Sets Q_bar of every edge without a completed backpropagation to the first rollout return.
    void optimistic_init(double first_return) {
        if (initialized) throw ContractError("optimistic_init called twice on the same node");
        initialized = true;
        for (auto& e : edges)
            if (e.updates == 0) e.mean_value = first_return;
    }
};

/// Adds one completed return to an edge and releases one virtual loss.
inline void record_backup(EdgeStats& e, double ret) {
    if (e.virtual_losses <= 0) throw ContractError("backpropagate: virtual loss underflow");
    if (e.visits <= 0) throw ContractError("backpropagate: edge has no visits");
    e.value_sum += ret;
    e.min_return = e.updates == 0 ? ret : std::min(e.min_return, ret);
    e.max_return = e.updates == 0 ? ret : std::max(e.max_return, ret);
    ++e.updates;
    e.mean_value = e.value_sum / e.visits;
    --e.virtual_losses;
}

/**
 * Plays from state to a terminal state, starting with first_action.
 *
 * Random mode samples uniformly over legal actions; PolicyGuided samples from
 * the evaluator's distribution masked to the legal actions. Returns the sum of
 * rewards along the way, including the end-of-game adjustment.
 */
template <SingleAgentGame G>
double rollout(const typename G::State& state, const typename G::Action& first_action, RolloutMode mode,
               Evaluator<G>* evaluator, CounterRng& rng) {
    auto t = G::step(state, first_action);
    double ret = t.reward;
    if (t.terminal) return ret;
    typename G::State cur = std::move(t.next);
    std::vector<int> idx;
    while (true) {
        const auto legal = G::legal_actions(cur);
        std::size_t pick = 0;
        if (mode == RolloutMode::Random || evaluator == nullptr || evaluator->is_uniform()) {
            pick = rng.below(legal.size());
        } else {
            idx.clear();
            for (const auto& a : legal) idx.push_back(G::action_index(cur, a));
            const auto raw = evaluator->evaluate(cur);
            const auto probs = policy::masked_renormalize(raw, idx);
            double u = rng.uniform();
            pick = legal.size() - 1;
            for (std::size_t i = 0; i < legal.size(); ++i) {
                u -= probs[static_cast<std::size_t>(idx[i])];
                if (u < 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        auto next = G::step(cur, legal[pick]);
        ret += next.reward;
        if (next.terminal) return ret;
        cur = std::move(next.next);
    }
}

/// Snapshot of structural tree properties, for verification.
struct TreeAudit {
    std::size_t nodes = 0;
    std::size_t expanded_nodes = 0;
    int max_virtual_losses = 0;
    bool visit_conservation = true;  // sum of child-edge visits <= incoming visits
    bool priors_normalized = true;   // priors of every expanded node sum to 1 within 1e-6
    bool means_consistent = true;    // mean == sum / visits for every backed-up edge without in-flight visits
};

/**
 * Tree-parallel MCTS with max-min normalized PUCT and score-relative virtual loss.
 *
 * One Searcher owns one tree. With threads == 1 the search runs on the
 * calling thread and is bit-reproducible for a fixed seed.
 */
template <SingleAgentGame G>
class Searcher {
public:
    using State = typename G::State;
    using Action = typename G::Action;
    using NodeT = Node<G>;

    Searcher(SearchConfig cfg, Evaluator<G>& evaluator) : cfg_(cfg), evaluator_(&evaluator) { cfg_.validate(); }

    const SearchConfig& config() const noexcept { return cfg_; }

    SearchResult<G> search(const State& root_state) {
        if (G::is_terminal(root_state)) throw ContractError("search: root state is terminal");
        if (!cfg_.reuse_tree || !root_ || !(root_->state == root_state))
            root_ = std::make_unique<NodeT>(root_state, 0.0, false);

        simulations_ = 0;
        expansions_ = 0;
        leaf_expansions_ = 0;
        degenerate_ = 0;
        started_ = 0;
        const auto t0 = std::chrono::steady_clock::now();
        deadline_ = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(cfg_.time_budget_seconds));
        const std::uint64_t round = rounds_++;

        if (cfg_.threads == 1) {
            CounterRng rng(derive_key(cfg_.seed, {round, 0}));
            worker(rng);
        } else {
            std::exception_ptr failure;
            std::mutex failure_mutex;
            {
                std::vector<std::jthread> pool;
                pool.reserve(static_cast<std::size_t>(cfg_.threads));
                for (int t = 0; t < cfg_.threads; ++t) {
                    pool.emplace_back([&, t] {
                        try {
                            CounterRng rng(derive_key(cfg_.seed, {round, static_cast<std::uint64_t>(t)}));
                            worker(rng);
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                            abort_ = true;
                        }
                    });
                }
            }
            abort_ = false;
            if (failure) std::rethrow_exception(failure);
        }

        SearchResult<G> result;
        result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.simulations = simulations_;
        result.expansions = expansions_;
        result.leaf_expansions = leaf_expansions_;
        result.degenerate_priors = degenerate_;
        std::vector<double> means;
        std::vector<int> eligible;
        for (std::size_t i = 0; i < root_->edges.size(); ++i) {
            result.root_edges.push_back({root_->actions[i], root_->edges[i]});
            if (root_->edges[i].visits >= 1) {
                eligible.push_back(static_cast<int>(i));
                means.push_back(root_->edges[i].mean_value);
            }
        }
        if (eligible.empty()) throw ContractError("search finished without a visited root edge");
        const auto best = argmax_set(means);
        CounterRng tie(derive_key(cfg_.seed, {round, 0xbe57ULL}));
        const int pick = best.empty() ? 0 : best[tie.below(best.size())];
        result.best_action = root_->actions[static_cast<std::size_t>(eligible[static_cast<std::size_t>(pick)])];
        return result;
    }

    /// Moves the root to the child reached by action (subtree reuse); drops the tree if absent.
    void advance(const Action& action) {
        if (!root_) return;
        for (std::size_t i = 0; i < root_->actions.size(); ++i) {
            if (root_->actions[i] == action && root_->children[i] && !root_->children[i]->terminal) {
                auto child = std::move(root_->children[i]);
                root_ = std::move(child);
                return;
            }
        }
        root_.reset();
    }

    void reset() { root_.reset(); }

    const NodeT* root() const noexcept { return root_.get(); }

    /// Walks the whole tree. Only valid while no search is running.
    TreeAudit audit() const {
        TreeAudit a;
        if (root_) audit_node(*root_, -1, a);
        return a;
    }

private:
    struct PathStep {
        NodeT* node;
        std::size_t edge;
    };

    bool claim_simulation() {
        if (abort_) return false;
        if (cfg_.time_budget_seconds > 0.0) {
            if (started_.fetch_add(1) > 0 && std::chrono::steady_clock::now() >= deadline_) return false;
            return true;
        }
        return started_.fetch_add(1) < static_cast<std::uint64_t>(cfg_.simulations);
    }

    void worker(CounterRng& rng) {
        std::vector<PathStep> path;
        while (claim_simulation()) simulate(rng, path);
    }

    void simulate(CounterRng& rng, std::vector<PathStep>& path) {
        path.clear();
        NodeT* node = root_.get();
        double leaf_return = 0.0;
        while (true) {
            std::unique_lock lock(node->mutex);
            if (node->terminal) {
                if (!node->leaf_counted) {
                    node->leaf_counted = true;
                    ++expansions_;
                    ++leaf_expansions_;
                }
                leaf_return = 0.0;
                break;
            }
            if (node->phase == NodeT::Phase::Fresh) {
                node->phase = NodeT::Phase::Expanding;
                lock.unlock();
                try {
                    expand(*node, rng);
                } catch (...) {
                    {
                        std::lock_guard relock(node->mutex);
                        node->phase = NodeT::Phase::Fresh;
                    }
                    node->expanded_cv.notify_all();
                    throw;
                }
                ++expansions_;
                leaf_return = first_rollout(*node, rng);
                break;
            }
            node->expanded_cv.wait(lock, [&] { return node->phase != NodeT::Phase::Expanding; });
            if (node->phase == NodeT::Phase::Fresh) continue;  // expansion failed elsewhere; retry here
            const std::size_t i = select(*node, rng);
            NodeT* child = node->children[i].get();
            lock.unlock();
            if (!child) child = ensure_child(*node, i);
            path.push_back({node, i});
            node = child;
        }
        backpropagate(path, leaf_return);
        ++simulations_;
    }

    /// Installs one edge per legal action with masked, renormalized priors; wakes waiting threads.
    void expand(NodeT& node, CounterRng& rng) {
        auto actions = G::legal_actions(node.state);
        std::vector<EdgeStats> edges(actions.size());
        if (evaluator_->is_uniform()) {
            for (auto& e : edges) e.prior = 1.0 / static_cast<double>(edges.size());
        } else {
            std::vector<int> idx;
            idx.reserve(actions.size());
            for (const auto& a : actions) idx.push_back(G::action_index(node.state, a));
            const auto raw = evaluator_->evaluate(node.state);
            bool degenerate = raw.size() != static_cast<std::size_t>(G::action_space(node.state));
            std::vector<double> priors;
            if (!degenerate) priors = policy::masked_renormalize(raw, idx, &degenerate);
            if (degenerate) {
                ++degenerate_;
                for (auto& e : edges) e.prior = 1.0 / static_cast<double>(edges.size());
            } else {
                for (std::size_t i = 0; i < edges.size(); ++i) edges[i].prior = priors[static_cast<std::size_t>(idx[i])];
            }
        }
        if (&node == root_.get() && cfg_.dirichlet_alpha) {
            std::vector<double> p(edges.size());
            for (std::size_t i = 0; i < edges.size(); ++i) p[i] = edges[i].prior;
            const auto mixed = training::dirichlet_mix(p, *cfg_.dirichlet_alpha, cfg_.dirichlet_epsilon, rng);
            for (std::size_t i = 0; i < edges.size(); ++i) edges[i].prior = mixed[i];
        }
        {
            std::lock_guard lock(node.mutex);
            node.actions = std::move(actions);
            node.edges = std::move(edges);
            node.children.resize(node.edges.size());
            node.phase = NodeT::Phase::Expanded;
        }
        node.expanded_cv.notify_all();
    }

    /// Rollout from a freshly expanded node through its highest-prior edge, then optimistic init.
    double first_rollout(NodeT& node, CounterRng& rng) {
        std::size_t first = 0;
        for (std::size_t i = 1; i < node.edges.size(); ++i)
            if (node.edges[i].prior > node.edges[first].prior) first = i;
        const double ret = rollout<G>(node.state, node.actions[first], cfg_.rollout, evaluator_, rng);
        std::lock_guard lock(node.mutex);
        EdgeStats& e = node.edges[first];
        ++e.visits;
        ++e.virtual_losses;
        record_backup(e, ret);
        node.optimistic_init(ret);
        return ret;
    }

    std::size_t select(NodeT& node, CounterRng& rng) { return select_edge(node.edges, cfg_.selection(), rng); }

    NodeT* ensure_child(NodeT& node, std::size_t i) {
        auto t = G::step(node.state, node.actions[i]);
        std::lock_guard lock(node.mutex);
        if (!node.children[i]) node.children[i] = std::make_unique<NodeT>(std::move(t.next), t.reward, t.terminal);
        return node.children[i].get();
    }

    /// Each edge receives the return measured from its parent state onward.
    void backpropagate(const std::vector<PathStep>& path, double leaf_return) {
        double ret = leaf_return;
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            NodeT& parent = *it->node;
            std::lock_guard lock(parent.mutex);
            ret += parent.children[it->edge]->incoming_reward;
            record_backup(parent.edges[it->edge], ret);
        }
    }

    void audit_node(const NodeT& node, int incoming_visits, TreeAudit& a) const {
        ++a.nodes;
        if (node.phase != NodeT::Phase::Expanded) return;
        ++a.expanded_nodes;
        int child_visits = 0;
        double prior_sum = 0.0;
        for (std::size_t i = 0; i < node.edges.size(); ++i) {
            const auto& e = node.edges[i];
            child_visits += e.visits;
            prior_sum += e.prior;
            a.max_virtual_losses = std::max(a.max_virtual_losses, e.virtual_losses);
            if (e.updates > 0 && e.virtual_losses == 0 && std::abs(e.mean_value - e.value_sum / e.visits) > 1e-9)
                a.means_consistent = false;
            if (node.children[i]) audit_node(*node.children[i], e.visits, a);
        }
        if (incoming_visits >= 0 && child_visits > incoming_visits) a.visit_conservation = false;
        if (std::abs(prior_sum - 1.0) > 1e-6) a.priors_normalized = false;
    }

    SearchConfig cfg_;
    Evaluator<G>* evaluator_;
    std::unique_ptr<NodeT> root_;
    std::uint64_t rounds_ = 0;
    std::chrono::steady_clock::time_point deadline_{};
    std::atomic<std::uint64_t> started_{0};
    std::atomic<std::uint64_t> simulations_{0};
    std::atomic<std::uint64_t> expansions_{0};
    std::atomic<std::uint64_t> leaf_expansions_{0};
    std::atomic<std::uint64_t> degenerate_{0};
    std::atomic<bool> abort_{false};
};

}  // namespace pgmcts::mcts
