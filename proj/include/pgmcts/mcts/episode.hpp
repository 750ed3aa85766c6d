#pragma once

#include <memory>
#include <vector>

#include "pgmcts/mcts/search.hpp"

namespace pgmcts::mcts {

/// Per committed move: what the search did before the commit.
struct MoveTelemetry {
    std::uint64_t simulations = 0;
    std::uint64_t expansions = 0;
    std::uint64_t leaf_expansions = 0;
    std::uint64_t degenerate_priors = 0;
    double wall_seconds = 0.0;
};

/// States visited and actions committed in one interleaved plan-and-play game.
template <SingleAgentGame G>
struct Episode {
    typename G::State start;
    std::vector<typename G::State> states;    // states[i] is the state in which actions[i] was committed
    std::vector<typename G::Action> actions;
    std::vector<double> rewards;              // reward of each committed move, end adjustment included
    std::vector<MoveTelemetry> telemetry;
    double score = 0.0;

    std::size_t length() const noexcept { return actions.size(); }
};

/**
 * Plays start to the end: k simulations per move, then commits the highest-valued action.
 *
 * A terminal start state yields an empty episode whose score is the state's
 * terminal value. The tree is rebuilt for every move unless cfg.reuse_tree.
 */
template <SingleAgentGame G>
Episode<G> play_episode(const typename G::State& start, const SearchConfig& cfg, Evaluator<G>& evaluator) {
    Episode<G> ep;
    ep.start = start;
    if (G::is_terminal(start)) {
        ep.score = G::terminal_value(start);
        return ep;
    }
    Searcher<G> searcher(cfg, evaluator);
    typename G::State cur = start;
    while (true) {
        const auto result = searcher.search(cur);
        ep.telemetry.push_back({result.simulations, result.expansions, result.leaf_expansions,
                                result.degenerate_priors, result.wall_seconds});
        auto t = G::step(cur, result.best_action);
        ep.states.push_back(cur);
        ep.actions.push_back(result.best_action);
        ep.rewards.push_back(t.reward);
        ep.score += t.reward;
        if (t.terminal) break;
        if (cfg.reuse_tree) searcher.advance(result.best_action);
        cur = std::move(t.next);
    }
    return ep;
}

}  // namespace pgmcts::mcts
