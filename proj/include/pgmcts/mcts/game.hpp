#pragma once

#include <concepts>
#include <vector>

#include "pgmcts/planes.hpp"
#include "pgmcts/samegame/encoding.hpp"
#include "pgmcts/samegame/rules.hpp"

namespace pgmcts::mcts {

template <class State>
struct Transition {
    State next;
    double reward = 0.0;  // includes any end-of-game adjustment
    bool terminal = false;
};

/// Deterministic single-agent game the search can drive.
template <class G>
concept SingleAgentGame = requires(const typename G::State& s, const typename G::Action& a) {
    typename G::State;
    typename G::Action;
    requires std::equality_comparable<typename G::State>;
    requires std::equality_comparable<typename G::Action>;
    { G::legal_actions(s) } -> std::same_as<std::vector<typename G::Action>>;
    { G::step(s, a) } -> std::same_as<Transition<typename G::State>>;
    { G::is_terminal(s) } -> std::convertible_to<bool>;
    { G::terminal_value(s) } -> std::convertible_to<double>;
    { G::action_index(s, a) } -> std::convertible_to<int>;
    { G::action_space(s) } -> std::convertible_to<int>;
};

/// Game whose states can be fed to a PolicyModel.
template <class G>
concept EncodableGame = SingleAgentGame<G> && requires(const typename G::State& s) {
    { G::encode(s) } -> std::same_as<Planes>;
};

struct SameGame {
    using State = samegame::Board;
    using Action = samegame::Action;

    static std::vector<Action> legal_actions(const State& s) { return samegame::legal_actions(s); }

    static Transition<State> step(const State& s, const Action& a) {
        auto out = samegame::apply_action(s, a);
        return {std::move(out.next_board), static_cast<double>(out.reward()), out.terminal};
    }

    static bool is_terminal(const State& s) { return s.is_terminal(); }

    /// Score credited when a state is already terminal before any move.
    static double terminal_value(const State& s) { return static_cast<double>(samegame::terminal_adjustment(s)); }

    static int action_index(const State& s, const Action& a) { return samegame::action_index(s, a); }
    static int action_space(const State& s) { return s.cell_count(); }
    static Planes encode(const State& s) { return samegame::encode_board(s); }
};

static_assert(EncodableGame<SameGame>);

}  // namespace pgmcts::mcts
