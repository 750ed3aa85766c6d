#pragma once

#include <vector>

#include "pgmcts/samegame/rules.hpp"

namespace pgmcts::bench {

struct GreedyResult {
    std::vector<samegame::Action> actions;
    samegame::Score score = 0;
};

/// Always removes the largest group; ties go to the first group in canonical action order.
inline GreedyResult greedy_play(samegame::Board board) {
    GreedyResult r;
    while (true) {
        const auto groups = samegame::find_groups(board);
        const samegame::Group* best = nullptr;
        samegame::Action best_action{};
        for (const auto& g : groups) {
            if (g.cells.size() < 2) continue;
            const auto rep = samegame::group_representative(g);
            if (!best || g.cells.size() > best->cells.size() ||
                (g.cells.size() == best->cells.size() && rep < best_action)) {
                best = &g;
                best_action = rep;
            }
        }
        if (!best) {
            r.score += samegame::terminal_adjustment(board);
            return r;
        }
        auto out = samegame::apply_action(board, best_action);
        r.actions.push_back(best_action);
        r.score += out.move_score;
        board = std::move(out.next_board);
    }
}

}  // namespace pgmcts::bench
