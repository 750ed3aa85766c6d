#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "pgmcts/samegame/board.hpp"

namespace pgmcts::samegame {

/// Maximal 4-connected set of equal-colored cells, size >= 2. Cells sorted row-major.
struct Group {
    Color color = kEmpty;
    std::vector<Action> cells;

    int size() const noexcept { return static_cast<int>(cells.size()); }
};

struct MoveOutcome {
    Board next_board;
    int cleared = 0;
    Score move_score = 0;
    bool terminal = false;
    Score terminal_adjustment = 0;

    /// Points credited for this transition, including the end-of-game adjustment.
    Score reward() const noexcept { return move_score + terminal_adjustment; }
};

namespace detail {

/// Flood fill from (row, col); appends the component to out and marks it in seen.
inline void flood(const Board& b, int row, int col, std::vector<char>& seen, std::vector<Action>& out) {
    const Color color = b.at(row, col);
    const int w = b.width();
    std::size_t head = out.size();
    out.push_back({row, col});
    seen[static_cast<std::size_t>(row) * w + col] = 1;
    while (head < out.size()) {
        const Action cur = out[head++];
        constexpr int dr[4] = {-1, 1, 0, 0};
        constexpr int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            const int r = cur.row + dr[k];
            const int c = cur.col + dc[k];
            if (!b.in_bounds(r, c)) continue;
            auto& s = seen[static_cast<std::size_t>(r) * w + c];
            if (s || b.at(r, c) != color) continue;
            s = 1;
            out.push_back({r, c});
        }
    }
}

}  // namespace detail

/// Bottom-most cell of the group; ties go to the left-most column.
inline Action group_representative(const Group& g) {
    if (g.cells.size() < 2) throw ContractError("group_representative requires a group of size >= 2");
    return *std::min_element(g.cells.begin(), g.cells.end(), [](const Action& a, const Action& b) {
        if (a.row != b.row) return a.row > b.row;
        return a.col < b.col;
    });
}

inline std::vector<Group> find_groups(const Board& b) {
    std::vector<Group> groups;
    std::vector<char> seen(static_cast<std::size_t>(b.cell_count()), 0);
    std::vector<Action> scratch;
    for (int row = 0; row < b.height(); ++row) {
        for (int col = 0; col < b.width(); ++col) {
            if (seen[static_cast<std::size_t>(row) * b.width() + col] || b.at(row, col) == kEmpty) continue;
            scratch.clear();
            detail::flood(b, row, col, seen, scratch);
            if (scratch.size() < 2) continue;
            Group g{b.at(row, col), scratch};
            std::sort(g.cells.begin(), g.cells.end());
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

/// One representative per group, sorted row-major. This is the canonical action order.
inline std::vector<Action> legal_actions(const Board& b) {
    std::vector<Action> actions;
    std::vector<char> seen(static_cast<std::size_t>(b.cell_count()), 0);
    std::vector<Action> scratch;
    for (int row = 0; row < b.height(); ++row) {
        for (int col = 0; col < b.width(); ++col) {
            if (seen[static_cast<std::size_t>(row) * b.width() + col] || b.at(row, col) == kEmpty) continue;
            scratch.clear();
            detail::flood(b, row, col, seen, scratch);
            if (scratch.size() < 2) continue;
            Action rep = scratch.front();
            for (const Action& a : scratch)
                if (a.row > rep.row || (a.row == rep.row && a.col < rep.col)) rep = a;
            actions.push_back(rep);
        }
    }
    std::sort(actions.begin(), actions.end());
    return actions;
}

/// Sum over colors still present of (count - 2)^2. Only defined on terminal, non-empty boards.
inline Score terminal_penalty(const Board& b) {
    if (b.empty()) throw ContractError("terminal_penalty called on an empty board");
    if (!b.is_terminal()) throw ContractError("terminal_penalty called on a non-terminal board");
    Score penalty = 0;
    const auto counts = b.color_counts();
    for (int c = 1; c <= b.num_colors(); ++c) {
        if (counts[c] == 0) continue;
        const Score d = counts[c] - 2;
        penalty += d * d;
    }
    return penalty;
}

/// +1000 for a cleared board, minus the leftover penalty for a stuck board, 0 while moves remain.
inline Score terminal_adjustment(const Board& b) {
    if (b.empty()) return kClearBonus;
    if (!b.is_terminal()) return 0;
    return -terminal_penalty(b);
}

inline MoveOutcome apply_action(const Board& b, Action a) {
    if (!b.in_bounds(a.row, a.col)) throw IllegalMoveError(a.row, a.col, "outside the board");
    if (b.at(a) == kEmpty) throw IllegalMoveError(a.row, a.col, "empty cell");

    std::vector<char> seen(static_cast<std::size_t>(b.cell_count()), 0);
    std::vector<Action> group;
    detail::flood(b, a.row, a.col, seen, group);
    if (group.size() < 2) throw IllegalMoveError(a.row, a.col, "single block cannot be cleared");
    for (const Action& c : group)
        if (c.row > a.row || (c.row == a.row && c.col < a.col))
            throw IllegalMoveError(a.row, a.col, "not the lowest-left block of its group");

    MoveOutcome out;
    out.next_board = b;
    auto& cells = BoardAccess::cells(out.next_board);
    const int w = b.width();
    const int h = b.height();
    for (const Action& c : group) cells[static_cast<std::size_t>(c.row) * w + c.col] = kEmpty;

    // Gravity inside each column, then shift non-empty columns left.
    int dst_col = 0;
    for (int col = 0; col < w; ++col) {
        int dst_row = h - 1;
        for (int row = h - 1; row >= 0; --row) {
            const Color c = cells[static_cast<std::size_t>(row) * w + col];
            if (c == kEmpty) continue;
            cells[static_cast<std::size_t>(row) * w + col] = kEmpty;
            cells[static_cast<std::size_t>(dst_row) * w + dst_col] = c;
            --dst_row;
        }
        if (dst_row < h - 1) ++dst_col;
    }

    out.cleared = static_cast<int>(group.size());
    out.move_score = static_cast<Score>(out.cleared - 2) * (out.cleared - 2);
    out.terminal = out.next_board.is_terminal();
    out.terminal_adjustment = out.terminal ? terminal_adjustment(out.next_board) : 0;
    return out;
}

/// Replays actions from start and returns the final episode score (moves plus end adjustment).
inline Score replay_score(const Board& start, std::span<const Action> actions) {
    Board cur = start;
    Score total = 0;
    for (const Action& a : actions) {
        auto out = apply_action(cur, a);
        total += out.move_score;
        cur = std::move(out.next_board);
    }
    if (!cur.is_terminal()) throw ContractError("replayed action list does not end in a terminal state");
    // A board that starts terminal receives its adjustment without any move.
    return total + terminal_adjustment(cur);
}

}  // namespace pgmcts::samegame
