#pragma once

#include "pgmcts/planes.hpp"
#include "pgmcts/samegame/board.hpp"

namespace pgmcts::samegame {

/**
 * One-hot encoding of a board, padded by one cell on every side.
 *
 * Shape (height+2, width+2, num_colors+1). Channel 0 marks empty cells and
 * channel k marks color k. The padding ring is zero in every channel, so
 * board edges stay distinguishable from empty cells.
 */
inline Planes encode_board(const Board& b) {
    Planes p(b.num_colors() + 1, b.height() + 2, b.width() + 2);
    for (int row = 0; row < b.height(); ++row)
        for (int col = 0; col < b.width(); ++col) p.at(row + 1, col + 1, b.at(row, col)) = 1.0f;
    return p;
}

/// Index of a cell on the policy head's row-major grid.
inline int action_index(const Board& b, Action a) noexcept { return a.row * b.width() + a.col; }

inline Action index_to_action(const Board& b, int index) noexcept {
    return {index / b.width(), index % b.width()};
}

}  // namespace pgmcts::samegame
