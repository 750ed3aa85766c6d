#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/random.hpp"

namespace pgmcts::samegame {

using Color = std::uint8_t;
using Score = std::int64_t;

inline constexpr Color kEmpty = 0;
inline constexpr Score kClearBonus = 1000;
inline constexpr int kMaxColors = 9;  // position files use one digit per cell

/// Cell coordinate. Row 0 is the top row; blocks fall towards larger rows.
struct Action {
    int row = 0;
    int col = 0;

    friend constexpr auto operator<=>(const Action&, const Action&) = default;
};

/**
 * SameGame grid in row-major order.
 *
 * A Board is always in normal form: no hole below a block in any column, and
 * no empty column to the left of a non-empty one. Constructors reject grids
 * that violate this.
 */
class Board {
public:
    Board() = default;

    /// Empty board.
    Board(int width, int height, int num_colors) : width_(width), height_(height), num_colors_(num_colors) {
        check_dims(width, height, num_colors);
        cells_.assign(static_cast<std::size_t>(width) * height, kEmpty);
    }

    /// Board from row-major cells; throws DimensionError or ContractError on invalid input.
    Board(int width, int height, int num_colors, std::vector<Color> cells)
        : width_(width), height_(height), num_colors_(num_colors), cells_(std::move(cells)) {
        check_dims(width, height, num_colors);
        if (cells_.size() != static_cast<std::size_t>(width) * height)
            throw DimensionError("cell count does not match width*height");
        for (Color c : cells_)
            if (c > num_colors) throw ContractError("cell color out of range");
        if (!is_normal_form()) throw ContractError("board is not in gravity/column-packing normal form");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int num_colors() const noexcept { return num_colors_; }
    int cell_count() const noexcept { return width_ * height_; }

    Color at(int row, int col) const { return cells_[idx(row, col)]; }
    Color at(Action a) const { return at(a.row, a.col); }
    bool in_bounds(int row, int col) const noexcept {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    std::span<const Color> cells() const noexcept { return cells_; }

    int block_count() const noexcept {
        return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [](Color c) { return c != kEmpty; }));
    }

    bool empty() const noexcept { return block_count() == 0; }

    /// counts[c] = number of blocks of color c; counts[0] is unused.
    std::vector<int> color_counts() const {
        std::vector<int> counts(num_colors_ + 1, 0);
        for (Color c : cells_)
            if (c != kEmpty) ++counts[c];
        return counts;
    }

    bool is_normal_form() const noexcept {
        bool seen_empty_column = false;
        for (int col = 0; col < width_; ++col) {
            bool column_empty = true;
            bool seen_block = false;
            for (int row = 0; row < height_; ++row) {
                if (at(row, col) != kEmpty) {
                    seen_block = true;
                    column_empty = false;
                } else if (seen_block) {
                    return false;  // hole below a block
                }
            }
            if (column_empty) seen_empty_column = true;
            else if (seen_empty_column) return false;
        }
        return true;
    }

    /// True when no two 4-adjacent cells share a color, i.e. no move is left.
    bool is_terminal() const noexcept {
        for (int row = 0; row < height_; ++row) {
            for (int col = 0; col < width_; ++col) {
                const Color c = at(row, col);
                if (c == kEmpty) continue;
                if (col + 1 < width_ && at(row, col + 1) == c) return false;
                if (row + 1 < height_ && at(row + 1, col) == c) return false;
            }
        }
        return true;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(static_cast<std::size_t>(height_) * (width_ + 1));
        for (int row = 0; row < height_; ++row) {
            for (int col = 0; col < width_; ++col) s.push_back(static_cast<char>('0' + at(row, col)));
            s.push_back('\n');
        }
        return s;
    }

    bool operator==(const Board&) const = default;

private:
    friend struct BoardAccess;

    static void check_dims(int width, int height, int num_colors) {
        if (width < 1 || height < 1) throw DimensionError("board width and height must be >= 1");
        if (num_colors < 1 || num_colors > kMaxColors)
            throw DimensionError("num_colors must be in 1.." + std::to_string(kMaxColors));
    }

    std::size_t idx(int row, int col) const noexcept { return static_cast<std::size_t>(row) * width_ + col; }

    int width_ = 0;
    int height_ = 0;
    int num_colors_ = 0;
    std::vector<Color> cells_;
};

/// Mutable access for the move engine; keeps the public Board surface immutable.
struct BoardAccess {
    static std::vector<Color>& cells(Board& b) noexcept { return b.cells_; }
};

/// Seed plus dimensions; identical values always generate identical boards.
struct BoardSeed {
    std::uint64_t seed = 0;
    int width = 15;
    int height = 15;
    int num_colors = 5;
};

/// Every cell drawn i.i.d. uniform from 1..num_colors; cell i uses counter i of the seed's stream.
inline Board generate_board(const BoardSeed& s) {
    if (s.width < 1 || s.height < 1) throw DimensionError("board width and height must be >= 1");
    if (s.num_colors < 1 || s.num_colors > kMaxColors)
        throw DimensionError("num_colors must be in 1.." + std::to_string(kMaxColors));
    const CounterRng rng(derive_key(s.seed, {static_cast<std::uint64_t>(s.width), static_cast<std::uint64_t>(s.height),
                                             static_cast<std::uint64_t>(s.num_colors)}));
    std::vector<Color> cells(static_cast<std::size_t>(s.width) * s.height);
    CounterRng stream = rng;
    for (auto& c : cells) c = static_cast<Color>(1 + stream.below(static_cast<std::uint64_t>(s.num_colors)));
    return Board(s.width, s.height, s.num_colors, std::move(cells));
}

}  // namespace pgmcts::samegame
