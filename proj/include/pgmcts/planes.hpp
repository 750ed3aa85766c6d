#pragma once

#include <cstddef>
#include <vector>

#include "pgmcts/errors.hpp"

namespace pgmcts {

/**
 * Dense stack of 2-D feature planes, stored channel-major (C, H, W).
 *
 * at(row, col, channel) follows the (H, W, C) indexing used for encoded boards;
 * the storage order is an internal detail chosen for convolution.
 */
struct Planes {
    int channels = 0;
    int rows = 0;
    int cols = 0;
    std::vector<float> data;

    Planes() = default;
    Planes(int channels_, int rows_, int cols_)
        : channels(channels_), rows(rows_), cols(cols_),
          data(static_cast<std::size_t>(channels_) * rows_ * cols_, 0.0f) {}

    std::size_t size() const noexcept { return data.size(); }

    float& at(int row, int col, int channel) { return data[index(row, col, channel)]; }
    float at(int row, int col, int channel) const { return data[index(row, col, channel)]; }

    bool same_shape(const Planes& o) const noexcept {
        return channels == o.channels && rows == o.rows && cols == o.cols;
    }

    bool operator==(const Planes&) const = default;

private:
    std::size_t index(int row, int col, int channel) const {
        return (static_cast<std::size_t>(channel) * rows + row) * cols + col;
    }
};

}  // namespace pgmcts
