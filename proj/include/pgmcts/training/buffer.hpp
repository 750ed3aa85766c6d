#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/policy/train.hpp"
#include "pgmcts/random.hpp"

namespace pgmcts::training {

using policy::TrainSample;

/// Bounded FIFO of training samples; the oldest sample is evicted first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("buffer capacity must be > 0");
    }

    void push(TrainSample s) {
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(std::move(s));
    }

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool empty() const noexcept { return items_.empty(); }
    const TrainSample& operator[](std::size_t i) const { return items_[i]; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    /// Contiguous copy, oldest first.
    std::vector<TrainSample> to_vector() const { return {items_.begin(), items_.end()}; }

    /// Distinct generation tags currently held.
    std::set<std::uint32_t> generations() const {
        std::set<std::uint32_t> out;
        for (const auto& s : items_) out.insert(s.generation);
        return out;
    }

private:
    std::size_t capacity_;
    std::deque<TrainSample> items_;
};

inline void shuffle_samples(std::vector<TrainSample>& samples, std::uint64_t seed) {
    CounterRng rng(seed);
    // Fisher-Yates with the library's own bounded draw, so the order does not depend on the STL.
    for (std::size_t i = samples.size(); i > 1; --i) std::swap(samples[i - 1], samples[rng.below(i)]);
}

/// First floor(split * M) samples go to training, the rest to validation.
inline std::pair<std::size_t, std::size_t> split_and_append(std::vector<TrainSample>&& shuffled, double split,
                                                            ReplayBuffer& train, ReplayBuffer& validation) {
    if (!(split > 0 && split < 1)) throw ConfigError("split must be in (0,1)");
    const auto n_train = static_cast<std::size_t>(std::floor(split * static_cast<double>(shuffled.size())));
    for (std::size_t i = 0; i < shuffled.size(); ++i) (i < n_train ? train : validation).push(std::move(shuffled[i]));
    return {n_train, shuffled.size() - n_train};
}

// Snapshot layout (little-endian): "PGMCTSBF" u32 version u32 rows u32 cols u32 channels u64 count,
// then per sample u32 generation u64 episode u32 step i32 target and one byte per interior cell
// holding the index of its hot channel. Inputs must be padded one-hot encodings.
namespace detail {

inline void put_u(std::ostream& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u(std::istream& in, int bytes, const std::string& path) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = in.get();
        if (c == EOF) throw LoadError(path + ": truncated buffer snapshot");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

}  // namespace detail

inline void save_buffer(const ReplayBuffer& buf, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw LoadError("cannot write " + tmp);
        out.write("PGMCTSBF", 8);
        detail::put_u(out, 1, 4);
        const Planes* first = buf.empty() ? nullptr : &buf[0].input;
        detail::put_u(out, first ? first->rows : 0, 4);
        detail::put_u(out, first ? first->cols : 0, 4);
        detail::put_u(out, first ? first->channels : 0, 4);
        detail::put_u(out, buf.size(), 8);
        for (const auto& s : buf) {
            if (!s.input.same_shape(*first)) throw ShapeError("buffer holds inputs of mixed shapes");
            detail::put_u(out, s.generation, 4);
            detail::put_u(out, s.episode, 8);
            detail::put_u(out, s.step, 4);
            detail::put_u(out, static_cast<std::uint32_t>(s.target), 4);
            for (int r = 1; r + 1 < s.input.rows; ++r)
                for (int c = 1; c + 1 < s.input.cols; ++c) {
                    int hot = -1;
                    for (int ch = 0; ch < s.input.channels; ++ch)
                        if (s.input.at(r, c, ch) == 1.0f) hot = ch;
                    if (hot < 0) throw ShapeError("buffer snapshot needs one-hot inputs");
                    out.put(static_cast<char>(hot));
                }
        }
        if (!out) throw LoadError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline ReplayBuffer load_buffer(const std::filesystem::path& path, std::size_t capacity) {
    const std::string p = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open buffer snapshot " + p);
    char magic[8];
    if (!in.read(magic, 8) || std::string(magic, 8) != "PGMCTSBF") throw LoadError(p + ": not a buffer snapshot");
    if (detail::get_u(in, 4, p) != 1) throw LoadError(p + ": unsupported snapshot version");
    const int rows = static_cast<int>(detail::get_u(in, 4, p));
    const int cols = static_cast<int>(detail::get_u(in, 4, p));
    const int channels = static_cast<int>(detail::get_u(in, 4, p));
    const auto count = detail::get_u(in, 8, p);
    ReplayBuffer buf(capacity);
    for (std::uint64_t i = 0; i < count; ++i) {
        TrainSample s;
        s.generation = static_cast<std::uint32_t>(detail::get_u(in, 4, p));
        s.episode = detail::get_u(in, 8, p);
        s.step = static_cast<std::uint32_t>(detail::get_u(in, 4, p));
        s.target = static_cast<std::int32_t>(static_cast<std::uint32_t>(detail::get_u(in, 4, p)));
        s.input = Planes(channels, rows, cols);
        for (int r = 1; r + 1 < rows; ++r)
            for (int c = 1; c + 1 < cols; ++c) {
                const auto hot = static_cast<int>(detail::get_u(in, 1, p));
                if (hot >= channels) throw LoadError(p + ": channel index out of range");
                s.input.at(r, c, hot) = 1.0f;
            }
        buf.push(std::move(s));
    }
    if (in.peek() != EOF) throw LoadError(p + ": trailing bytes in buffer snapshot");
    return buf;
}

}  // namespace pgmcts::training
