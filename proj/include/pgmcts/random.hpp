#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace pgmcts {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child key from a parent key and a list of stream indices.
constexpr std::uint64_t derive_key(std::uint64_t key, std::initializer_list<std::uint64_t> path) noexcept {
    for (auto p : path) key = mix64(key ^ mix64(p + 0x632be59bd9b4e019ULL));
    return key;
}

/**
 * Counter-based generator: the n-th output is a pure function of (key, n).
 *
 * Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
 * split() yields an independent stream without advancing this one.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr CounterRng() noexcept = default;
    constexpr explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return at(counter_++); }

    /// Output at an arbitrary counter position.
    constexpr result_type at(std::uint64_t n) const noexcept { return mix64(key_ ^ mix64(n)); }

    constexpr CounterRng split(std::uint64_t stream) const noexcept {
        return CounterRng(derive_key(key_, {stream}));
    }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = (*this)();
            const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
            if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace pgmcts
