#pragma once

#include <cstdint>
#include <vector>

namespace qdens {

// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
// <random> engines/distributions so that output is identical across
// platforms and standard-library implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). Fixed-point multiply keeps the mapping
    // platform-independent.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

// Index-addressable child seed: child(parent, i) is independent of how many
// other children were spawned, so work item i is reproducible under any
// batching or scheduling.
inline std::uint64_t spawn_seed(std::uint64_t parent, std::uint64_t index) {
    SplitMix64 g(parent ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return g.next();
}

// Deterministic Fisher-Yates shuffle.
inline void shuffle_indices(std::vector<int>& idx, std::uint64_t seed) {
    SplitMix64 g(seed);
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(g.next_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

} // namespace qdens
