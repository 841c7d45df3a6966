#pragma once
// Seeded randomness helpers. All draws go through these so that runs are
// reproducible from (config, seed) alone, independent of the standard
// library's distribution implementations.

#include <cstdint>
#include <random>
#include <vector>

namespace mecsim {

using Rng = std::mt19937_64;

inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inclusive [lo, hi], unbiased via rejection.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform_unit(rng) < p;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(items.size()) - 1))];
}

} // namespace mecsim
