#pragma once

#include <cstdint>

#include "rbm/special.hpp"

namespace rbm {

inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based SplitMix64 stream. Substreams for replications are derived
// from (seed, index) so parallel runs are reproducible and order-free; an
// antithetic stream reflects every uniform, which by inverse-CDF sampling
// reflects every normal and every transition draw monotonically.
class Rng {
public:
    Rng(uint64_t seed, bool antithetic = false)
        : state_(seed), antithetic_(antithetic) {}

    static Rng substream(uint64_t seed, uint64_t index, bool antithetic = false) {
        return Rng(mix64(seed ^ mix64(index + 0x6A09E667F3BCC909ULL)), antithetic);
    }

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Open-interval uniform on (0,1), 53-bit resolution, never 0 or 1.
    double uniform() {
        const double u =
            (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        return antithetic_ ? 1.0 - u : u;
    }

    double normal() { return norm_quantile(uniform()); }

private:
    uint64_t state_;
    bool antithetic_;
};

}  // namespace rbm
