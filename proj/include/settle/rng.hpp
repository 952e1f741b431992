#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace settle {

// splitmix64 finalizer (Steele/Lea/Flood). Fixed 64-bit mixing permutation
// used both to expand seeds into generator state and to split one master
// seed into independent per-run streams.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream k of a master seed: the k-th output of a splitmix64 sequence
// started at `master`. Workers picking up run k always land on the same
// stream no matter how runs are scheduled.
inline uint64_t derive_seed(uint64_t master, uint64_t k) {
    return splitmix64(master + k * 0x9E3779B97F4A7C15ULL);
}

// xoshiro256** (Blackman/Vigna, public domain reference constants).
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(uint64_t seed) {
        // state must not be all zero; splitmix64 expansion guarantees that
        // in practice and is the seeding procedure recommended upstream
        for (auto& w : state_) {
            seed = splitmix64(seed);
            w = seed;
        }
    }

    using result_type = uint64_t;
    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return UINT64_MAX; }

    uint64_t operator()() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased uniform draw from [0, bound) by Lemire's multiply-shift
    // rejection method. bound must be nonzero.
    uint64_t below(uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
        uint64_t lo = static_cast<uint64_t>(m);
        if (lo < bound) {
            const uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    uint64_t state_[4];
};

// In-place Fisher-Yates. std::shuffle is implementation-defined, so results
// would not be reproducible across standard libraries; this is pinned.
template <typename T>
void fisher_yates(std::vector<T>& v, Xoshiro256ss& rng) {
    for (uint64_t k = v.size(); k > 1; --k) {
        uint64_t r = rng.below(k);
        std::swap(v[k - 1], v[r]);
    }
}

} // namespace settle
