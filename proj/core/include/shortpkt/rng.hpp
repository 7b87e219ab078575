#pragma once

#include <cmath>
#include <cstdint>

namespace shortpkt {

// splitmix64; used to expand seeds and derive per-replica streams.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256++. Deterministic across platforms; the standard library
// distributions are implementation-defined, so every variate mapping we
// need is written out explicitly here.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& word : s_) word = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Geometric on {1, 2, ...} with success probability p: number of trials
    // up to and including the first success. Inversion of the CDF.
    std::uint64_t geometric(double p) {
        if (p >= 1.0) return 1;
        double r = std::log(uniform()) / std::log1p(-p);
        return 1 + static_cast<std::uint64_t>(r);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t replica) {
    SplitMix64 sm{seed ^ (0x9E3779B97F4A7C15ULL * (replica + 1))};
    return sm.next();
}

} // namespace shortpkt
