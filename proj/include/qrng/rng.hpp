#pragma once

#include <cmath>
#include <cstdint>

namespace qrng {

// splitmix64 finalizer; also used to derive per-purpose seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
    return splitmix64(x);
}

// xoshiro256++ (Blackman & Vigna), seeded through splitmix64.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
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

    // uniform in (0,1]; never returns 0 so -log() is safe
    double uniform() {
        return ((next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // exponential waiting time with the given rate
    double exponential(double rate) {
        return -std::log(uniform()) / rate;
    }

    bool bernoulli(double p) {
        return uniform() <= p;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Derives an independent stream seed from a master seed and a purpose tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose) {
    std::uint64_t st = master ^ (0x9E3779B97F4A7C15ull * (purpose + 1));
    return splitmix64(st);
}

}  // namespace qrng
