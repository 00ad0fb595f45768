#pragma once

#include <cstdint>
#include <random>

namespace js {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent reproducible stream per trial.
inline uint64_t derive_seed(uint64_t seed, uint64_t trial) { return seed ^ splitmix64(trial); }

// Pinned generator: mt19937_64. Same seed, same stream, on every run.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // uniform in [0, bound), exact via rejection below the largest multiple
    uint64_t bounded(uint64_t bound) {
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // uniform in [0,1), 53-bit resolution
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1): zero redrawn, one unreachable at 53 bits
    double next_unit_open() {
        for (;;) {
            double u = next_unit();
            if (u > 0.0) return u;
        }
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace js
