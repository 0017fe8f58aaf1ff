#pragma once

#include <cmath>
#include <cstdint>

namespace mflow {

/// Counter-splittable 64-bit generator (splitmix64). All randomness in the
/// library flows through this type so that results are bit-reproducible
/// across platforms and standard-library versions.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Exponential variate with the given rate.
    double exponential(double rate) { return -std::log(1.0 - uniform01()) / rate; }

    /// Bernoulli trial.
    bool bernoulli(double p) { return uniform01() < p; }

  private:
    std::uint64_t state_;
};

/// Derives the k-th stream seed from a master seed. Trials keyed by counter
/// are statistically independent and order-independent, which is what makes
/// parallel ensemble execution deterministic.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t k) {
    std::uint64_t z = master ^ (k * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace mflow
