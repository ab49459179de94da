#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace etup {

// SplitMix64. Chosen over the std engines so that sampled subsets and
// synthetic data are bit-identical across standard-library implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Standard normal via Box-Muller (platform-stable, unlike
    // std::normal_distribution).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

// Stateless hash of a key tuple into a fresh stream; lets the synthetic
// generator evaluate noise(site, day, variable) out of order.
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b,
                             std::uint64_t c = 0, std::uint64_t d = 0) {
    SplitMix64 r(a ^ (b * 0xA24BAED4963EE407ull) ^ (c * 0x9FB21C651E98DF25ull) ^
                 (d * 0xD6E8FEB86659FD93ull));
    return r.next();
}

// k distinct indices from [0, n), ascending. k <= n.
std::vector<std::uint32_t> sample_without_replacement(std::uint64_t n,
                                                      std::uint64_t k,
                                                      SplitMix64& rng);

// n draws from [0, n) with replacement, ascending.
std::vector<std::uint32_t> bootstrap_indices(std::uint64_t n, SplitMix64& rng);

}  // namespace etup
