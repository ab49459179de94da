#include "etup/rng.hpp"

#include <algorithm>
#include <numeric>

namespace etup {

std::vector<std::uint32_t> sample_without_replacement(std::uint64_t n,
                                                      std::uint64_t k,
                                                      SplitMix64& rng) {
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    // Partial Fisher-Yates: the first k slots end up holding the sample.
    for (std::uint64_t i = 0; i < k; ++i) {
        std::uint64_t j = i + rng.below(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<std::uint32_t> bootstrap_indices(std::uint64_t n, SplitMix64& rng) {
    std::vector<std::uint32_t> out(n);
    for (auto& v : out) v = std::uint32_t(rng.below(n));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace etup
