#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace dsom {

/// Deterministic random source. All randomness in the toolkit flows through
/// this class from a single user-supplied seed. The engine is std::mt19937_64,
/// whose output sequence is fixed by the standard; the value mappings below
/// are written out explicitly instead of using std::uniform_*_distribution,
/// whose results vary between standard library implementations. Same seed,
/// same bytes, on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bias-free via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::next_below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// k distinct indices drawn uniformly from {0, ..., n-1}, in draw order
    /// (partial Fisher-Yates over an index table).
    std::vector<std::int32_t> sample_without_replacement(std::int32_t n, std::int32_t k) {
        if (k < 0 || n < 0 || k > n)
            throw std::invalid_argument("Rng::sample_without_replacement: need 0 <= k <= n");
        std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
        for (std::int32_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        std::vector<std::int32_t> out(static_cast<std::size_t>(k));
        for (std::int32_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::int32_t>(next_below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace dsom
