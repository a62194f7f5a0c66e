#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cr {

// Deterministic, platform-stable random stream. std::uniform_int_distribution is
// implementation-defined, which would break bit-identical replay and golden files,
// so bounded draws use explicit rejection sampling over a splitmix64 core.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Independent child stream; distinct labels give decorrelated streams.
    Rng derive(std::uint64_t label) const {
        std::uint64_t s = state_;
        s ^= 0x9e3779b97f4a7c15ULL + (label << 1);
        Rng child(s);
        child.next_u64();  // burn one step so derive(0) != parent
        return child;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps it unbiased.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~0ULL - (~0ULL % bound);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

    std::size_t index(std::size_t size) { return static_cast<std::size_t>(next_below(size)); }

    // Uniform double in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    // k distinct indices from [0, size), in ascending order.
    std::vector<std::size_t> sample_without_replacement(std::size_t size, std::size_t k) {
        std::vector<std::size_t> pool(size);
        for (std::size_t i = 0; i < size; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < k && !pool.empty(); ++i) {
            const std::size_t j = index(pool.size());
            out.push_back(pool[j]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::uint64_t state_;
};

}  // namespace cr
