#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wmc {

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms unspecified, and
/// seeded runs must reproduce bit-for-bit across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Independent stream for (seed, index), e.g. run k of a benchmark cell.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
        return Rng(splitmix64(x));
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi], unbiased (rejection sampling).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(next());
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
        std::uint64_t draw = next();
        while (draw >= limit) draw = next();
        return lo + static_cast<std::int64_t>(draw % range);
    }

    std::size_t index(std::size_t size) {
        return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(size) - 1));
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

    /// Roulette-wheel pick proportional to nonnegative weights.
    std::size_t roulette(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (weights.empty() || !(total > 0.0)) throw std::invalid_argument("roulette: no positive weight");
        double ticket = uniform01() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (ticket < weights[i]) return i;
            ticket -= weights[i];
        }
        for (std::size_t i = weights.size(); i > 0; --i) {
            if (weights[i - 1] > 0.0) return i - 1;
        }
        return 0;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace wmc
