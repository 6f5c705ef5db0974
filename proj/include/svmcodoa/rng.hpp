#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace svmcodoa {

/// SplitMix64 finalizer. Used to derive independent seeds from (seed, stream).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `stream` under master seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// The one generator used everywhere in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than with
/// <random>'s distribution templates, whose algorithms are
/// implementation-defined, so draws match bit-for-bit across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

    /// Stream `stream` (e.g. a run index) under master seed `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Lemire-style rejection keeps it unbiased.
    std::size_t below(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t bound = n;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = engine_();
            const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
            if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::size_t>(m >> 64);
        }
    }

    /// Standard normal via Box-Muller (no cached second value, so every
    /// call consumes exactly two uniforms).
    double normal() {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
};

/// Free-function spelling of Rng::uniform.
inline double seeded_uniform(Rng& rng) { return rng.uniform(); }

/// Fisher-Yates shuffle driven by Rng (std::shuffle's draw pattern is
/// implementation-defined).
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.below(i);
        using std::swap;
        swap(first[i - 1], first[j]);
    }
}

}  // namespace svmcodoa
