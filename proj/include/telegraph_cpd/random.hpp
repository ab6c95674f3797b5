#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace telegraph {

/// SplitMix64 finalizer. Used to derive independent seeds for replications.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under master seed `seed`. Depends only on the pair,
/// so replication r gets the same numbers whatever thread runs it.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Random stream with distribution code written out explicitly, so draws are
/// identical across standard library implementations (the std:: distributions
/// are implementation-defined; the engine is not).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

    static RandomStream derived(std::uint64_t seed, std::uint64_t index) {
        return RandomStream(derive_seed(seed, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53 bits.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Standard normal, Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// +1 or -1 with equal probability.
    int sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace telegraph
