#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace fsqkd::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// splitmix64 output stage (murmur-style 64-bit finalizer).
constexpr std::uint64_t fmix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Labeled seed derivation: one master seed fans out into named, indexed
/// sub-streams ("wander", "protocol", ...). Stable across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index = 0) {
    std::uint64_t s = fmix64(master + kGolden);
    s = fmix64(s ^ fnv1a64(label));
    s = fmix64(s ^ (index + kGolden));
    return s;
}

/// splitmix64 sequence. Construction is two integer mixes, so a fresh stream
/// per Monte Carlo slot is affordable; that keeps results independent of how
/// slots are partitioned across threads.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return fmix64(state_);
    }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Poisson by CDF inversion; intended for small means (photon numbers,
    /// gated noise counts). Pass exp(-mean) when it is precomputed.
    int poisson(double mean, double exp_neg_mean) {
        if (!(mean >= 0.0)) throw std::domain_error("poisson mean must be >= 0");
        if (mean == 0.0) return 0;
        const double u = uniform01();
        double p = exp_neg_mean;
        double cum = p;
        int k = 0;
        while (u >= cum && k < 1024) {
            ++k;
            p *= mean / k;
            cum += p;
        }
        return k;
    }

    int poisson(double mean) { return poisson(mean, std::exp(-mean)); }

private:
    std::uint64_t state_;
};

/// Per-slot stream: any block decomposition of a slot range sees the same draws.
inline Stream slot_stream(std::uint64_t seed, std::uint64_t slot) {
    return Stream(fmix64(seed ^ fmix64(slot + kGolden)));
}

} // namespace fsqkd::rng
