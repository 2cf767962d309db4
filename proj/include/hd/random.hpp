#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace hd {

/// SplitMix64 generator. Fully specified, so streams are identical across
/// platforms and standard library versions.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return SplitMix64(h).next();
}

/// Hash of the coordinates of a point quantized to 2^-40, mixed with a seed.
inline std::uint64_t hash_point(std::span<const double> values, std::uint64_t seed) {
    std::uint64_t h = SplitMix64(seed ^ 0x51ed270b27d5a1c3ULL).next();
    for (double v : values) {
        const double scaled = std::ldexp(v, 40);
        const auto q = std::fabs(scaled) < 9.0e18 ? static_cast<std::int64_t>(std::llround(scaled))
                                                  : static_cast<std::int64_t>(scaled > 0 ? INT64_MAX : INT64_MIN);
        h = mix64(h, static_cast<std::uint64_t>(q));
    }
    return h;
}

}  // namespace hd
