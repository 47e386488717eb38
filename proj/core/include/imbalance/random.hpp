#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>

namespace imbalance {

// The generator family is fixed so other implementations can reproduce the
// same datasets and shuffles bit for bit:
//   - splitmix64 expands a 64-bit seed into the xoshiro256** state
//   - uniform doubles take the top 53 bits: (x >> 11) * 2^-53, in [0, 1)
//   - normals use Box-Muller on (1 - u1, u2); the sine branch is cached and
//     returned by the next call
//   - bounded indices are floor(uniform * n)

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

class Xoshiro256StarStar {
public:
    explicit constexpr Xoshiro256StarStar(std::uint64_t seed) noexcept {
        SplitMix64 sm(seed);
        for (auto& word : s_) {
            word = sm.next();
        }
    }

    constexpr std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

/// Seeded stream of uniforms, normals and indices over xoshiro256**.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : gen_(seed) {}

    std::uint64_t next_u64() noexcept { return gen_.next(); }

    double uniform() noexcept { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

    double normal() noexcept {
        if (cached_) {
            const double z = *cached_;
            cached_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

    /// Index in [0, n); n must be positive.
    std::size_t index(std::size_t n) noexcept {
        auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

private:
    Xoshiro256StarStar gen_;
    std::optional<double> cached_;
};

/// Mixes a base seed with a stream id into an independent 64-bit seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    SplitMix64 a(stream);
    SplitMix64 b(base ^ a.next());
    return b.next();
}

}  // namespace imbalance
