// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mixvote::rng {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the same
/// (key, counter) always yields the same four words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finaliser, used to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for replication `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    return mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Stream domains keep problem-level and attempt-level draws disjoint.
enum class Domain : std::uint32_t { problem = 1, attempt = 2, experiment = 3 };

/// A counter-based stream addressed by (seed, domain, a, b). Draw k is a pure
/// function of the address and k, so streams never depend on call order
/// across threads.
class Stream {
public:
    Stream(std::uint64_t seed, Domain domain, std::uint32_t a, std::uint32_t b) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          domain_(static_cast<std::uint32_t>(domain)), a_(a), b_(b)
    {
    }

    /// Uniform double in [0, 1) with 53 random bits, at draw index `k`.
    [[nodiscard]] double uniform_at(std::uint32_t k) const noexcept
    {
        const auto w = philox4x32({k, domain_, a_, b_}, key_);
        const std::uint64_t bits = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    /// Sequential interface over uniform_at.
    double uniform() noexcept { return uniform_at(next_++); }

    /// Standard normal via Box-Muller on two sequential uniforms.
    double normal() noexcept
    {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Lognormal with the given arithmetic mean and log-scale standard deviation.
    double lognormal_mean(double mean, double log_sd) noexcept
    {
        const double mu = std::log(mean) - 0.5 * log_sd * log_sd;
        return std::exp(mu + log_sd * normal());
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint32_t below(std::uint32_t n) noexcept
    {
        return static_cast<std::uint32_t>(uniform() * n) % (n == 0 ? 1 : n);
    }

    void seek(std::uint32_t k) noexcept { next_ = k; }
    [[nodiscard]] std::uint32_t position() const noexcept { return next_; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t domain_;
    std::uint32_t a_;
    std::uint32_t b_;
    std::uint32_t next_ = 0;
};

} // namespace mixvote::rng
