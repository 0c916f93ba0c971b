#include <doctest.h>

#include <cmath>
#include <set>

#include "mixvote/rng.hpp"

using namespace mixvote::rng;

TEST_CASE("philox known-answer vectors")
{
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream is addressable and order-free")
{
    Stream s(42, Domain::attempt, 3, 7);
    const double a = s.uniform();
    const double b = s.uniform();
    CHECK(a == s.uniform_at(0));
    CHECK(b == s.uniform_at(1));
    s.seek(0);
    CHECK(s.uniform() == a);
    CHECK(s.position() == 1);

    Stream other_domain(42, Domain::problem, 3, 7);
    Stream other_b(42, Domain::attempt, 3, 8);
    Stream other_seed(43, Domain::attempt, 3, 7);
    CHECK(other_domain.uniform_at(0) != a);
    CHECK(other_b.uniform_at(0) != a);
    CHECK(other_seed.uniform_at(0) != a);
}

TEST_CASE("uniform moments")
{
    Stream s(1, Domain::experiment, 0, 0);
    constexpr int n = 200000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 0.5) < 4 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sum2 / n - mean * mean - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("normal and lognormal moments")
{
    Stream s(9, Domain::experiment, 1, 0);
    constexpr int n = 100000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);

    double lsum = 0.0;
    for (int i = 0; i < n; ++i)
        lsum += s.lognormal_mean(120.0, 0.47);
    CHECK(lsum / n == doctest::Approx(120.0).epsilon(0.01));
}

TEST_CASE("below covers range")
{
    Stream s(5, Domain::experiment, 2, 0);
    std::set<std::uint32_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto v = s.below(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("derived seeds differ")
{
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 10000; ++i)
        seeds.insert(derive_seed(42, i));
    CHECK(seeds.size() == 10000);
    CHECK(derive_seed(42, 0) != derive_seed(43, 0));
}
