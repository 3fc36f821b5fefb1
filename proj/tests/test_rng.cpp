#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "rng.hpp"

using namespace ttsa;

TEST_CASE("streams are reproducible and addressable") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(42, 8);
    RngStream d(43, 7);
    RngStream a2(42, 7);
    int differs_stream = 0, differs_seed = 0;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t base = a2.next_u64();
        if (base != c.next_u64()) ++differs_stream;
        if (base != d.next_u64()) ++differs_seed;
    }
    CHECK(differs_stream > 60);
    CHECK(differs_seed > 60);
}

TEST_CASE("uniform ranges") {
    RngStream r(1, 1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = r.next_double_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("gaussian moments") {
    RngStream r(2024, 5);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0, sum3 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = r.next_gauss();
        sum += g;
        sumsq += g * g;
        sum3 += g * g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sumsq / n - 1.0) < 0.02);
    CHECK(std::abs(sum3 / n) < 0.05);
}

TEST_CASE("uniform mean and independence across a stream pair") {
    RngStream r(9, 0), s(9, 1);
    const int n = 100000;
    double mean_r = 0.0, mean_s = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.next_double() - 0.5;
        const double y = s.next_double() - 0.5;
        mean_r += x;
        mean_s += y;
        cross += x * y;
    }
    CHECK(std::abs(mean_r / n) < 0.005);
    CHECK(std::abs(mean_s / n) < 0.005);
    CHECK(std::abs(cross / n) < 0.005);  // corr bound ~12/sqrt(n)
}

TEST_CASE("matches the published philox4x32-10 zero test vector") {
    // counter = {0,0,0,0}, key = {0,0}; anchors the generator core to the
    // reference algorithm, independent of this repo
    RngStream z(0, 0);
    CHECK(z.next_u32() == 0x6627e8d5u);
    CHECK(z.next_u32() == 0xe169c58du);
    CHECK(z.next_u32() == 0xbc57ac4cu);
    CHECK(z.next_u32() == 0x9b00dbd8u);
}

TEST_CASE("first outputs are pinned") {
    // regression pin: a silent generator change would shift every
    // experiment in the repo
    RngStream r(1, 2);
    CHECK(r.next_u64() == 0x8cedc5d3e73404cfull);
    CHECK(r.next_u64() == 0x0a0afddd3f071736ull);
}
