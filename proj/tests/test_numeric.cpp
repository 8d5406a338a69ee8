#include <doctest.h>

#include "ranklab/numeric.hpp"
#include "ranklab/rng.hpp"

using namespace ranklab;

TEST_CASE("rational parse and format round-trip") {
    CHECK(rat_str(Rat(1, 3)) == "1/3");
    CHECK(rat_str(Rat(4, 2)) == "2/1");
    CHECK(rat_parse("13/27") == Rat(13, 27));
    CHECK(rat_parse(" -5 / 10 ") == Rat(-1, 2));
    CHECK(rat_parse("7") == Rat(7));
    CHECK_THROWS_AS(rat_parse("1/0"), Error);
    CHECK_THROWS_AS(rat_parse("abc"), Error);
}

TEST_CASE("integer powers and roots") {
    CHECK(ipow(Int(3), 0) == 1);
    CHECK(ipow(Int(2), 64) == Int(1) << 64);
    CHECK(iroot_floor(Int(63), 2) == 7);
    CHECK(iroot_floor(Int(64), 2) == 8);
    CHECK(iroot_floor(ipow(Int(10), 30), 3) == ipow(Int(10), 10));
    CHECK(ipow_rational_floor(Int(4), Rat(2)) == 16);
    CHECK(ipow_rational_floor(Int(4), Rat(0)) == 1);
    CHECK(ipow_rational_floor(Int(2), Rat(3, 2)) == 2);  // floor(2^1.5)
    CHECK(ipow_rational_floor(Int(9), Rat(1, 2)) == 3);
}

TEST_CASE("sum_powers matches direct summation") {
    CounterRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        unsigned k = static_cast<unsigned>(rng.next() % 7);
        Int upper = Int(rng.next() % 40);
        Int direct = 0;
        for (Int t = 0; t <= upper; ++t) direct += ipow(t, k);
        CAPTURE(k);
        CHECK(sum_powers(upper, k) == direct);
    }
    CHECK(sum_powers(Int(-3), 4) == 0);
    // Large argument sanity: closed form for k = 1.
    Int big = ipow(Int(10), 20);
    CHECK(sum_powers(big, 1) == big * (big + 1) / 2);
}

TEST_CASE("counter rng is a pure function of seed, stream, counter") {
    CounterRng a(42, 0), b(42, 0);
    for (int i = 0; i < 16; ++i) CHECK(a.next() == b.next());
    CounterRng c(42, 1);
    CHECK(c.next() != CounterRng(42, 0).next());
    CHECK(a.substream(5).next() == b.substream(5).next());
    CounterRng d(9);
    double u = d.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
}

TEST_CASE("uniform_below stays in range and hits both halves") {
    CounterRng rng(1234);
    Int bound = ipow(Int(10), 25);
    int low = 0, high = 0;
    for (int i = 0; i < 200; ++i) {
        Int v = rng.uniform_below(bound);
        CHECK(v >= 0);
        CHECK(v < bound);
        (v < bound / 2 ? low : high)++;
    }
    CHECK(low > 20);
    CHECK(high > 20);
}
