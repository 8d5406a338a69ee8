#include <doctest.h>

#include <set>

#include "ranklab/floor_set.hpp"
#include "ranklab/rng.hpp"

using namespace ranklab;

namespace {

// Reference model: explicit point sets over a small universe.
std::set<long> points_of(const FloorSet& fs) {
    std::set<long> out;
    for (const auto& iv : fs.intervals())
        for (Int k = iv.lo; k < iv.hi; ++k) out.insert(k.convert_to<long>());
    return out;
}

FloorSet random_set(CounterRng& rng, int stage, long universe) {
    std::vector<Interval> iv;
    int pieces = static_cast<int>(rng.next() % 6);
    for (int i = 0; i < pieces; ++i) {
        long a = static_cast<long>(rng.next() % universe);
        long len = static_cast<long>(rng.next() % 8);
        iv.push_back(Interval{Int(a), Int(a + len)});
    }
    return FloorSet(stage, std::move(iv));
}

bool canonical(const FloorSet& fs) {
    const auto& iv = fs.intervals();
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (iv[i].hi <= iv[i].lo) return false;
        if (i > 0 && iv[i].lo <= iv[i - 1].hi) return false; // adjacent must merge
    }
    return true;
}

} // namespace

TEST_CASE("canonical form merges overlapping and adjacent intervals") {
    FloorSet fs(1, {Interval{Int(4), Int(6)}, Interval{Int(0), Int(2)}, Interval{Int(2), Int(4)},
                    Interval{Int(9), Int(9)}});
    CHECK(fs.interval_count() == 1);
    CHECK(fs.intervals()[0] == Interval{Int(0), Int(6)});
    CHECK(fs.cardinality() == 6);
}

TEST_CASE("set algebra against a dense reference model") {
    CounterRng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        FloorSet a = random_set(rng, 3, 60);
        FloorSet b = random_set(rng, 3, 60);
        auto pa = points_of(a);
        auto pb = points_of(b);

        auto check_equal = [](const FloorSet& fs, const std::set<long>& model) {
            CHECK(canonical(fs));
            CHECK(points_of(fs) == model);
            CHECK(fs.cardinality() == Int(static_cast<long>(model.size())));
        };

        std::set<long> u = pa, inter, diff;
        u.insert(pb.begin(), pb.end());
        for (long x : pa) {
            if (pb.count(x)) inter.insert(x);
            else diff.insert(x);
        }
        check_equal(a.unite(b), u);
        check_equal(a.intersect(b), inter);
        check_equal(a.subtract(b), diff);

        std::set<long> shifted;
        for (long x : pa) shifted.insert(x + 17);
        check_equal(a.translated(Int(17)), shifted);

        std::set<long> clamped;
        for (long x : pa)
            if (x >= 10 && x < 40) clamped.insert(x);
        check_equal(a.clamped(Int(10), Int(40)), clamped);
    }
}

TEST_CASE("membership and bounds") {
    FloorSet fs(2, {Interval{Int(3), Int(5)}, Interval{Int(9), Int(10)}});
    CHECK(fs.contains(Int(3)));
    CHECK(fs.contains(Int(4)));
    CHECK(!fs.contains(Int(5)));
    CHECK(fs.contains(Int(9)));
    CHECK(!fs.contains(Int(2)));
    CHECK(fs.min() == 3);
    CHECK(fs.max() == 9);
    CHECK(fs.contains(FloorSet::single(2, Int(9))));
    CHECK(!fs.contains(FloorSet::range(2, Int(3), Int(6))));
}

TEST_CASE("operations on different stages are rejected") {
    FloorSet a = FloorSet::range(1, Int(0), Int(4));
    FloorSet b = FloorSet::range(2, Int(0), Int(4));
    CHECK_THROWS_AS(a.unite(b), Error);
    CHECK_THROWS_AS(a.intersect(b), Error);
}
