#include <doctest.h>

#include <set>

#include "ranklab/rng.hpp"
#include "ranklab/tower.hpp"

using namespace ranklab;

namespace {

ConstructionSpec chacon(int stages) {
    std::vector<StageParams> params(stages, StageParams{Int(3), {Int(0), Int(1), Int(0)}});
    return ConstructionSpec::from_stages(Int(1), std::move(params), "chacon");
}

ConstructionSpec sidon_338(int stages) {
    // h1 = 1, r = 3, spacers (2,4,8) * 4^(j-1)
    std::vector<StageParams> params;
    Int scale = 1;
    for (int j = 0; j < stages; ++j) {
        params.push_back(StageParams{Int(3), {2 * scale, 4 * scale, 8 * scale}});
        scale *= 4;
    }
    return ConstructionSpec::from_stages(Int(1), std::move(params), "sidon-248");
}

std::set<long> dense_points(const FloorSet& fs) {
    std::set<long> out;
    for (const auto& iv : fs.intervals())
        for (Int k = iv.lo; k < iv.hi; ++k) out.insert(k.convert_to<long>());
    return out;
}

// Independent lift: push every floor index through the column offsets one
// stage at a time, as a plain point simulation.
std::set<long> dense_lift(Construction& c, const FloorSet& fs, int to_stage) {
    std::set<long> points = dense_points(fs);
    for (int j = fs.stage(); j < to_stage; ++j) {
        std::set<long> next;
        for (const auto& q : c.offsets(j)) {
            long base = q.convert_to<long>();
            for (long k : points) next.insert(base + k);
        }
        points = std::move(next);
    }
    return points;
}

} // namespace

TEST_CASE("stage one follows the normalization mu(X1) = 1") {
    Construction one(chacon(1));
    CHECK(one.stage(1).h == 1);
    CHECK(one.stage(1).floor_measure == Rat(1));
    CHECK(one.stage(1).x1_floors == FloorSet::range(1, Int(0), Int(1)));

    Construction four(ConstructionSpec::from_stages(Int(4), {StageParams{Int(2), {Int(0), Int(0)}}}));
    CHECK(four.stage(1).h == 4);
    CHECK(four.stage(1).floor_measure == Rat(1, 4));

    CHECK_THROWS_AS(ConstructionSpec::from_stages(Int(0), {}), Error);
}

TEST_CASE("column offsets from the stage parameters") {
    CHECK(column_offsets(Int(4), StageParams{Int(3), {Int(2), Int(5), Int(9)}}) ==
          std::vector<Int>{Int(0), Int(6), Int(15)});
    CHECK(column_offsets(Int(1), StageParams{Int(3), {Int(0), Int(1), Int(0)}}) ==
          std::vector<Int>{Int(0), Int(1), Int(3)});
    CHECK(column_offsets(Int(1), StageParams{Int(3), {Int(2), Int(4), Int(8)}}) ==
          std::vector<Int>{Int(0), Int(3), Int(8)});
}

TEST_CASE("extending stages: frozen small-construction values") {
    Construction c(chacon(3));
    const StageState& s2 = c.ensure_stage(2);
    CHECK(s2.h == 4);
    CHECK(s2.floor_measure == Rat(1, 3));
    CHECK(dense_points(s2.x1_floors) == std::set<long>{0, 1, 3});

    const StageState& s3 = c.ensure_stage(3);
    CHECK(s3.h == 13);
    CHECK(s3.floor_measure == Rat(1, 9));
    CHECK(dense_points(s3.x1_floors) == std::set<long>{0, 1, 3, 4, 5, 7, 9, 10, 12});

    Construction s(sidon_338(2));
    const StageState& t2 = s.ensure_stage(2);
    CHECK(t2.h == 17);
    CHECK(dense_points(t2.x1_floors) == std::set<long>{0, 3, 8});
    CHECK(t2.floor_measure == Rat(1, 3));
}

TEST_CASE("floor set measure") {
    Construction c(chacon(2));
    CHECK(c.measure(FloorSet::range(1, Int(0), Int(1))) == Rat(1));
    CHECK(c.measure(FloorSet(2)) == Rat(0));
    CHECK(c.measure(c.x1(2)) == Rat(1)); // X1 measure invariant across stages
    CHECK_THROWS_AS(c.measure(FloorSet::single(0, Int(0))), Error);
}

TEST_CASE("lifting floor sets") {
    Construction c(chacon(3));
    c.ensure_stage(3);
    // Lifting X1 floors one stage reproduces the extension rule.
    CHECK(c.lift(c.x1(2), 3) == c.x1(3));
    // A full tower lift occupies exactly the column zones.
    FloorSet tower2 = c.tower_floors(2);
    FloorSet lifted = c.lift(tower2, 3);
    FloorSet expected(3);
    for (const auto& q : c.offsets(2))
        expected = expected.unite(FloorSet::range(3, q, q + c.stage(2).h));
    CHECK(lifted == expected);
    // Frozen example: {3} at stage 2 lifts to {3, 7, 12}.
    CHECK(dense_points(c.lift(FloorSet::single(2, Int(3)), 3)) == std::set<long>{3, 7, 12});
    CHECK_THROWS_AS(c.lift(c.x1(3), 2), Error);
}

TEST_CASE("tower invariants on randomized small schedules") {
    CounterRng rng(555);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<StageParams> params;
        Int h1 = Int(1 + rng.next() % 3);
        for (int j = 0; j < 4; ++j) {
            StageParams sp;
            sp.r = Int(2 + rng.next() % 3);
            for (Int i = 0; i < sp.r; ++i) sp.spacers.push_back(Int(rng.next() % 6));
            params.push_back(std::move(sp));
        }
        Construction c(ConstructionSpec::from_stages(h1, params, "random"));
        const StageState& top = c.ensure_stage(5);

        // Height recursion and X1 cardinality.
        Int h = h1, count = h1;
        Rat fm(1, h1);
        for (int j = 1; j <= 4; ++j) {
            h = h * params[j - 1].r + params[j - 1].spacer_total();
            count *= params[j - 1].r;
            fm /= Rat(params[j - 1].r);
            CHECK(c.stage(j + 1).h == h);
        }
        CHECK(top.x1_floors.cardinality() == count);
        CHECK(top.floor_measure == fm);
        CHECK(c.measure(top.x1_floors) == Rat(1));

        // Measure conservation for an arbitrary lifted set, cross-checked
        // against the dense point-simulation oracle.
        FloorSet probe = FloorSet::range(2, Int(0), std::min(c.stage(2).h, Int(3)));
        Rat before = c.measure(probe);
        FloorSet lifted = c.lift(probe, 5);
        CHECK(c.measure(lifted) == before);
        CHECK(dense_points(lifted) == dense_lift(c, probe, 5));
    }
}

TEST_CASE("finite schedules refuse to build past their end") {
    Construction c(chacon(2));
    CHECK(c.ensure_stage(3).j == 3);
    CHECK_THROWS_AS(c.ensure_stage(4), Error);
    CHECK(c.max_stage() == 3);
}
