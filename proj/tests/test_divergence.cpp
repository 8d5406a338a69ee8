#include <doctest.h>

#include "ranklab/divergence.hpp"

using namespace ranklab;

TEST_CASE("sequence rules evaluate and invert") {
    SequenceRule p = SequenceRule::affine(Int(2));
    CHECK(p(Int(5)) == 10);
    CHECK(p.last_leq(Int(11)) == 5);
    CHECK(p.last_leq(Int(1)) == 0);

    SequenceRule cube = SequenceRule::monomial(3);
    CHECK(cube(Int(4)) == 64);
    CHECK(cube.last_leq(Int(63)) == 3);

    SequenceRule stairs = SequenceRule::staircase(
        {SequenceRule::StairBlock{Int(1), Int(3), Int(3)},
         SequenceRule::StairBlock{Int(4), Int(20), Int(10)}});
    CHECK(stairs(Int(1)) == 3);
    CHECK(stairs(Int(3)) == 9);
    CHECK(stairs(Int(4)) == 20);
    CHECK(stairs(Int(6)) == 40);
    CHECK(stairs.last_leq(Int(25)) == 4);
    CHECK_THROWS_AS(SequenceRule::staircase({SequenceRule::StairBlock{Int(2), Int(1), Int(1)}}),
                    Error);
}

TEST_CASE("interval permutation applies pieces and inverts exactly") {
    IntervalPermutation perm(
        3, {IntervalPermutation::Piece{Int(4), Int(6), Int(10)},
            IntervalPermutation::Piece{Int(14), Int(16), Int(-10)}});
    FloorSet probe = FloorSet::range(3, Int(3), Int(7));
    FloorSet image = perm.apply(probe);
    // 3 fixed, [4,6) moved to [14,16), 6 fixed.
    CHECK(image == FloorSet(3, {Interval{Int(3), Int(4)}, Interval{Int(6), Int(7)},
                                Interval{Int(14), Int(16)}}));
    CHECK(perm.apply_inverse(image) == probe);
}

TEST_CASE("pair scenario reproduces the frozen spacer example") {
    // p = 2n, q = 3n, h1 = 2: the first stage takes the least spacer above
    // max{p(2), q(2)} = 6, so s_1(2) = 7 and h_2 = 11.
    DivergenceOptions options;
    options.h1 = Int(2);
    options.active_stages = 2;
    DivergenceScenario scenario = DivergenceScenario::from_pair(
        SequencePair{SequenceRule::affine(Int(2)), SequenceRule::affine(Int(3))}, options);
    const auto& spec = scenario.sigma().spec();
    CHECK(spec.stage(1).r == 2);
    CHECK(spec.stage(1).spacers == std::vector<Int>{Int(0), Int(7)});
    CHECK(scenario.sigma().stage(2).h == 11);
    CHECK(scenario.block_bound(1) == 1);
    CHECK(scenario.windows()[0].empty());

    // Stage 2 has a nonempty inequality window, but bounded-gap sequences
    // cannot host disjoint pieces: the permutation reports the collision.
    CHECK(!scenario.windows()[1].empty());
    CHECK_THROWS_AS(scenario.pi(2), Error);
    CHECK_THROWS_WITH_AS(scenario.pi(2), doctest::Contains("overlap"), Error);
}

TEST_CASE("polynomial pairs collide once windows widen") {
    DivergenceOptions options;
    options.h1 = Int(2);
    options.active_stages = 2;
    DivergenceScenario scenario = DivergenceScenario::from_pair(
        SequencePair{SequenceRule::monomial(2), SequenceRule::monomial(3)}, options);
    bool collided = false;
    for (int j = 1; j <= 2; ++j) {
        if (scenario.windows()[j - 1].empty()) continue;
        try {
            scenario.pi(j);
        } catch (const Error& e) {
            collided = collided || e.code() == ErrorCode::PieceCollision;
        }
    }
    CHECK(collided);
}

TEST_CASE("katok stages take the 2j-column shape and identity permutation") {
    DivergenceOptions options;
    options.active_stages = 3;
    options.katok_stages = {2};
    DivergenceScenario scenario = DivergenceScenario::staircase(options);
    const auto& spec = scenario.sigma().spec();
    CHECK(spec.stage(2).r == 4);
    CHECK(spec.stage(2).spacers == std::vector<Int>{Int(0), Int(0), Int(1), Int(1)});
    CHECK(scenario.pi(2).identity());
    // Windows on the non-Katok stages still verify.
    for (int j : {1, 3}) {
        auto check = scenario.verify_window_identities(j);
        CHECK(check.checked == check.holds);
    }
}

TEST_CASE("staircase scenario: windows, identities, and the average series") {
    DivergenceOptions options;
    options.active_stages = 4;
    DivergenceScenario scenario = DivergenceScenario::staircase(options);

    // Stage 2 and 3 windows as derived by hand for h1 = 1.
    const auto& windows = scenario.windows();
    REQUIRE(windows.size() == 4);
    CHECK(windows[0].empty());
    CHECK(windows[1].first == 2);
    CHECK(windows[1].last == 16);
    CHECK(!windows[1].odd);
    CHECK(windows[2].first == 17);
    CHECK(windows[2].odd);

    // Conjugation identities hold on 100% of window indices.
    for (int j = 1; j <= 4; ++j) {
        auto check = scenario.verify_window_identities(j);
        CHECK(check.checked == check.holds);
        if (j == 2) CHECK(check.checked == 15);
    }

    // Exact series terms: mu(A) on aligned windows, 0 on displaced ones,
    // with the Poisson level exactly e^-1 / e^-2.
    Int n2 = scenario.block_bound(2);
    auto series = scenario.average_series(n2);
    Rat sum = 0;
    for (const auto& term : series) {
        sum += term.base;
        if (term.n >= windows[1].first && term.n <= windows[1].last) {
            CHECK(term.base == Rat(1));
            CHECK(term.poisson_exponent == Rat(1));
        }
    }
    CHECK(sum / Rat(n2) >= Rat(8, 10));

    Int n3 = scenario.block_bound(3);
    auto deep = scenario.average_series(n3);
    Rat total = 0;
    for (const auto& term : deep) {
        total += term.base;
        if (term.n >= windows[2].first && term.n <= windows[2].last) {
            CHECK(term.base == Rat(0));
            CHECK(term.poisson_exponent == Rat(2));
        }
    }
    CHECK(total / Rat(n3) <= Rat(2, 10));
}

TEST_CASE("permutations fix the tower below the moved zone") {
    DivergenceOptions options;
    options.active_stages = 4;
    DivergenceScenario scenario = DivergenceScenario::staircase(options);
    for (int j = 2; j <= 4; ++j) {
        const IntervalPermutation& perm = scenario.pi(j);
        Int boundary = 2 * scenario.sigma().stage(j).h;
        for (const auto& piece : perm.pieces()) CHECK(piece.src_lo >= boundary);
        FloorSet below = FloorSet::range(j + 1, Int(0), boundary);
        CHECK(perm.apply(below) == below);
    }
}

TEST_CASE("poisson-level terms take only the two window values plus boundaries") {
    DivergenceOptions options;
    options.active_stages = 4;
    DivergenceScenario scenario = DivergenceScenario::staircase(options);
    Rat mu_a = scenario.sigma().measure(scenario.sigma().x1(1));
    Int n3 = scenario.block_bound(3);
    auto series = scenario.average_series(n3);
    Int boundary_terms = 0;
    for (const auto& term : series) {
        bool windowed = false;
        for (const auto& w : scenario.windows())
            if (!w.empty() && term.n >= w.first && term.n <= w.last) windowed = true;
        if (windowed) {
            bool aligned = term.poisson_exponent == mu_a;
            bool displaced = term.poisson_exponent == 2 * mu_a;
            CHECK((aligned || displaced));
        } else {
            ++boundary_terms;
        }
    }
    // Boundary indices are rare: at most N_2 of the first N_3 indices.
    CHECK(boundary_terms <= scenario.block_bound(2));
}

TEST_CASE("conjugated images agree across evaluation stages") {
    DivergenceOptions options;
    options.active_stages = 4;
    DivergenceScenario scenario = DivergenceScenario::staircase(options);
    FloorSet x1 = scenario.sigma().x1(1);
    const auto& window = scenario.windows()[1];
    for (Int n = window.first; n <= window.first + 2; ++n) {
        Int q = scenario.pair().q(n);
        FloorSet at4 = scenario.conjugated_image(x1, q, 4);
        FloorSet at5 = scenario.conjugated_image(x1, q, 5);
        CHECK(scenario.sigma().lift(at4, 5) == at5);
    }
}

TEST_CASE("orbit exit is detected") {
    DivergenceOptions options;
    options.active_stages = 2;
    DivergenceScenario scenario = DivergenceScenario::staircase(options);
    FloorSet x1 = scenario.sigma().x1(1);
    Int huge = scenario.sigma().stage(3).h * 2;
    CHECK_THROWS_AS(scenario.conjugated_image(x1, huge, 3), Error);
}

TEST_CASE("block bounds are monotone") {
    DivergenceOptions options;
    options.active_stages = 4;
    DivergenceScenario scenario = DivergenceScenario::staircase(options);
    Int prev = 0;
    for (int j = 1; j <= 4; ++j) {
        Int bound = scenario.block_bound(j);
        CHECK(bound >= prev);
        prev = bound;
    }
}
