#include <doctest.h>

#include "ranklab/oracle.hpp"
#include "ranklab/spectral.hpp"

using namespace ranklab;

namespace {

ConstructionSpec chacon(int stages) {
    std::vector<StageParams> params(stages, StageParams{Int(3), {Int(0), Int(1), Int(0)}});
    return ConstructionSpec::from_stages(Int(1), std::move(params), "chacon");
}

ConstructionSpec sidon_248(int stages) {
    std::vector<StageParams> params;
    Int scale = 1;
    for (int j = 0; j < stages; ++j) {
        params.push_back(StageParams{Int(3), {2 * scale, 4 * scale, 8 * scale}});
        scale *= 4;
    }
    return ConstructionSpec::from_stages(Int(1), std::move(params), "sidon-248");
}

// Truncated first block of a nu = 2 family with cut count 3.
SidonClassParams tiny_family() {
    return SidonClassParams::explicit_blocks(Rat(2), {Int(3)}, "tiny-nu2");
}

} // namespace

TEST_CASE("lag family members and cardinality") {
    Construction c(sidon_248(2));
    LagFamily family = lag_family(c, 1);
    CHECK(family.lags.size() == 6); // r^2 - r
    // Closed under negation.
    for (const auto& lag : family.lags) {
        bool found = false;
        for (const auto& other : family.lags) found = found || other == -lag;
        CHECK(found);
    }
}

TEST_CASE("product side values") {
    Construction c(chacon(3));
    CHECK(product_side(c.spec(), 1, 1) == Rat(1)); // empty product
    CHECK(product_side(c.spec(), 3, 1) == Rat(25, 9));
    // Fast-growing cut counts: partial products increase and stay bounded.
    Construction g(make_cnu_spec(SidonClassParams::power_rule(Rat(2), Int(2))));
    g.ensure_stage(6);
    Rat prev(1);
    for (int m = 2; m <= 6; ++m) {
        Rat value = product_side(g.spec(), m, 2);
        CHECK(value > prev);
        CHECK(value < Rat(2));
        prev = value;
    }
}

TEST_CASE("power-sum product identity on sidon schedules") {
    Construction c(sidon_248(4));
    CorrelationEngine engine(c);
    IdentityReport trivial = verify_power_product_identity(engine, 1, 1);
    CHECK(trivial.equal);
    CHECK(trivial.lhs == Rat(1));

    IdentityReport m2 = verify_power_product_identity(engine, 2, 1);
    CHECK(m2.equal);
    CHECK(m2.lhs == Rat(5, 3));

    Construction g(make_cnu_spec(SidonClassParams::power_rule(Rat(1), Int(3))));
    CorrelationEngine ge(g);
    for (unsigned d : {1u, 2u})
        for (int m = 1; m <= 4; ++m) {
            IdentityReport report = verify_power_product_identity(ge, m, d);
            CAPTURE(d);
            CAPTURE(m);
            CHECK(report.equal);
        }
}

TEST_CASE("taller initial towers add within-tower lag mass to the power sum") {
    // With h_1 > 1 the lags 0 < |n| < h_1 carry positive correlations, so
    // the power sum strictly exceeds the product side.
    std::vector<StageParams> params{StageParams{Int(3), {Int(8), Int(16), Int(32)}},
                                    StageParams{Int(3), {Int(64), Int(128), Int(256)}}};
    Construction c(ConstructionSpec::from_stages(Int(2), std::move(params), "tall"));
    CorrelationEngine engine(c);
    IdentityReport report = verify_power_product_identity(engine, 2, 1);
    CHECK(!report.equal);
    CHECK(report.lhs > report.rhs);
}

TEST_CASE("block norm report matches an independent dense expansion") {
    SidonClassParams family = tiny_family();
    Construction c(make_cnu_spec(family));
    CorrelationEngine engine(c);
    PkNormOptions options;
    options.n_effective = 2;
    BlockNormReport report = pk_norm(engine, family, 1, 1, 1, options);
    CHECK(report.a_k == Rat(2)); // (r-1) r^{1-d} with r = 3, d = 1
    CHECK(report.n_k == 9);     // floor(3^2)
    CHECK(report.n_effective == 2);
    CHECK(report.dist.exact);

    // Independent route: dense-oracle correlations at a certifying stage.
    Construction c2(make_cnu_spec(family));
    DenseOracle oracle(c2, 3, 100000);
    FloorSet x1 = c2.x1(1);
    std::vector<Int> lags;
    for (int j = 1; j <= 2; ++j)
        for (const auto& lag : lag_family(c2, j).lags) lags.push_back(lag);
    Rat norm = report.a_k * Rat(report.n_effective);
    Rat gram = 0, cross = 0;
    for (const auto& a : lags) {
        cross += oracle.intersection(a, x1, x1);
        for (const auto& b : lags) gram += oracle.intersection(a - b, x1, x1);
    }
    Rat expected = gram / (norm * norm) - Rat(2) * cross / norm + Rat(1);
    CHECK(report.dist.lo == expected);
}

TEST_CASE("block constants follow their defining formulas") {
    SidonClassParams family = tiny_family();
    Construction c(make_cnu_spec(family));
    CorrelationEngine engine(c);
    PkNormOptions options;
    options.n_effective = 2;
    // a_k = (r - 1) r^(1-d): for r = 3 this is 2 at d = 1 and 2/3 at d = 2.
    CHECK(pk_norm(engine, family, 1, 1, 1, options).a_k == Rat(2));
    CHECK(pk_norm(engine, family, 1, 2, 1, options).a_k == Rat(2, 3));
    SidonClassParams four = SidonClassParams::explicit_blocks(Rat(2), {Int(4)}, "nu2-r4");
    CHECK(four.block_length(1) == 16); // N_k = floor(r^nu)
}

TEST_CASE("tensor square norms reduce to squared scalar correlations") {
    SidonClassParams family = tiny_family();
    Construction c(make_cnu_spec(family));
    CorrelationEngine engine(c);
    PkNormOptions options;
    options.n_effective = 2;
    BlockNormReport report = pk_norm(engine, family, 1, 2, 1, options);
    CHECK(report.dist.exact);

    Construction c2(make_cnu_spec(family));
    DenseOracle oracle(c2, 3, 100000);
    FloorSet x1 = c2.x1(1);
    std::vector<Int> lags;
    for (int j = 1; j <= 2; ++j)
        for (const auto& lag : lag_family(c2, j).lags) lags.push_back(lag);
    Rat norm = report.a_k * Rat(report.n_effective);
    Rat gram = 0, cross = 0;
    for (const auto& a : lags) {
        Rat ca = oracle.intersection(a, x1, x1);
        cross += ca * ca;
        for (const auto& b : lags) {
            Rat cab = oracle.intersection(a - b, x1, x1);
            gram += cab * cab;
        }
    }
    CHECK(report.dist.lo == gram / (norm * norm) - Rat(2) * cross / norm + Rat(1));
}

TEST_CASE("block norm closed form for squared translates") {
    SidonClassParams family = tiny_family();
    Construction c(make_cnu_spec(family));
    CorrelationEngine engine(c);
    PkNormOptions options;
    options.n_effective = 2;
    BlockNormReport report = pk_norm(engine, family, 1, 1, 2, options);
    CHECK(report.dist.exact);

    // Disjoint-support precondition: all off-diagonal doubled-lag
    // correlations vanish. Checked, not assumed.
    std::vector<Int> lags;
    for (int j = 1; j <= 2; ++j)
        for (const auto& lag : lag_family(c, j).lags) lags.push_back(2 * lag);
    bool disjoint = true;
    for (const auto& a : lags)
        for (const auto& b : lags)
            if (a != b && engine.x1_lag_exact(a - b) != 0) disjoint = false;
    REQUIRE(disjoint);

    const Int& r = c.spec().stage(1).r;
    Rat norm = report.a_k * Rat(report.n_effective);
    Rat closed = Rat(r * r - r) * Rat(report.n_effective) / (norm * norm);
    CHECK(report.dist.lo == closed);
}

TEST_CASE("block norm decomposition recombines to the distance") {
    SidonClassParams family = tiny_family();
    Construction c(make_cnu_spec(family));
    CorrelationEngine engine(c);
    PkNormOptions options;
    options.n_effective = 2;
    options.decomposition = true;
    BlockNormReport report = pk_norm(engine, family, 1, 1, 1, options);
    REQUIRE(report.has_decomposition);
    Rat norm = report.a_k * Rat(report.n_effective);
    CHECK(report.dist.lo == (report.variance_term + report.outside_term) / (norm * norm));
    CHECK(report.variance_term >= 0);
    CHECK(report.outside_term >= 0);
    // dist <= 2 + ||P F||^2 always (nonnegative correlation coefficients).
    Rat pf_norm2 = report.dist.lo - Rat(1) +
                   Rat(2) / norm *
                       [&] {
                           Rat cross = 0;
                           for (int j = 1; j <= 2; ++j)
                               for (const auto& lag : lag_family(c, j).lags)
                                   cross += engine.x1_lag_exact(lag);
                           return cross;
                       }();
    CHECK(report.dist.lo <= Rat(2) + pf_norm2);
}

TEST_CASE("block norm budget is reported before evaluation") {
    SidonClassParams family = tiny_family();
    Construction c(make_cnu_spec(family));
    CorrelationEngine engine(c);
    PkNormOptions options;
    options.n_effective = 2;
    options.query_cap = 10;
    CHECK_THROWS_AS(pk_norm(engine, family, 1, 1, 1, options), Error);
}

TEST_CASE("translate disjointness: common sources collide, distinct ones do not") {
    // Two translates pulled from the same source column always meet at
    // q(i) + q(m) - q(i'): for offsets (0, 4, 14) the lags -4 and 10 share
    // floor 10, so the all-pairs claim fails even on a Sidon schedule. With
    // distinct source columns the overlaps vanish, which is what separates
    // Sidon schedules from colliding ones.
    Construction g(make_cnu_spec(SidonClassParams::power_rule(Rat(1), Int(3))));
    CorrelationEngine ge(g);
    for (int j : {1, 2}) {
        DisjointnessReport report = lemma_disjointness_report(ge, j);
        CHECK(!report.all_pairs);
        CHECK(report.distinct_sources);
        CHECK(report.violations > 0);
        CHECK(report.first_violation_mass > 0);
    }
    CHECK(!lemma_disjointness_check(ge, 1));

    Construction c(chacon(10));
    CorrelationEngine ce(c);
    DisjointnessReport chacon_report = lemma_disjointness_report(ce, 1);
    CHECK(!chacon_report.all_pairs);
    CHECK(!chacon_report.distinct_sources);

    // r = 2 block: a single difference magnitude, vacuously disjoint.
    Construction two(make_cnu_spec(SidonClassParams::power_rule(Rat(1), Int(2))));
    CorrelationEngine te(two);
    DisjointnessReport two_report = lemma_disjointness_report(te, 1);
    CHECK(two_report.all_pairs);
    CHECK(two_report.distinct_sources);
    CHECK(lemma_disjointness_check(te, 1));
}

TEST_CASE("indicator support measure stays below r^2 - r") {
    Construction g(make_cnu_spec(SidonClassParams::power_rule(Rat(1), Int(3))));
    CorrelationEngine ge(g);
    for (unsigned d : {1u, 2u}) {
        SupportReport report = indicator_support_check(ge, 1, d);
        CHECK(!report.indicator_valued); // common-source collisions
        CHECK(report.distinct_source_disjoint);
        CHECK(report.witness_mass > 0);
        CHECK(report.within_bound);
        CHECK(report.bound == Rat(6));
        Rat expected = 0;
        for (const auto& lag : lag_family(ge.construction(), 1).lags)
            expected += Rat(1) - rpow(ge.x1_lag_exact(lag), d);
        CHECK(report.support_upper == expected);
    }
    Construction c(chacon(10));
    CorrelationEngine ce(c);
    CHECK_THROWS_AS(indicator_support_check(ce, 1, 1), Error);
}

TEST_CASE("repeated averaging of block reports") {
    SidonClassParams family = tiny_family();
    Construction c(make_cnu_spec(family));
    CorrelationEngine engine(c);
    PkNormOptions options;
    options.n_effective = 2;
    BlockNormReport report = pk_norm(engine, family, 1, 1, 1, options);
    CorrelationValue mean = repeated_average({report, report});
    CHECK(mean.lo == report.dist.lo);
    CHECK_THROWS_AS(repeated_average({}), Error);
}
