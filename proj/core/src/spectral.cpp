#include "ranklab/spectral.hpp"

namespace ranklab {

LagFamily lag_family(Construction& construction, int j) {
    const auto& q = construction.offsets(j);
    LagFamily family;
    family.stage = j;
    family.lags.reserve(q.size() * (q.size() - 1));
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t m = 0; m < q.size(); ++m)
            if (i != m) family.lags.push_back(q[i] - q[m]);
    return family;
}

BlockNormReport pk_norm(CorrelationEngine& engine, const SidonClassParams& family, int k,
                        unsigned d, unsigned p, const PkNormOptions& options) {
    if (d < 1 || p < 1) fail(ErrorCode::InvalidSpec, "pk_norm needs d >= 1 and p >= 1");
    BlockNormReport report;
    report.k = k;
    report.d = d;
    report.p = p;
    report.n_k = family.block_length(k);
    report.n_effective =
        static_cast<int>(std::min<Int>(report.n_k, Int(options.n_effective)).convert_to<int>());
    if (report.n_effective < 1) fail(ErrorCode::InvalidSpec, "empty truncated block");

    int first_stage = family.block_first_stage(k);
    int last_stage = first_stage + report.n_effective - 1;
    Construction& construction = engine.construction();
    construction.ensure_stage(last_stage + 1);

    Int r = construction.spec().stage(first_stage).r;
    report.a_k = Rat(r - 1) / Rat(ipow(r, d - 1));

    // Collect the p-scaled lags of every stage in the truncated block.
    std::vector<Int> lags;
    for (int j = first_stage; j <= last_stage; ++j) {
        require_internal(construction.spec().stage(j).r == r,
                         "cut count changes inside a block");
        LagFamily fam = lag_family(construction, j);
        for (auto& lag : fam.lags) lags.push_back(lag * Int(p));
    }

    std::size_t m = lags.size();
    report.query_count = m * m + (p == 1 ? m : 0);
    if (report.query_count > options.query_cap)
        fail(ErrorCode::BudgetExceeded,
             "pk_norm needs " + std::to_string(report.query_count) +
                 " correlation queries, cap is " + std::to_string(options.query_cap));

    Rat norm = report.a_k * Rat(report.n_effective); // a_k * N
    Rat inv_norm2 = Rat(1) / (norm * norm);

    // ||P(S^p)F - [p=1] F||^2 expanded through <S^a F, S^b F> = c_{a-b}^d.
    Rat gram = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j2 = 0; j2 < m; ++j2)
            gram += rpow(engine.x1_lag_exact(lags[i] - lags[j2]), d);
    Rat value = inv_norm2 * gram;
    if (p == 1) {
        Rat cross = 0;
        for (const auto& lag : lags) cross += rpow(engine.x1_lag_exact(lag), d);
        value += Rat(1) - Rat(2) / norm * cross;
    }
    report.dist = CorrelationValue::exactly(value);

    if (options.decomposition && p == 1) {
        // Triple correlations t(a,b) = mu(T^a X1 ∩ T^b X1 ∩ X1) split the
        // Gram mass into the part supported on the X1 cube and the rest.
        FloorSet x1 = construction.x1(1);
        Rat triple_gram = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j2 = 0; j2 < m; ++j2) {
                IntersectionQuery query;
                query.terms.push_back(ShiftedSet{lags[i], x1});
                query.terms.push_back(ShiftedSet{lags[j2], x1});
                query.terms.push_back(ShiftedSet{0, x1});
                triple_gram += rpow(engine.multi_intersection(query, Rat(0)).lo, d);
            }
        Rat cross = 0;
        for (const auto& lag : lags) cross += rpow(engine.x1_lag_exact(lag), d);
        report.variance_term = triple_gram - Rat(2) * norm * cross + norm * norm;
        report.outside_term = gram - triple_gram;
        report.has_decomposition = true;
    }
    return report;
}

namespace {

/// Exact escape overlap mu(T^a X1 ∩ T^b X1 \ X1), decided by shrinking
/// enclosures of the pair and triple intersections.
Rat escape_overlap(CorrelationEngine& engine, const FloorSet& x1, const Int& a, const Int& b) {
    Rat eps(1, 4);
    while (true) {
        IntersectionQuery pair;
        pair.terms.push_back(ShiftedSet{a, x1});
        pair.terms.push_back(ShiftedSet{b, x1});
        IntersectionQuery triple = pair;
        triple.terms.push_back(ShiftedSet{0, x1});
        CorrelationValue pv = engine.multi_intersection(pair, eps);
        CorrelationValue tv = engine.multi_intersection(triple, eps);
        if (pv.exact && tv.exact) return pv.lo - tv.lo;
        if (pv.lo > tv.hi) {
            // Mass is certainly positive; report the certified lower gap.
            return pv.lo - tv.hi;
        }
        eps /= 16;
        if (rat_den(eps) > ipow(Int(2), 200))
            fail(ErrorCode::BudgetExceeded,
                 "cannot decide disjointness for lags " + a.str() + ", " + b.str());
    }
}

} // namespace

DisjointnessReport lemma_disjointness_report(CorrelationEngine& engine, int j) {
    Construction& construction = engine.construction();
    construction.ensure_stage(j + 1);
    const auto& q = construction.offsets(j);
    FloorSet x1 = construction.x1(1);

    struct OrderedPair {
        std::size_t i, i2;
        Int lag;
    };
    std::vector<OrderedPair> pairs;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t m = 0; m < q.size(); ++m)
            if (i != m) pairs.push_back(OrderedPair{i, m, q[i] - q[m]});

    DisjointnessReport report;
    report.stage = j;
    report.all_pairs = true;
    report.distinct_sources = true;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        for (std::size_t b = a + 1; b < pairs.size(); ++b) {
            report.pair_count += 1;
            Rat mass = escape_overlap(engine, x1, pairs[a].lag, pairs[b].lag);
            if (mass == 0) continue;
            report.violations += 1;
            report.all_pairs = false;
            if (pairs[a].i2 != pairs[b].i2) report.distinct_sources = false;
            if (report.first_violation_mass == 0) {
                report.first_violation_a = pairs[a].lag;
                report.first_violation_b = pairs[b].lag;
                report.first_violation_mass = mass;
            }
        }
    }
    return report;
}

bool lemma_disjointness_check(CorrelationEngine& engine, int j) {
    return lemma_disjointness_report(engine, j).all_pairs;
}

SupportReport indicator_support_check(CorrelationEngine& engine, int j, unsigned d) {
    if (d < 1) fail(ErrorCode::InvalidSpec, "d must be >= 1");
    auto verdicts = check_sidon(engine.construction(), j);
    if (verdicts.empty() || !verdicts.back().sidon)
        fail(ErrorCode::NotSidon,
             "stage " + std::to_string(j) + " fails the structural sidon check");

    SupportReport report;
    report.stage = j;
    report.d = d;
    DisjointnessReport disjoint = lemma_disjointness_report(engine, j);
    report.indicator_valued = disjoint.all_pairs;
    report.distinct_source_disjoint = disjoint.distinct_sources;
    report.witness_a = disjoint.first_violation_a;
    report.witness_b = disjoint.first_violation_b;
    report.witness_mass = disjoint.first_violation_mass;

    Construction& construction = engine.construction();
    LagFamily family = lag_family(construction, j);
    Rat support = 0;
    for (const auto& lag : family.lags) support += Rat(1) - rpow(engine.x1_lag_exact(lag), d);
    report.support_upper = support;
    const Int& r = construction.spec().stage(j).r;
    report.bound = Rat(r * r - r);
    report.within_bound = report.support_upper < report.bound;
    return report;
}

Rat product_side(const ConstructionSpec& spec, int m, unsigned d) {
    if (m < 1) fail(ErrorCode::InvalidSpec, "m must be >= 1");
    Rat product(1);
    for (int j = 1; j <= m - 1; ++j) {
        const Int& r = spec.stage(j).r;
        product *= Rat(1) + Rat(r * r - r) / Rat(ipow(r, 2 * d));
    }
    return product;
}

IdentityReport verify_power_product_identity(CorrelationEngine& engine, int m, unsigned d) {
    IdentityReport report;
    report.m = m;
    report.d = d;
    report.lhs = engine.power_sum(d, m);
    report.rhs = product_side(engine.construction().spec(), m, d);
    report.equal = report.lhs == report.rhs;
    return report;
}

CorrelationValue repeated_average(const std::vector<BlockNormReport>& reports) {
    if (reports.empty()) fail(ErrorCode::InvalidSpec, "repeated_average of no reports");
    Rat lo = 0, hi = 0;
    for (const auto& r : reports) {
        lo += r.dist.lo;
        hi += r.dist.hi;
    }
    Rat n(reports.size());
    if (lo == hi) return CorrelationValue::exactly(lo / n);
    return CorrelationValue::enclosure(lo / n, hi / n);
}

} // namespace ranklab
