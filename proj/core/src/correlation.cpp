#include "ranklab/correlation.hpp"

#include <algorithm>

namespace ranklab {

namespace {

Rat min_measure(Construction& c, const std::vector<ShiftedSet>& terms) {
    Rat best;
    bool first = true;
    for (const auto& term : terms) {
        Rat m = c.measure(term.set);
        if (first || m < best) best = m;
        first = false;
    }
    return best;
}

} // namespace

std::vector<LagSegment> difference_profile(const FloorSet& a, const FloorSet& b,
                                           std::size_t max_pairs) {
    if (a.interval_count() * b.interval_count() > max_pairs)
        fail(ErrorCode::BudgetExceeded,
             "difference profile over " + std::to_string(a.interval_count()) + "x" +
                 std::to_string(b.interval_count()) + " interval pairs exceeds budget");
    // Each interval pair contributes a trapezoid to count(n) = |(A+n) ∩ B|.
    // Accumulate second differences of the count function, then sweep.
    std::map<Int, Int> slope_delta;
    for (const auto& ia : a.intervals()) {
        for (const auto& ib : b.intervals()) {
            Int rise = std::min(ia.length(), ib.length());
            // count rises by 1 per lag on [c-b+1, c-b+rise], falls on
            // [d-a-rise+1, d-a], with I=[a,b), J=[c,d).
            slope_delta[ib.lo - ia.hi + 1] += 1;
            slope_delta[ib.lo - ia.hi + 1 + rise] -= 1;
            slope_delta[ib.hi - ia.lo - rise + 1] -= 1;
            slope_delta[ib.hi - ia.lo + 1] += 1;
        }
    }
    std::vector<LagSegment> segments;
    Int slope = 0;
    Int value = 0; // count at (previous key - 1)
    auto it = slope_delta.begin();
    while (it != slope_delta.end()) {
        Int key = it->first;
        while (it != slope_delta.end() && it->first == key) {
            slope += it->second;
            ++it;
        }
        Int next_key = (it != slope_delta.end()) ? it->first : key; // unused when at end
        if (it == slope_delta.end()) {
            require_internal(slope == 0 && value == 0, "difference profile did not close");
            break;
        }
        LagSegment seg;
        seg.n_lo = key;
        seg.n_hi = next_key - 1;
        seg.slope = slope;
        seg.value_lo = value + slope;
        segments.push_back(seg);
        value = seg.value_lo + slope * (seg.n_hi - seg.n_lo);
    }
    std::erase_if(segments, [](const LagSegment& s) {
        return s.slope == 0 && s.value_lo == 0;
    });
    return segments;
}

CorrelationEngine::Evaluation CorrelationEngine::evaluate(std::vector<ShiftedSet> terms,
                                                          const Rat& eps, bool need_exact) {
    if (terms.empty()) fail(ErrorCode::InvalidSpec, "empty intersection query");
    // Normalize shifts: mu is T-invariant, so subtract the minimum shift.
    // Afterwards every shift is >= 0 and at least one is 0, which the
    // spacer certificate below relies on.
    Int min_shift = terms.front().shift;
    for (const auto& t : terms) min_shift = std::min(min_shift, t.shift);
    Int max_shift = 0;
    for (auto& t : terms) {
        t.shift -= min_shift;
        max_shift = std::max(max_shift, t.shift);
    }

    int level = 1;
    for (const auto& t : terms) level = std::max(level, t.set.stage());
    Rat cap = min_measure(construction_, terms);

    std::vector<FloorSet> lifted;
    lifted.reserve(terms.size());
    for (const auto& t : terms) lifted.push_back(construction_.lift(t.set, level));

    bool saw_short_spacer = false;
    while (true) {
        const StageState& state = construction_.ensure_stage(level);
        FloorSet inter = FloorSet::range(level, 0, state.h);
        Rat unresolved = 0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const Int& shift = terms[i].shift;
            FloorSet resolved =
                lifted[i].clamped(0, state.h - shift).translated(shift);
            inter = inter.intersect(resolved);
            unresolved += construction_.measure(lifted[i].clamped(state.h - shift, state.h));
        }
        Rat lo = Rat(inter.cardinality()) * state.floor_measure;
        Rat hi = std::min(lo + unresolved, cap);

        if (unresolved == 0) return Evaluation{lo, lo, true, level};

        bool spacer_certificate =
            construction_.spec().has_stage(level) &&
            construction_.spec().stage(level).min_spacer() >= max_shift;
        if (spacer_certificate) return Evaluation{lo, lo, true, level};
        saw_short_spacer = true;

        if (!need_exact && hi - lo <= eps) return Evaluation{lo, hi, false, level};

        bool can_deepen = construction_.spec().has_stage(level) && level < limits_.max_stage;
        if (can_deepen) {
            const auto& params = construction_.spec().stage(level);
            std::size_t r = params.spacers.size();
            for (const auto& set : lifted)
                if (set.interval_count() * r > limits_.max_intervals) {
                    can_deepen = false;
                    break;
                }
        }
        if (!can_deepen) {
            if (need_exact || eps == 0) {
                if (saw_short_spacer)
                    fail(ErrorCode::NonmonotoneSpacers,
                         "schedule cannot certify exactness for shift spread " +
                             max_shift.str() + " within stage " + std::to_string(level));
                fail(ErrorCode::BudgetExceeded, "stage budget exhausted before certification");
            }
            fail(ErrorCode::BudgetExceeded,
                 "stage budget exhausted at stage " + std::to_string(level) +
                     " with enclosure width " + rat_str(hi - lo));
        }
        ++level;
        for (auto& set : lifted) set = construction_.lift(set, level);
    }
}

CorrelationValue CorrelationEngine::correlation(const Int& n, const FloorSet& a,
                                                const FloorSet& b, const Rat& eps) {
    if (eps < 0) fail(ErrorCode::InvalidSpec, "eps must be >= 0");
    IntersectionQuery query;
    query.terms.push_back(ShiftedSet{n, a});
    query.terms.push_back(ShiftedSet{0, b});
    return multi_intersection(query, eps);
}

CorrelationValue CorrelationEngine::multi_intersection(const IntersectionQuery& query,
                                                       const Rat& eps) {
    if (eps < 0) fail(ErrorCode::InvalidSpec, "eps must be >= 0");
    Evaluation ev = evaluate(query.terms, eps, /*need_exact=*/eps == 0);
    if (ev.exact) return CorrelationValue::exactly(ev.lo);
    return CorrelationValue::enclosure(ev.lo, ev.hi);
}

Rat CorrelationEngine::stage_lower_bound(int level, const Int& n, const FloorSet& a,
                                         const FloorSet& b) {
    const StageState& state = construction_.ensure_stage(level);
    FloorSet src = construction_.lift(n >= 0 ? a : b, level);
    FloorSet dst = construction_.lift(n >= 0 ? b : a, level);
    Int shift = abs(n);
    FloorSet resolved = src.clamped(0, state.h - shift).translated(shift);
    return Rat(resolved.intersect(dst).cardinality()) * state.floor_measure;
}

Rat CorrelationEngine::x1_lag_exact(const Int& n) {
    Int key = abs(n); // c_{-n} = c_n
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = x1_cache_.find(key);
        if (it != x1_cache_.end()) return it->second;
    }
    FloorSet x1 = construction_.x1(1);
    std::vector<ShiftedSet> terms{ShiftedSet{key, x1}, ShiftedSet{0, x1}};
    Rat value;
    try {
        value = evaluate(std::move(terms), Rat(0), /*need_exact=*/true).lo;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonmonotoneSpacers || e.code() == ErrorCode::BudgetExceeded)
            fail(ErrorCode::NotExact, "lag " + n.str() + " uncertifiable: " + e.what());
        throw;
    }
    std::lock_guard<std::mutex> lock(cache_mutex_);
    x1_cache_.emplace(key, value);
    return value;
}

int CorrelationEngine::certified_stage(const Int& lag_bound) {
    // A stage L certifies every lag |n| <= lag_bound at once if either all
    // stage-L spacers are >= lag_bound (unresolved mass maps into spacers)
    // or X1's lift leaves the top lag_bound floors of tower L empty.
    int level = 1;
    while (true) {
        const StageState& state = construction_.ensure_stage(level);
        if (construction_.spec().has_stage(level) &&
            construction_.spec().stage(level).min_spacer() >= lag_bound)
            return level;
        if (state.h > lag_bound &&
            state.x1_floors.clamped(state.h - lag_bound, state.h).empty())
            return level;
        if (!construction_.spec().has_stage(level) || level >= limits_.max_stage)
            fail(ErrorCode::NotExact,
                 "no stage certifies lags up to " + lag_bound.str() + " within budget");
        ++level;
    }
}

Rat CorrelationEngine::power_sum(unsigned d, int m) {
    if (d < 1) fail(ErrorCode::InvalidSpec, "power_sum needs d >= 1");
    if (m < 1) fail(ErrorCode::InvalidSpec, "power_sum needs m >= 1");
    const StageState& target = construction_.ensure_stage(m);
    Int lag_bound = target.h - 1;
    if (lag_bound == 0) return Rat(1); // only n = 0 contributes, c_0 = 1
    int level = certified_stage(lag_bound);
    const StageState& state = construction_.ensure_stage(level);

    auto profile = difference_profile(state.x1_floors, state.x1_floors, limits_.max_pairs);
    unsigned k = 2 * d;
    // Precompute binomials C(k, j).
    std::vector<Int> binom(k + 1);
    binom[0] = 1;
    for (unsigned j = 1; j <= k; ++j) binom[j] = binom[j - 1] * (k - j + 1) / j;

    Rat mu_pow = rpow(state.floor_measure, k);
    Rat total = 0;
    for (const auto& seg : profile) {
        // Restrict to positive lags 1..h_m - 1; negative side is symmetric.
        Int lo = std::max(seg.n_lo, Int(1));
        Int hi = std::min(seg.n_hi, lag_bound);
        if (lo > hi) continue;
        Int alpha = seg.value_lo + seg.slope * (lo - seg.n_lo);
        Int span = hi - lo;
        // sum over t = 0..span of (alpha + slope * t)^k
        Rat sum = 0;
        for (unsigned j = 0; j <= k; ++j) {
            if (seg.slope == 0 && j > 0) break;
            sum += Rat(binom[j] * ipow(alpha, k - j) * ipow(seg.slope, j) *
                       sum_powers(span, j));
        }
        if (seg.slope == 0) sum = Rat(ipow(alpha, k) * (span + 1));
        total += sum;
    }
    return Rat(1) + Rat(2) * mu_pow * total; // n = 0 term is exactly 1
}

Int CorrelationEngine::lag_census(int j) {
    const StageState& low = construction_.ensure_stage(j);
    const StageState& high = construction_.ensure_stage(j + 1);
    int level = certified_stage(high.h);
    const StageState& state = construction_.ensure_stage(level);
    Int matches_for_target; // count value that makes c_n = 1/r_j
    {
        Int x1_count = state.x1_floors.cardinality();
        const Int& r = construction_.spec().stage(j).r;
        require_internal(x1_count % r == 0, "X1 cardinality not divisible by r_j");
        matches_for_target = x1_count / r;
    }
    auto profile = difference_profile(state.x1_floors, state.x1_floors, limits_.max_pairs);
    Int census = 0;
    for (const auto& seg : profile) {
        Int lo = std::max(seg.n_lo, low.h + 1);
        Int hi = std::min(seg.n_hi, high.h);
        if (lo > hi) continue;
        if (seg.slope == 0) {
            if (seg.value_lo == matches_for_target) census += hi - lo + 1;
            continue;
        }
        // solve value_lo + slope * (n - n_lo) == target on [lo, hi]
        Int num = matches_for_target - seg.value_lo;
        if (num % seg.slope != 0) continue;
        Int n = seg.n_lo + num / seg.slope;
        if (n >= lo && n <= hi) census += 1;
    }
    return census;
}

std::vector<std::pair<Int, Rat>> CorrelationEngine::positive_lags(const FloorSet& a,
                                                                  const Int& n_max,
                                                                  std::size_t cap) {
    int level = std::max(certified_stage(n_max), a.stage());
    const StageState& state = construction_.ensure_stage(level);
    FloorSet lifted = construction_.lift(a, level);
    auto profile = difference_profile(lifted, lifted, limits_.max_pairs);
    std::vector<std::pair<Int, Rat>> out;
    for (const auto& seg : profile) {
        Int lo = std::max(seg.n_lo, Int(1));
        Int hi = std::min(seg.n_hi, n_max);
        for (Int n = lo; n <= hi; ++n) {
            Int count = seg.value_lo + seg.slope * (n - seg.n_lo);
            if (count == 0) continue;
            if (out.size() >= cap)
                fail(ErrorCode::CombinatorialBudget,
                     "more than " + std::to_string(cap) + " positive lags");
            out.emplace_back(n, Rat(count) * state.floor_measure);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

FloorSet CorrelationEngine::image(const FloorSet& a, const Int& n) {
    int level = a.stage();
    FloorSet lifted = a;
    while (true) {
        const StageState& state = construction_.ensure_stage(level);
        if (!lifted.empty()) {
            if (n >= 0 && lifted.max() + n < state.h) return lifted.translated(n);
            if (n < 0 && lifted.min() + n >= 0) return lifted.translated(n);
        } else {
            return lifted;
        }
        bool can_deepen = construction_.spec().has_stage(level) && level < limits_.max_stage;
        if (can_deepen) {
            std::size_t r = construction_.spec().stage(level).spacers.size();
            if (lifted.interval_count() * r > limits_.max_intervals) can_deepen = false;
        }
        if (!can_deepen)
            fail(ErrorCode::Unresolvable, "image under shift " + n.str() +
                                              " cannot be certified at any built stage");
        ++level;
        lifted = construction_.lift(lifted, level);
    }
}

} // namespace ranklab
