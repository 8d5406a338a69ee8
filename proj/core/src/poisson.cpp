#include "ranklab/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ranklab {

Int CounterRng::uniform_below(const Int& bound) {
    require_internal(bound >= 1, "uniform_below with empty range");
    if (bound == 1) return 0;
    unsigned bits = static_cast<unsigned>(msb(bound)) + 1;
    unsigned words = (bits + 63) / 64;
    unsigned top_bits = bits - 64 * (words - 1);
    std::uint64_t top_mask =
        top_bits >= 64 ? ~std::uint64_t(0) : ((std::uint64_t(1) << top_bits) - 1);
    while (true) {
        Int value = 0;
        for (unsigned w = 0; w < words; ++w) {
            std::uint64_t chunk = next();
            if (w + 1 == words) chunk &= top_mask;
            value |= Int(chunk) << (64 * w);
        }
        if (value < bound) return value;
    }
}

std::uint64_t CounterRng::poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean > 700)
        fail(ErrorCode::CombinatorialBudget, "poisson mean too large for inversion sampling");
    double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double product = uniform01();
    while (product > limit) {
        ++k;
        product *= uniform01();
    }
    return k;
}

double ExactExp::approx() const {
    return rat_double(coeff) * std::exp(-rat_double(exponent));
}

namespace {

struct Atom {
    Rat measure;
    std::uint32_t mask; // bit i set when the atom lies inside event i
};

/// Sum over assignments of per-atom counts meeting every event's budget of
/// the product of mu^n / n! factors.
Rat assignment_sum(const std::vector<Atom>& atoms, std::size_t index,
                   std::vector<Int>& remaining, const Rat& prefix) {
    if (index == atoms.size()) {
        for (const auto& r : remaining)
            if (r != 0) return Rat(0);
        return prefix;
    }
    const Atom& atom = atoms[index];
    // Largest count this atom may take: min remaining budget over its events.
    Int cap = -1;
    for (std::size_t i = 0; i < remaining.size(); ++i)
        if (atom.mask & (std::uint32_t(1) << i))
            cap = (cap < 0) ? remaining[i] : std::min(cap, remaining[i]);
    require_internal(cap >= 0, "atom belongs to no event");

    Rat total = 0;
    Rat factor = prefix;
    Int factorial = 1;
    for (Int n = 0; n <= cap; ++n) {
        if (n > 0) {
            factorial *= n;
            factor = prefix * rpow(atom.measure, n.convert_to<unsigned long>()) / Rat(factorial);
            for (std::size_t i = 0; i < remaining.size(); ++i)
                if (atom.mask & (std::uint32_t(1) << i)) remaining[i] -= 1;
        }
        total += assignment_sum(atoms, index + 1, remaining, factor);
    }
    for (Int n = 0; n < cap; ++n)
        for (std::size_t i = 0; i < remaining.size(); ++i)
            if (atom.mask & (std::uint32_t(1) << i)) remaining[i] += 1;
    return total;
}

} // namespace

ExactExp cylinder_measure(Construction& construction, const CylinderConjunction& conjunction,
                          const PoissonLimits& limits) {
    if (conjunction.events.empty()) fail(ErrorCode::InvalidSpec, "empty cylinder conjunction");
    if (conjunction.events.size() > limits.max_events)
        fail(ErrorCode::CombinatorialBudget,
             std::to_string(conjunction.events.size()) + " events exceed the atom budget");
    Int total_count = 0;
    int level = 1;
    for (const auto& event : conjunction.events) {
        if (event.count < 0) fail(ErrorCode::InvalidSpec, "negative cylinder count");
        total_count += event.count;
        level = std::max(level, event.set.stage());
    }
    if (total_count > limits.max_total_count)
        fail(ErrorCode::CombinatorialBudget,
             "total count " + total_count.str() + " exceeds the enumeration budget");

    std::vector<FloorSet> sets;
    sets.reserve(conjunction.events.size());
    for (const auto& event : conjunction.events)
        sets.push_back(construction.lift(event.set, level));

    // Boolean atoms of the lifted sets.
    std::size_t n = sets.size();
    std::vector<Atom> atoms;
    FloorSet union_all(level);
    for (const auto& s : sets) union_all = union_all.unite(s);
    for (std::uint32_t mask = 1; mask < (std::uint32_t(1) << n); ++mask) {
        FloorSet atom = union_all;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::uint32_t(1) << i))
                atom = atom.intersect(sets[i]);
            else
                atom = atom.subtract(sets[i]);
        }
        if (atom.empty()) continue;
        atoms.push_back(Atom{construction.measure(atom), mask});
    }

    ExactExp result;
    result.exponent = construction.measure(union_all);
    std::vector<Int> remaining;
    remaining.reserve(n);
    for (const auto& event : conjunction.events) remaining.push_back(event.count);
    result.coeff = assignment_sum(atoms, 0, remaining, Rat(1));
    return result;
}

PointMap PointMap::power(Int n) {
    PointMap map;
    map.is_power_ = true;
    map.n_ = std::move(n);
    return map;
}

PointMap PointMap::involution(FloorSet e, FloorSet re) {
    if (e.empty() || re.empty()) fail(ErrorCode::InvalidSpec, "involution of empty floor sets");
    if (e.stage() != re.stage())
        fail(ErrorCode::StageMismatch, "involution sets live in different stages");
    if (e.intersects(re)) fail(ErrorCode::InvalidSpec, "involution sets must be disjoint");
    Int delta = re.min() - e.min();
    if (!(e.translated(delta) == re))
        fail(ErrorCode::InvalidSpec, "involution sets are not parallel translates");
    PointMap map;
    map.is_power_ = false;
    map.e_ = std::move(e);
    map.re_ = std::move(re);
    map.delta_ = std::move(delta);
    return map;
}

FloorSet PointMap::apply(CorrelationEngine& engine, const FloorSet& set) const {
    if (is_power_) return engine.image(set, n_);
    int level = std::max(set.stage(), e_.stage());
    Construction& construction = engine.construction();
    FloorSet b = construction.lift(set, level);
    FloorSet e = construction.lift(e_, level);
    FloorSet re = construction.lift(re_, level);
    FloorSet fixed = b.subtract(e).subtract(re);
    FloorSet from_e = b.intersect(e).translated(delta_);
    FloorSet from_re = b.intersect(re).translated(-delta_);
    return fixed.unite(from_e).unite(from_re);
}

CylinderConjunction image_conjunction(CorrelationEngine& engine,
                                      const CylinderConjunction& conjunction,
                                      const PointMap& map) {
    CylinderConjunction out;
    out.events.reserve(conjunction.events.size());
    for (const auto& event : conjunction.events)
        out.events.push_back(CylinderEvent{map.apply(engine, event.set), event.count});
    return out;
}

Configuration sample_configuration(Construction& construction, int region_stage,
                                   CounterRng& rng) {
    const StageState& state = construction.ensure_stage(region_stage);
    Configuration config;
    config.stage = region_stage;
    double mean = rat_double(Rat(state.h) * state.floor_measure);
    std::uint64_t count = rng.poisson(mean);
    config.points.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Int floor = rng.uniform_below(state.h);
        double offset = rng.uniform01();
        config.points.emplace_back(std::move(floor), offset);
    }
    return config;
}

McEstimate mc_estimate(Construction& construction, const CylinderConjunction& conjunction,
                       int region_stage, std::uint64_t samples, const CounterRng& rng,
                       unsigned jobs) {
    if (samples == 0) fail(ErrorCode::InvalidSpec, "mc_estimate needs samples >= 1");
    construction.ensure_stage(region_stage);
    std::vector<FloorSet> sets;
    std::vector<Int> counts;
    for (const auto& event : conjunction.events) {
        if (event.set.stage() > region_stage)
            fail(ErrorCode::RegionTooSmall,
                 "event set at stage " + std::to_string(event.set.stage()) +
                     " does not fit the stage " + std::to_string(region_stage) + " region");
        sets.push_back(construction.lift(event.set, region_stage));
        counts.push_back(event.count);
    }
    auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t local = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            CounterRng stream = rng.substream(i);
            Configuration config = sample_configuration(construction, region_stage, stream);
            bool ok = true;
            for (std::size_t e = 0; e < sets.size() && ok; ++e) {
                Int inside = 0;
                for (const auto& point : config.points)
                    if (sets[e].contains(point.first)) ++inside;
                ok = inside == counts[e];
            }
            if (ok) ++local;
        }
        return local;
    };
    std::uint64_t hits = 0;
    if (jobs <= 1) {
        hits = run_range(0, samples);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::uint64_t> partial(jobs, 0);
        std::uint64_t chunk = samples / jobs + 1;
        for (unsigned w = 0; w < jobs; ++w) {
            std::uint64_t begin = std::min<std::uint64_t>(samples, w * chunk);
            std::uint64_t end = std::min<std::uint64_t>(samples, begin + chunk);
            workers.emplace_back([&, w, begin, end] { partial[w] = run_range(begin, end); });
        }
        for (auto& worker : workers) worker.join();
        for (auto p : partial) hits += p;
    }
    McEstimate out;
    out.samples = samples;
    out.seed = rng.seed();
    out.estimate = static_cast<double>(hits) / static_cast<double>(samples);
    out.stderr_est =
        std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
    return out;
}

} // namespace ranklab
