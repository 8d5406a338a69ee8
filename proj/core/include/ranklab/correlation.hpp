#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "ranklab/tower.hpp"

namespace ranklab {

/// Exact rational correlation, or a certified rational enclosure when
/// exactness is unattainable at finite stage.
struct CorrelationValue {
    Rat lo;
    Rat hi;
    bool exact = false;

    static CorrelationValue exactly(Rat v) { return CorrelationValue{v, v, true}; }
    static CorrelationValue enclosure(Rat lo, Rat hi) {
        require_internal(lo <= hi, "correlation enclosure with lo > hi");
        return CorrelationValue{std::move(lo), std::move(hi), false};
    }
    Rat width() const { return hi - lo; }
};

/// Denotes mu( intersection over i of T^{shift_i} set_i ).
struct ShiftedSet {
    Int shift;
    FloorSet set;
};

struct IntersectionQuery {
    std::vector<ShiftedSet> terms;
};

struct EngineLimits {
    int max_stage = 64;
    std::size_t max_intervals = 4'000'000;
    std::size_t max_pairs = 40'000'000; // interval pairs in difference profiles
};

/// One maximal range of lags on which the match-count function
/// n |-> |(A + n) ∩ B| is affine: count(n) = value_lo + slope * (n - n_lo).
struct LagSegment {
    Int n_lo;
    Int n_hi; // inclusive
    Int value_lo;
    Int slope;
};

/// Piecewise-affine profile of all match counts between two interval sets;
/// the sparse representation of the full correlation sequence at one stage.
std::vector<LagSegment> difference_profile(const FloorSet& a, const FloorSet& b,
                                           std::size_t max_pairs);

/// Computes mu(T^n A ∩ B) and multi-fold intersection measures by the
/// stabilization algorithm: lift everything to stage L, count fully resolved
/// matches (a nondecreasing exact lower bound), and certify exactness when
/// unresolved top-of-column mass provably lands in spacers.
class CorrelationEngine {
public:
    explicit CorrelationEngine(Construction& construction, EngineLimits limits = {})
        : construction_(construction), limits_(limits) {}

    Construction& construction() { return construction_; }
    const EngineLimits& limits() const { return limits_; }

    /// mu(T^n A ∩ B) within eps (eps = 0 demands exactness).
    CorrelationValue correlation(const Int& n, const FloorSet& a, const FloorSet& b,
                                 const Rat& eps);

    CorrelationValue multi_intersection(const IntersectionQuery& query, const Rat& eps);

    /// The stabilization algorithm's exact lower bound at one fixed stage:
    /// the measure of the fully resolved matches inside tower `level`.
    Rat stage_lower_bound(int level, const Int& n, const FloorSet& a, const FloorSet& b);

    /// c_n = mu(T^n X1 ∩ X1), exact; cached per lag. Throws NotExact when
    /// the schedule cannot certify within the stage budget.
    Rat x1_lag_exact(const Int& n);

    /// Exact sum over |n| < h_m of c_n^{2d}.
    Rat power_sum(unsigned d, int m);

    /// Number of positive lags n in (h_j, h_{j+1}] with c_n = 1/r_j.
    Int lag_census(int j);

    /// All lags 0 < n <= n_max with mu(T^n A ∩ A) > 0, with exact measures.
    std::vector<std::pair<Int, Rat>> positive_lags(const FloorSet& a, const Int& n_max,
                                                   std::size_t cap);

    /// T^n A as an exact floor set at some certified stage, or Unresolvable.
    FloorSet image(const FloorSet& a, const Int& n);

    /// Stage L at which all lags |n| <= lag_bound are certified exact
    /// (all unresolved boundary mass provably maps into spacers).
    int certified_stage(const Int& lag_bound);

private:
    struct Evaluation {
        Rat lo;
        Rat hi;
        bool exact;
        int stage;
    };
    Evaluation evaluate(std::vector<ShiftedSet> terms, const Rat& eps, bool need_exact);

    Construction& construction_;
    EngineLimits limits_;
    std::mutex cache_mutex_;
    std::map<Int, Rat> x1_cache_;
};

} // namespace ranklab
