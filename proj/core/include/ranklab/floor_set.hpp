#pragma once

#include <initializer_list>
#include <vector>

#include "ranklab/numeric.hpp"

namespace ranklab {

/// Half-open interval [lo, hi) of floor indices.
struct Interval {
    Int lo;
    Int hi;

    Int length() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Sorted union of disjoint, non-empty, non-adjacent half-open intervals of
/// big-integer floor indices, tagged with the tower stage it lives in.
///
/// This is the universal set representation of the library: X1 floors,
/// spacer zones, event sets and their images are all FloorSets. Towers in
/// deep stages have astronomically many floors, but every set of interest
/// is a union of few intervals, so all operations are interval-merge sweeps.
class FloorSet {
public:
    FloorSet() : stage_(0) {}
    explicit FloorSet(int stage) : stage_(stage) {}
    FloorSet(int stage, std::vector<Interval> intervals);
    FloorSet(int stage, std::initializer_list<Interval> intervals)
        : FloorSet(stage, std::vector<Interval>(intervals)) {}

    static FloorSet single(int stage, const Int& floor) {
        return FloorSet(stage, {Interval{floor, floor + 1}});
    }
    static FloorSet range(int stage, const Int& lo, const Int& hi) {
        return hi > lo ? FloorSet(stage, {Interval{lo, hi}}) : FloorSet(stage);
    }

    int stage() const { return stage_; }
    const std::vector<Interval>& intervals() const { return iv_; }
    bool empty() const { return iv_.empty(); }
    std::size_t interval_count() const { return iv_.size(); }

    /// Number of floors in the set.
    Int cardinality() const;

    Int min() const;
    Int max() const; // largest member (inclusive)

    bool contains(const Int& floor) const;
    bool contains(const FloorSet& other) const;
    bool intersects(const FloorSet& other) const;

    FloorSet unite(const FloorSet& other) const;
    FloorSet intersect(const FloorSet& other) const;
    FloorSet subtract(const FloorSet& other) const;
    FloorSet translated(const Int& offset) const;
    /// Intersection with [lo, hi).
    FloorSet clamped(const Int& lo, const Int& hi) const;
    /// Same interval data re-tagged to another stage (used by lifting code).
    FloorSet retagged(int stage) const;

    bool operator==(const FloorSet&) const = default;

private:
    void canonicalize();
    static void require_same_stage(const FloorSet& a, const FloorSet& b);

    int stage_;
    std::vector<Interval> iv_;
};

} // namespace ranklab
