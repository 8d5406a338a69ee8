#pragma once

#include "ranklab/tower.hpp"

namespace ranklab {

/// Dense simulation of the transformation as a permutation-with-holes on
/// the floors of tower max_stage: floor k maps to k+1 where defined. The n-th
/// power is applied pointwise and the intersection measured by enumeration.
///
/// This is the independent cross-check for the interval-set engine: it never
/// touches FloorSet algebra beyond reading interval endpoints, and it equals
/// the engine's stage-max_stage lower bound by construction.
class DenseOracle {
public:
    DenseOracle(Construction& construction, int max_stage, std::size_t dense_budget = 100000);

    /// mu(T^n A ∩ B) restricted to matches resolved inside tower max_stage.
    Rat intersection(const Int& n, const FloorSet& a, const FloorSet& b) const;

    int stage() const { return stage_; }

private:
    std::vector<std::uint64_t> densify(const FloorSet& fs) const;

    Construction& construction_;
    int stage_;
    std::size_t floors_;
    Rat floor_measure_;
};

} // namespace ranklab
