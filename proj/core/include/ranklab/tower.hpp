#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>

#include "ranklab/floor_set.hpp"
#include "ranklab/schedule.hpp"

namespace ranklab {

/// The stage-j tower: height, exact floor measure under the normalization
/// mu(X1) = 1, and the floors of this tower that make up X1.
struct StageState {
    int j = 0;
    Int h;
    Rat floor_measure;
    FloorSet x1_floors;
};

/// q(i, j) offsets: the floor index at which column i of the stage-j tower
/// sits inside the stage-(j+1) tower. q(1) = 0, strictly increasing.
std::vector<Int> column_offsets(const Int& h, const StageParams& params);

/// Builds a rank-one construction stage by stage. Built stages are immutable
/// and may be read concurrently; building itself is serialized internally.
class Construction {
public:
    explicit Construction(ConstructionSpec spec);

    const ConstructionSpec& spec() const { return spec_; }

    int built_stages() const;

    /// Stage state for 1-based j; stage must already be built.
    const StageState& stage(int j) const;

    /// Builds stages up to j if the schedule provides them.
    const StageState& ensure_stage(int j);

    /// Largest stage the schedule can reach (nullopt when rule-generated).
    std::optional<int> max_stage() const;

    const std::vector<Int>& offsets(int j);

    /// Exact measure of a floor set: interval length times floor measure.
    Rat measure(const FloorSet& fs);

    /// Re-expresses a stage-j floor set as stage-to floors (union over all
    /// column embeddings). Measure is preserved exactly.
    FloorSet lift(const FloorSet& fs, int to_stage);

    /// The full stage-j tower as a floor set of itself.
    FloorSet tower_floors(int j);

    /// X1 as floors of stage j.
    FloorSet x1(int j);

private:
    StageState extend(const StageState& state, const StageParams& params);

    ConstructionSpec spec_;
    mutable std::mutex mutex_;
    std::deque<StageState> stages_;
    std::map<int, std::vector<Int>> offsets_;
};

} // namespace ranklab
