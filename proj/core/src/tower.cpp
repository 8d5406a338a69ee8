#include "ranklab/tower.hpp"

namespace ranklab {

std::vector<Int> column_offsets(const Int& h, const StageParams& params) {
    std::vector<Int> q;
    q.reserve(static_cast<std::size_t>(params.spacers.size()));
    Int cur = 0;
    for (std::size_t i = 0; i < params.spacers.size(); ++i) {
        q.push_back(cur);
        cur += h + params.spacers[i];
    }
    return q;
}

Construction::Construction(ConstructionSpec spec) : spec_(std::move(spec)) {
    StageState first;
    first.j = 1;
    first.h = spec_.h1();
    first.floor_measure = Rat(1, spec_.h1());
    first.x1_floors = FloorSet::range(1, 0, spec_.h1());
    stages_.push_back(std::move(first));
}

int Construction::built_stages() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(stages_.size());
}

const StageState& Construction::stage(int j) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (j < 1 || j > static_cast<int>(stages_.size()))
        fail(ErrorCode::StageUnavailable,
             "stage " + std::to_string(j) + " not built (have " +
                 std::to_string(stages_.size()) + ")");
    return stages_[j - 1];
}

StageState Construction::extend(const StageState& state, const StageParams& params) {
    auto q = column_offsets(state.h, params);
    StageState next;
    next.j = state.j + 1;
    next.h = state.h * params.r + params.spacer_total();
    next.floor_measure = state.floor_measure / Rat(params.r);
    FloorSet floors(next.j);
    for (const auto& offset : q)
        floors = floors.unite(state.x1_floors.translated(offset).retagged(next.j));
    // Column images never overlap; a cardinality mismatch would mean the
    // offset arithmetic is broken.
    require_internal(floors.cardinality() == state.x1_floors.cardinality() * params.r,
                     "column images of X1 overlap");
    next.x1_floors = std::move(floors);
    return next;
}

const StageState& Construction::ensure_stage(int j) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (j < 1) fail(ErrorCode::StageUnavailable, "stage index " + std::to_string(j));
    while (static_cast<int>(stages_.size()) < j) {
        int built = static_cast<int>(stages_.size());
        if (!spec_.has_stage(built))
            fail(ErrorCode::StageUnavailable,
                 "schedule '" + spec_.name() + "' has no stage " + std::to_string(built) +
                     " parameters; cannot build stage " + std::to_string(built + 1));
        stages_.push_back(extend(stages_.back(), spec_.stage(built)));
    }
    return stages_[j - 1];
}

std::optional<int> Construction::max_stage() const {
    auto count = spec_.finite_stage_count();
    if (!count) return std::nullopt;
    return *count + 1;
}

const std::vector<Int>& Construction::offsets(int j) {
    ensure_stage(j);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = offsets_.find(j);
    if (it == offsets_.end())
        it = offsets_.emplace(j, column_offsets(stages_[j - 1].h, spec_.stage(j))).first;
    return it->second;
}

Rat Construction::measure(const FloorSet& fs) {
    if (fs.stage() < 1)
        fail(ErrorCode::StageMismatch, "floor set has stage " + std::to_string(fs.stage()));
    const StageState& state = ensure_stage(fs.stage());
    return Rat(fs.cardinality()) * state.floor_measure;
}

FloorSet Construction::lift(const FloorSet& fs, int to_stage) {
    if (fs.stage() < 1 || fs.stage() > to_stage)
        fail(ErrorCode::StageMismatch, "cannot lift stage " + std::to_string(fs.stage()) +
                                           " set to stage " + std::to_string(to_stage));
    ensure_stage(to_stage);
    FloorSet out = fs;
    for (int j = fs.stage(); j < to_stage; ++j) {
        const auto& q = offsets(j);
        FloorSet lifted(j + 1);
        for (const auto& offset : q)
            lifted = lifted.unite(out.translated(offset).retagged(j + 1));
        require_internal(lifted.cardinality() == out.cardinality() * Int(q.size()),
                         "lift produced overlapping column images");
        out = std::move(lifted);
    }
    return out;
}

FloorSet Construction::tower_floors(int j) {
    const StageState& state = ensure_stage(j);
    return FloorSet::range(j, 0, state.h);
}

FloorSet Construction::x1(int j) {
    return ensure_stage(j).x1_floors;
}

} // namespace ranklab
