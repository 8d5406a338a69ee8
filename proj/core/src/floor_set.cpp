#include "ranklab/floor_set.hpp"

#include <algorithm>

namespace ranklab {

FloorSet::FloorSet(int stage, std::vector<Interval> intervals)
    : stage_(stage), iv_(std::move(intervals)) {
    canonicalize();
}

void FloorSet::canonicalize() {
    for (const auto& iv : iv_)
        if (iv.hi < iv.lo) fail(ErrorCode::InternalInvariant, "interval with hi < lo");
    std::erase_if(iv_, [](const Interval& iv) { return iv.hi == iv.lo; });
    std::sort(iv_.begin(), iv_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    merged.reserve(iv_.size());
    for (auto& iv : iv_) {
        if (!merged.empty() && iv.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    iv_ = std::move(merged);
}

void FloorSet::require_same_stage(const FloorSet& a, const FloorSet& b) {
    if (a.stage_ != b.stage_)
        fail(ErrorCode::StageMismatch, "floor sets live in stages " + std::to_string(a.stage_) +
                                           " and " + std::to_string(b.stage_));
}

Int FloorSet::cardinality() const {
    Int total = 0;
    for (const auto& iv : iv_) total += iv.length();
    return total;
}

Int FloorSet::min() const {
    require_internal(!iv_.empty(), "min() of empty floor set");
    return iv_.front().lo;
}

Int FloorSet::max() const {
    require_internal(!iv_.empty(), "max() of empty floor set");
    return iv_.back().hi - 1;
}

bool FloorSet::contains(const Int& floor) const {
    auto it = std::upper_bound(iv_.begin(), iv_.end(), floor,
                               [](const Int& v, const Interval& iv) { return v < iv.lo; });
    if (it == iv_.begin()) return false;
    --it;
    return floor < it->hi;
}

bool FloorSet::contains(const FloorSet& other) const {
    require_same_stage(*this, other);
    return other.subtract(*this).empty();
}

bool FloorSet::intersects(const FloorSet& other) const {
    return !intersect(other).empty();
}

FloorSet FloorSet::unite(const FloorSet& other) const {
    require_same_stage(*this, other);
    std::vector<Interval> all = iv_;
    all.insert(all.end(), other.iv_.begin(), other.iv_.end());
    return FloorSet(stage_, std::move(all));
}

FloorSet FloorSet::intersect(const FloorSet& other) const {
    require_same_stage(*this, other);
    std::vector<Interval> out;
    auto a = iv_.begin();
    auto b = other.iv_.begin();
    while (a != iv_.end() && b != other.iv_.end()) {
        Int lo = std::max(a->lo, b->lo);
        Int hi = std::min(a->hi, b->hi);
        if (lo < hi) out.push_back(Interval{lo, hi});
        if (a->hi < b->hi)
            ++a;
        else
            ++b;
    }
    FloorSet result(stage_);
    result.iv_ = std::move(out); // already canonical
    return result;
}

FloorSet FloorSet::subtract(const FloorSet& other) const {
    require_same_stage(*this, other);
    std::vector<Interval> out;
    auto b = other.iv_.begin();
    for (auto iv : iv_) {
        Int cursor = iv.lo;
        while (b != other.iv_.end() && b->hi <= cursor) ++b;
        auto cut = b;
        while (cut != other.iv_.end() && cut->lo < iv.hi) {
            if (cut->lo > cursor) out.push_back(Interval{cursor, cut->lo});
            cursor = std::max(cursor, cut->hi);
            if (cursor >= iv.hi) break;
            ++cut;
        }
        if (cursor < iv.hi) out.push_back(Interval{cursor, iv.hi});
    }
    FloorSet result(stage_);
    result.iv_ = std::move(out);
    return result;
}

FloorSet FloorSet::translated(const Int& offset) const {
    FloorSet result(stage_);
    result.iv_.reserve(iv_.size());
    for (const auto& iv : iv_) result.iv_.push_back(Interval{iv.lo + offset, iv.hi + offset});
    return result;
}

FloorSet FloorSet::clamped(const Int& lo, const Int& hi) const {
    if (hi <= lo) return FloorSet(stage_);
    std::vector<Interval> out;
    for (const auto& iv : iv_) {
        Int a = std::max(iv.lo, lo);
        Int b = std::min(iv.hi, hi);
        if (a < b) out.push_back(Interval{a, b});
    }
    FloorSet result(stage_);
    result.iv_ = std::move(out);
    return result;
}

FloorSet FloorSet::retagged(int stage) const {
    FloorSet result = *this;
    result.stage_ = stage;
    return result;
}

} // namespace ranklab
