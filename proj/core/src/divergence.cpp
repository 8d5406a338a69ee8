#include "ranklab/divergence.hpp"

#include <algorithm>
#include <sstream>

namespace ranklab {

SequenceRule SequenceRule::affine(Int slope, Int offset) {
    if (slope < 1) fail(ErrorCode::InvalidSpec, "affine sequence needs slope >= 1");
    SequenceRule rule;
    rule.kind_ = Kind::Affine;
    rule.slope_ = std::move(slope);
    rule.offset_ = std::move(offset);
    return rule;
}

SequenceRule SequenceRule::monomial(unsigned power, Int scale) {
    if (power < 1 || scale < 1) fail(ErrorCode::InvalidSpec, "monomial sequence needs power, scale >= 1");
    SequenceRule rule;
    rule.kind_ = Kind::Monomial;
    rule.power_ = power;
    rule.scale_ = std::move(scale);
    return rule;
}

SequenceRule SequenceRule::staircase(std::vector<StairBlock> blocks) {
    if (blocks.empty()) fail(ErrorCode::InvalidSpec, "staircase sequence needs blocks");
    if (blocks.front().first_index != 1)
        fail(ErrorCode::InvalidSpec, "staircase must start at index 1");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].gap < 1) fail(ErrorCode::InvalidSpec, "staircase gap must be >= 1");
        if (i > 0 && blocks[i].first_index <= blocks[i - 1].first_index)
            fail(ErrorCode::InvalidSpec, "staircase block indices must increase");
    }
    SequenceRule rule;
    rule.kind_ = Kind::Staircase;
    rule.blocks_ = std::move(blocks);
    // Monotonicity across block boundaries.
    for (std::size_t i = 0; i + 1 < rule.blocks_.size(); ++i) {
        Int last_index = rule.blocks_[i + 1].first_index - 1;
        Int last_value = rule.blocks_[i].first_value +
                         rule.blocks_[i].gap * (last_index - rule.blocks_[i].first_index);
        if (rule.blocks_[i + 1].first_value <= last_value)
            fail(ErrorCode::InvalidSpec, "staircase values must increase across blocks");
    }
    return rule;
}

Int SequenceRule::operator()(const Int& n) const {
    if (n < 1) fail(ErrorCode::InvalidSpec, "sequence index must be >= 1");
    switch (kind_) {
        case Kind::Affine: return slope_ * n + offset_;
        case Kind::Monomial: return scale_ * ipow(n, power_);
        case Kind::Staircase: {
            auto it = std::upper_bound(
                blocks_.begin(), blocks_.end(), n,
                [](const Int& v, const StairBlock& b) { return v < b.first_index; });
            require_internal(it != blocks_.begin(), "staircase lookup before first block");
            --it;
            return it->first_value + it->gap * (n - it->first_index);
        }
    }
    fail(ErrorCode::InternalInvariant, "unknown sequence kind");
}

Int SequenceRule::last_leq(const Int& bound) const {
    const SequenceRule& f = *this;
    if (f(Int(1)) > bound) return 0;
    Int hi = 1;
    while (f(hi) <= bound) hi *= 2;
    Int lo = hi / 2; // f(lo) <= bound < f(hi)
    while (hi - lo > 1) {
        Int mid = (lo + hi) / 2;
        if (f(mid) <= bound)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::string SequenceRule::describe() const {
    std::ostringstream out;
    switch (kind_) {
        case Kind::Affine:
            out << slope_ << "*n";
            if (offset_ != 0) out << (offset_ > 0 ? "+" : "") << offset_;
            break;
        case Kind::Monomial:
            if (scale_ != 1) out << scale_ << "*";
            out << "n^" << power_;
            break;
        case Kind::Staircase: out << "staircase(" << blocks_.size() << " blocks)"; break;
    }
    return out.str();
}

IntervalPermutation::IntervalPermutation(int stage, std::vector<Piece> pieces)
    : stage_(stage), pieces_(std::move(pieces)) {
    auto by_src = [](const Piece& a, const Piece& b) { return a.src_lo < b.src_lo; };
    std::sort(pieces_.begin(), pieces_.end(), by_src);
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
        require_internal(pieces_[i].src_hi <= pieces_[i + 1].src_lo,
                         "permutation pieces overlap in source");
    inverse_pieces_.reserve(pieces_.size());
    for (const auto& piece : pieces_)
        inverse_pieces_.push_back(
            Piece{piece.src_lo + piece.delta, piece.src_hi + piece.delta, -piece.delta});
    std::sort(inverse_pieces_.begin(), inverse_pieces_.end(), by_src);
    for (std::size_t i = 0; i + 1 < inverse_pieces_.size(); ++i)
        require_internal(inverse_pieces_[i].src_hi <= inverse_pieces_[i + 1].src_lo,
                         "permutation pieces overlap in image");
}

FloorSet IntervalPermutation::map_through(const FloorSet& set, const std::vector<Piece>& pieces) {
    if (pieces.empty()) return set;
    std::vector<Interval> out;
    for (const auto& iv : set.intervals()) {
        Int cursor = iv.lo;
        auto it = std::upper_bound(pieces.begin(), pieces.end(), cursor,
                                   [](const Int& v, const Piece& p) { return v < p.src_lo; });
        if (it != pieces.begin()) {
            auto prev = std::prev(it);
            if (prev->src_hi > cursor) it = prev;
        }
        while (cursor < iv.hi) {
            if (it == pieces.end() || it->src_lo >= iv.hi) {
                out.push_back(Interval{cursor, iv.hi}); // identity tail
                break;
            }
            if (it->src_lo > cursor) {
                out.push_back(Interval{cursor, it->src_lo}); // identity gap
                cursor = it->src_lo;
            }
            Int top = std::min(iv.hi, it->src_hi);
            out.push_back(Interval{cursor + it->delta, top + it->delta});
            cursor = top;
            ++it;
        }
    }
    return FloorSet(set.stage(), std::move(out));
}

FloorSet IntervalPermutation::apply(const FloorSet& set) const {
    require_internal(set.stage() == stage_ || pieces_.empty(),
                     "permutation applied at the wrong stage");
    return map_through(set, pieces_);
}

FloorSet IntervalPermutation::apply_inverse(const FloorSet& set) const {
    require_internal(set.stage() == stage_ || pieces_.empty(),
                     "permutation applied at the wrong stage");
    return map_through(set, inverse_pieces_);
}

namespace {

StageParams katok_params(int j) {
    // r = 2j columns, no spacers on the first j, one spacer on the rest.
    StageParams params;
    params.r = 2 * j;
    params.spacers.assign(static_cast<std::size_t>(2 * j), Int(0));
    for (int i = j; i < 2 * j; ++i) params.spacers[i] = 1;
    return params;
}

} // namespace

void DivergenceScenario::build(bool staircase_mode, const DivergenceOptions& options,
                               SequencePair pair) {
    options_ = options;
    if (options.h1 < 1) fail(ErrorCode::InvalidSpec, "h1 must be >= 1");
    if (options.active_stages < 1) fail(ErrorCode::InvalidSpec, "need at least one stage");

    std::vector<Int> heights{options.h1}; // heights[j-1] = h_j
    std::vector<StageParams> stage_params;
    std::vector<SequenceRule::StairBlock> p_blocks, q_blocks;
    Int table_end = 0; // last index covered by the staircase tables
    Int p_last = 0, q_last = 0;

    auto eval_p = [&](const Int& n) {
        return staircase_mode ? SequenceRule::staircase(p_blocks)(n) : pair.p(n);
    };
    auto eval_q = [&](const Int& n) {
        return staircase_mode ? SequenceRule::staircase(q_blocks)(n) : pair.q(n);
    };

    for (int j = 1; j <= options.active_stages; ++j) {
        Int hj = heights[j - 1];
        if (is_katok(j)) {
            StageParams params = katok_params(j);
            heights.push_back(hj * params.r + params.spacer_total());
            stage_params.push_back(std::move(params));
            windows_.push_back(StageWindow{j, (j % 2) != 0, Int(1), Int(0)});
            continue;
        }
        if (staircase_mode) {
            Int gp = 2 * hj + 1;
            Int gq = 2 * hj + 3;
            Int p_first = std::max(p_last + gp, 2 * hj + 1);
            Int q_first = std::max(q_last + gq, 2 * hj + 1);
            p_blocks.push_back(SequenceRule::StairBlock{table_end + 1, p_first, gp});
            q_blocks.push_back(SequenceRule::StairBlock{table_end + 1, q_first, gq});
        }
        // Second spacer: strictly above max{p(j h_j), q(j h_j)}.
        Int probe = Int(j) * hj;
        Int s2 = std::max(eval_p(probe), eval_q(probe)) + 1;
        StageParams params;
        params.r = 2;
        params.spacers = {Int(0), s2};
        Int h_next = 2 * hj + s2;

        bool odd = (j % 2) != 0;
        Int upper = h_next - (odd ? 4 : 2) * hj; // exclusive window bound
        SequenceRule p_rule = staircase_mode ? SequenceRule::staircase(p_blocks) : pair.p;
        SequenceRule q_rule = staircase_mode ? SequenceRule::staircase(q_blocks) : pair.q;
        Int n_lo = std::max(p_rule.first_above(2 * hj), q_rule.first_above(2 * hj));
        Int n_hi = std::min(p_rule.last_leq(upper - 1), q_rule.last_leq(upper - 1));
        if (j > options.uncapped_stages && n_hi >= n_lo)
            n_hi = std::min(n_hi, n_lo + options.window_cap - 1);
        windows_.push_back(StageWindow{j, odd, n_lo, n_hi});

        if (staircase_mode) {
            // Freeze this stage's table through max(window end, j h_j) so
            // later blocks cannot change the values the spacer rule used.
            Int cover = std::max(probe, n_hi);
            cover = std::max(cover, table_end + 1);
            table_end = cover;
            p_last = eval_p(cover);
            q_last = eval_q(cover);
        }
        heights.push_back(h_next);
        stage_params.push_back(std::move(params));
    }

    if (staircase_mode) {
        pair_.p = SequenceRule::staircase(p_blocks);
        pair_.q = SequenceRule::staircase(q_blocks);
    } else {
        pair_ = std::move(pair);
    }

    std::string name = staircase_mode ? "sigma-staircase" : "sigma-pair";
    ConstructionSpec spec = ConstructionSpec::from_stages(options.h1, stage_params, name);
    construction_ = std::make_shared<Construction>(std::move(spec));
    const StageState& top = construction_->ensure_stage(options.active_stages + 1);
    require_internal(top.h == heights.back(), "height recursion mismatch in scenario build");
    series_stage_ = options.active_stages + 1;
}

DivergenceScenario DivergenceScenario::staircase(const DivergenceOptions& options) {
    DivergenceScenario scenario;
    scenario.build(true, options, SequencePair{});
    return scenario;
}

DivergenceScenario DivergenceScenario::from_pair(SequencePair pair,
                                                 const DivergenceOptions& options) {
    DivergenceScenario scenario;
    scenario.build(false, options, std::move(pair));
    return scenario;
}

Int DivergenceScenario::block_bound(int j) {
    const StageState& low = construction_->ensure_stage(j);
    const StageState& high = construction_->ensure_stage(j + 1);
    Int bound = high.h - 4 * low.h;
    if (bound < 1) return 0;
    return std::min(pair_.p.last_leq(bound), pair_.q.last_leq(bound));
}

const IntervalPermutation& DivergenceScenario::pi(int j) {
    auto it = pis_.find(j);
    if (it != pis_.end()) return it->second;
    if (j < 1 || j > static_cast<int>(windows_.size()))
        fail(ErrorCode::StageUnavailable, "no stage " + std::to_string(j) + " in the scenario");
    const StageWindow& window = windows_[j - 1];
    const StageState& low = construction_->stage(j);
    const StageState& high = construction_->stage(j + 1);
    if (is_katok(j) || window.empty())
        return pis_.emplace(j, IntervalPermutation(j + 1, {})).first->second;

    Int width = 2 * low.h;
    std::vector<IntervalPermutation::Piece> pieces;
    Int prev_src_hi = -1, prev_tgt_hi = -1, prev_n = 0;
    std::vector<Interval> src_list, tgt_list;
    for (Int n = window.first; n <= window.last; ++n) {
        Int src = pair_.q(n);
        Int tgt = pair_.p(n) + (window.odd ? width : 0);
        if (prev_src_hi >= 0 && src < prev_src_hi)
            fail(ErrorCode::PieceCollision, "source intervals for n = " + prev_n.str() +
                                                " and n = " + n.str() + " overlap at stage " +
                                                std::to_string(j));
        if (prev_tgt_hi >= 0 && tgt < prev_tgt_hi)
            fail(ErrorCode::PieceCollision, "image intervals for n = " + prev_n.str() +
                                                " and n = " + n.str() + " overlap at stage " +
                                                std::to_string(j));
        require_internal(src >= 2 * low.h && src + width <= high.h, "source outside the zone");
        require_internal(tgt >= 2 * low.h && tgt + width <= high.h, "image outside the zone");
        pieces.push_back(IntervalPermutation::Piece{src, src + width, tgt - src});
        src_list.push_back(Interval{src, src + width});
        tgt_list.push_back(Interval{tgt, tgt + width});
        prev_src_hi = src + width;
        prev_tgt_hi = tgt + width;
        prev_n = n;
    }
    // Complete order-preservingly on the complement of the moved pieces
    // within the zone [2 h_j, h_{j+1}).
    FloorSet zone = FloorSet::range(j + 1, 2 * low.h, high.h);
    FloorSet src_comp = zone.subtract(FloorSet(j + 1, src_list));
    FloorSet tgt_comp = zone.subtract(FloorSet(j + 1, tgt_list));
    require_internal(src_comp.cardinality() == tgt_comp.cardinality(),
                     "completion mass mismatch");
    auto si = src_comp.intervals().begin();
    auto ti = tgt_comp.intervals().begin();
    Int s_cursor, t_cursor;
    bool s_fresh = true, t_fresh = true;
    while (si != src_comp.intervals().end() && ti != tgt_comp.intervals().end()) {
        if (s_fresh) s_cursor = si->lo, s_fresh = false;
        if (t_fresh) t_cursor = ti->lo, t_fresh = false;
        Int len = std::min(si->hi - s_cursor, ti->hi - t_cursor);
        if (t_cursor != s_cursor)
            pieces.push_back(IntervalPermutation::Piece{s_cursor, s_cursor + len,
                                                        t_cursor - s_cursor});
        s_cursor += len;
        t_cursor += len;
        if (s_cursor == si->hi) ++si, s_fresh = true;
        if (t_cursor == ti->hi) ++ti, t_fresh = true;
    }
    return pis_.emplace(j, IntervalPermutation(j + 1, std::move(pieces))).first->second;
}

FloorSet DivergenceScenario::apply_p(const FloorSet& set, bool inverse) {
    int level = set.stage();
    if (level <= 1 || set.empty()) return set;
    int l = level - 1;
    const StageState& low = construction_->stage(l);
    const auto& offsets = construction_->offsets(l);
    FloorSet result(level);
    FloorSet columns(level);
    for (const auto& offset : offsets) {
        FloorSet part = set.clamped(offset, offset + low.h);
        columns = columns.unite(part);
        if (part.empty()) continue;
        FloorSet inner = part.translated(-offset).retagged(l);
        inner = apply_p(inner, inverse);
        result = result.unite(inner.retagged(level).translated(offset));
    }
    FloorSet zone_part = set.subtract(columns);
    if (!zone_part.empty()) {
        const IntervalPermutation& perm = pi(l);
        zone_part = inverse ? perm.apply_inverse(zone_part) : perm.apply(zone_part);
    }
    return result.unite(zone_part);
}

int DivergenceScenario::series_stage() {
    if (a_lifted_.empty()) {
        a_lifted_ = construction_->lift(construction_->x1(1), series_stage_);
        a_preimage_ = apply_p(a_lifted_, /*inverse=*/true);
    }
    return series_stage_;
}

FloorSet DivergenceScenario::sigma_image(const FloorSet& set, const Int& t, int at_stage) {
    const StageState& state = construction_->ensure_stage(at_stage);
    FloorSet lifted = construction_->lift(set, at_stage);
    if (lifted.empty()) return lifted;
    if (lifted.min() + t < 0 || lifted.max() + t >= state.h)
        fail(ErrorCode::OrbitExit, "sigma^" + t.str() + " leaves tower " +
                                       std::to_string(at_stage));
    return lifted.translated(t);
}

FloorSet DivergenceScenario::conjugated_image(const FloorSet& set, const Int& t, int at_stage) {
    FloorSet pre = apply_p(construction_->lift(set, at_stage), /*inverse=*/true);
    const StageState& state = construction_->stage(at_stage);
    if (!pre.empty() && (pre.min() + t < 0 || pre.max() + t >= state.h))
        fail(ErrorCode::OrbitExit,
             "T^" + t.str() + " leaves tower " + std::to_string(at_stage));
    return apply_p(pre.translated(t), /*inverse=*/false);
}

std::vector<SeriesTerm> DivergenceScenario::average_series(const Int& count) {
    int level = series_stage();
    const StageState& state = construction_->stage(level);
    Rat mu_a = construction_->measure(a_lifted_);
    std::vector<SeriesTerm> terms;
    std::size_t reserve_count = count.convert_to<std::size_t>();
    terms.reserve(reserve_count);
    for (Int n = 1; n <= count; ++n) {
        SeriesTerm term;
        term.n = n;
        term.p_n = pair_.p(n);
        term.q_n = pair_.q(n);
        if (a_lifted_.max() + std::max(term.p_n, term.q_n) >= state.h)
            fail(ErrorCode::OrbitExit, "series index " + n.str() + " leaves tower " +
                                           std::to_string(level) + "; rebuild deeper");
        FloorSet left = a_lifted_.translated(term.p_n);
        FloorSet right = apply_p(a_preimage_.translated(term.q_n), /*inverse=*/false);
        term.base = construction_->measure(left.intersect(right));
        term.poisson_exponent = 2 * mu_a - term.base;
        terms.push_back(std::move(term));
    }
    return terms;
}

DivergenceScenario::WindowCheck DivergenceScenario::verify_window_identities(int j) {
    WindowCheck check;
    if (j < 1 || j > static_cast<int>(windows_.size())) return check;
    const StageWindow& window = windows_[j - 1];
    if (window.empty() || is_katok(j)) return check;
    series_stage();
    const StageState& low = construction_->stage(j);
    for (Int n = window.first; n <= window.last; ++n) {
        FloorSet image = apply_p(a_preimage_.translated(pair_.q(n)), /*inverse=*/false);
        FloorSet aligned = a_lifted_.translated(pair_.p(n));
        bool ok;
        if (window.odd) {
            FloorSet expected = aligned.translated(2 * low.h);
            ok = (image == expected) && !image.intersects(aligned);
        } else {
            ok = image == aligned;
        }
        ++check.checked;
        if (ok) ++check.holds;
    }
    return check;
}

} // namespace ranklab
