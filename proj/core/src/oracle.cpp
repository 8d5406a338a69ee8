#include "ranklab/oracle.hpp"

#include <bit>

namespace ranklab {

namespace {

constexpr std::size_t kWordBits = 64;

inline bool test_bit(const std::vector<std::uint64_t>& bits, std::size_t k) {
    return (bits[k / kWordBits] >> (k % kWordBits)) & 1u;
}

inline void set_bit(std::vector<std::uint64_t>& bits, std::size_t k) {
    bits[k / kWordBits] |= std::uint64_t(1) << (k % kWordBits);
}

} // namespace

DenseOracle::DenseOracle(Construction& construction, int max_stage, std::size_t dense_budget)
    : construction_(construction), stage_(max_stage) {
    const StageState& state = construction_.ensure_stage(max_stage);
    if (state.h > Int(dense_budget))
        fail(ErrorCode::TooLarge, "tower of height " + state.h.str() +
                                      " exceeds the dense enumeration budget of " +
                                      std::to_string(dense_budget));
    floors_ = state.h.convert_to<std::size_t>();
    floor_measure_ = state.floor_measure;
}

std::vector<std::uint64_t> DenseOracle::densify(const FloorSet& fs) const {
    if (fs.stage() < 1 || fs.stage() > stage_)
        fail(ErrorCode::StageMismatch,
             "oracle at stage " + std::to_string(stage_) + " cannot densify a stage " +
                 std::to_string(fs.stage()) + " set");
    // Dense bits at the set's own stage, then expanded column by column so
    // the lifting path is pointwise rather than interval arithmetic.
    std::size_t h = construction_.stage(fs.stage()).h.convert_to<std::size_t>();
    std::vector<std::uint64_t> bits(h / kWordBits + 1, 0);
    for (const auto& iv : fs.intervals()) {
        std::size_t lo = iv.lo.convert_to<std::size_t>();
        std::size_t hi = iv.hi.convert_to<std::size_t>();
        for (std::size_t k = lo; k < hi; ++k) set_bit(bits, k);
    }
    for (int j = fs.stage(); j < stage_; ++j) {
        std::size_t h_next = construction_.stage(j + 1).h.convert_to<std::size_t>();
        std::vector<std::uint64_t> next(h_next / kWordBits + 1, 0);
        for (const auto& q : construction_.offsets(j)) {
            std::size_t base = q.convert_to<std::size_t>();
            for (std::size_t k = 0; k < h; ++k)
                if (test_bit(bits, k)) set_bit(next, base + k);
        }
        bits = std::move(next);
        h = h_next;
    }
    return bits;
}

Rat DenseOracle::intersection(const Int& n, const FloorSet& a, const FloorSet& b) const {
    // mu(T^n A ∩ B) = mu(A ∩ T^{-n} B): count k with k in A and k+n in B.
    if (n < 0) return intersection(-n, b, a);
    std::size_t shift = 0;
    if (n > Int(floors_)) return Rat(0);
    shift = n.convert_to<std::size_t>();

    auto a_bits = densify(a);
    auto b_bits = densify(b);
    std::size_t words = floors_ / kWordBits + 1;
    std::uint64_t count = 0;
    std::size_t word_shift = shift / kWordBits;
    std::size_t bit_shift = shift % kWordBits;
    for (std::size_t w = 0; w + word_shift < words; ++w) {
        // bits of B at positions [w*64 + shift, ...)
        std::uint64_t hi_part = b_bits[w + word_shift] >> bit_shift;
        if (bit_shift != 0 && w + word_shift + 1 < words)
            hi_part |= b_bits[w + word_shift + 1] << (kWordBits - bit_shift);
        count += static_cast<std::uint64_t>(std::popcount(a_bits[w] & hi_part));
    }
    return Rat(count) * floor_measure_;
}

} // namespace ranklab
