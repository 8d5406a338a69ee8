#pragma once

#include <memory>
#include <set>

#include "ranklab/correlation.hpp"

namespace ranklab {

/// Monotone integer sequence given as a rule: affine, monomial, or a
/// staircase block table (per-block first index, first value, and constant
/// gap; values extend past the last block with its gap).
class SequenceRule {
public:
    struct StairBlock {
        Int first_index;
        Int first_value;
        Int gap;
    };

    static SequenceRule affine(Int slope, Int offset = Int(0));
    static SequenceRule monomial(unsigned power, Int scale = Int(1));
    static SequenceRule staircase(std::vector<StairBlock> blocks);

    Int operator()(const Int& n) const;
    /// Largest n >= 1 with value(n) <= bound; 0 when value(1) > bound.
    Int last_leq(const Int& bound) const;
    /// Smallest n >= 1 with value(n) > bound.
    Int first_above(const Int& bound) const { return last_leq(bound) + 1; }

    std::string describe() const;
    const std::vector<StairBlock>& blocks() const { return blocks_; }

    /// Defaults to the identity rule n -> n.
    SequenceRule() = default;

private:
    enum class Kind { Affine, Monomial, Staircase } kind_ = Kind::Affine;
    Int slope_{1};
    Int offset_{0};
    unsigned power_ = 1;
    Int scale_{1};
    std::vector<StairBlock> blocks_;
};

struct SequencePair {
    SequenceRule p;
    SequenceRule q;
};

/// Piecewise-translation bijection of the floors [0, h_{j+1}) of one stage:
/// explicit pieces inside the moved zone, identity elsewhere.
class IntervalPermutation {
public:
    struct Piece {
        Int src_lo;
        Int src_hi; // half-open
        Int delta;  // image is [src_lo + delta, src_hi + delta)
    };

    IntervalPermutation() = default;
    IntervalPermutation(int stage, std::vector<Piece> pieces);

    int stage() const { return stage_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    bool identity() const { return pieces_.empty(); }

    FloorSet apply(const FloorSet& set) const;
    FloorSet apply_inverse(const FloorSet& set) const;

private:
    static FloorSet map_through(const FloorSet& set, const std::vector<Piece>& pieces);

    int stage_ = 0;
    std::vector<Piece> pieces_;          // sorted by src_lo
    std::vector<Piece> inverse_pieces_;  // sorted by src_lo of the inverse
};

struct DivergenceOptions {
    Int h1 = Int(1);
    int active_stages = 5;
    std::set<int> katok_stages;
    /// Stages after this one have their windows truncated to window_cap
    /// indices so deep permutations stay materializable.
    int uncapped_stages = 3;
    Int window_cap = Int(2048);
};

struct StageWindow {
    int j = 0;
    bool odd = false;   // odd stages displace by 2 h_j, even stages align
    Int first = 0;      // 0,0 encodes an empty window
    Int last = -1;
    bool empty() const { return last < first; }
    Int count() const { return empty() ? Int(0) : last - first + 1; }
};

struct SeriesTerm {
    Int n;
    Int p_n;
    Int q_n;
    Rat base;          // mu(sigma^{p(n)} A ∩ T^{q(n)} A), exact
    Rat poisson_exponent; // poisson-level term is exactly e^(-exponent)
};

/// The two-automorphism divergence experiment: a cut-count-2 base
/// construction sigma with s_j(1) = 0 and fast second spacers, per-stage
/// interval permutations moving the q-windows onto the p-windows (aligned on
/// even stages, displaced by 2 h_j on odd ones), and T = P sigma P^{-1}.
class DivergenceScenario {
public:
    /// Sequences built alongside the construction: per-stage gaps 2 h_j + 1
    /// and 2 h_j + 3, so every window index carries a collision-free piece
    /// and window gaps diverge as the displacement construction requires.
    static DivergenceScenario staircase(const DivergenceOptions& options = {});

    /// User-supplied sequence pair; second spacers follow the rule
    /// s_j(2) = max(p(j h_j), q(j h_j)) + 1. Piece placement fails with
    /// PieceCollision when the pair's gaps violate the window hypothesis.
    static DivergenceScenario from_pair(SequencePair pair, const DivergenceOptions& options);

    Construction& sigma() { return *construction_; }
    const SequencePair& pair() const { return pair_; }
    const DivergenceOptions& options() const { return options_; }
    const std::vector<StageWindow>& windows() const { return windows_; }
    bool is_katok(int j) const { return options_.katok_stages.count(j) > 0; }

    /// N_j: the largest n with p(n), q(n) <= h_{j+1} - 4 h_j.
    Int block_bound(int j);

    /// The stage-j floor permutation (built on demand; identity when the
    /// stage window is empty or the stage is a Katok stage).
    const IntervalPermutation& pi(int j);

    /// P sigma^t P^{-1} applied to a floor set, evaluated at stage `at`.
    FloorSet conjugated_image(const FloorSet& set, const Int& t, int at_stage);

    /// sigma^t as a floor translation at stage `at` (OrbitExit if it leaves
    /// the tower).
    FloorSet sigma_image(const FloorSet& set, const Int& t, int at_stage);

    FloorSet apply_p(const FloorSet& set, bool inverse);

    /// First `count` terms of the joint average series for A = X1.
    std::vector<SeriesTerm> average_series(const Int& count);

    /// Exact per-window identity check: on even stages the conjugated image
    /// of A under q(n) equals A + p(n); on odd stages it equals
    /// A + p(n) + 2 h_j and is disjoint from A + p(n).
    struct WindowCheck {
        Int checked = 0;
        Int holds = 0;
    };
    WindowCheck verify_window_identities(int j);

private:
    DivergenceScenario() = default;
    void build(bool staircase_mode, const DivergenceOptions& options, SequencePair pair);
    int series_stage();

    DivergenceOptions options_;
    SequencePair pair_;
    std::shared_ptr<Construction> construction_;
    std::vector<StageWindow> windows_; // index j-1
    std::map<int, IntervalPermutation> pis_;
    FloorSet a_lifted_;      // X1 at the series stage
    FloorSet a_preimage_;    // P^{-1} X1 at the series stage
    int series_stage_ = 0;
};

} // namespace ranklab
