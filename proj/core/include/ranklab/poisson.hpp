#pragma once

#include "ranklab/correlation.hpp"
#include "ranklab/rng.hpp"

namespace ranklab {

/// Exact value of the form coeff * e^(-exponent) with both parts rational.
/// Comparisons and arithmetic that must stay exact are done symbolically;
/// approx() renders a double at output time only.
struct ExactExp {
    Rat coeff;
    Rat exponent;

    double approx() const;
    bool is_zero() const { return coeff == 0; }
    bool operator==(const ExactExp&) const = default;
};

/// Poisson cylinder event: configurations with exactly `count` points in
/// `set`.
struct CylinderEvent {
    FloorSet set;
    Int count;
};

/// Finite conjunction of cylinder events; sets may overlap.
struct CylinderConjunction {
    std::vector<CylinderEvent> events;
};

struct PoissonLimits {
    std::size_t max_events = 12;  // 2^12 Boolean atoms
    Int max_total_count = Int(12);
};

/// Exact Poisson measure of a conjunction: enumerates the Boolean atoms of
/// the event sets and sums the product Poisson masses over all count
/// assignments. Reduces to the independence product formula when the sets
/// are pairwise disjoint.
ExactExp cylinder_measure(Construction& construction, const CylinderConjunction& conjunction,
                          const PoissonLimits& limits = {});

/// A point transformation the suspension calculus can push cylinders
/// through: a power of the base automorphism, or the involution that swaps
/// two disjoint translate floor sets and fixes everything else.
class PointMap {
public:
    static PointMap power(Int n);
    static PointMap involution(FloorSet e, FloorSet re);

    /// Image of a floor set, exact; throws Unresolvable if a power image
    /// cannot be certified at any built stage.
    FloorSet apply(CorrelationEngine& engine, const FloorSet& set) const;

private:
    PointMap() = default;
    bool is_power_ = true;
    Int n_;
    FloorSet e_;
    FloorSet re_;
    Int delta_;
};

/// Events with sets replaced by their images, counts unchanged. The induced
/// suspension map preserves the Poisson measure, so cylinder_measure before
/// and after agree whenever the images resolve.
CylinderConjunction image_conjunction(CorrelationEngine& engine,
                                      const CylinderConjunction& conjunction,
                                      const PointMap& map);

/// Sampled Poisson configuration over the floors of one built tower.
struct Configuration {
    int stage = 0;
    /// (floor index, offset within the floor in [0,1) of its measure)
    std::vector<std::pair<Int, double>> points;
};

Configuration sample_configuration(Construction& construction, int region_stage,
                                   CounterRng& rng);

struct McEstimate {
    double estimate = 0;
    double stderr_est = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Empirical frequency of the conjunction over independent configurations
/// sampled on the stage-`region_stage` tower, with binomial standard error.
/// Sample i draws from substream i, so results are independent of worker
/// count and reproducible from (seed, samples) alone; `jobs` only splits
/// the index range across threads.
McEstimate mc_estimate(Construction& construction, const CylinderConjunction& conjunction,
                       int region_stage, std::uint64_t samples, const CounterRng& rng,
                       unsigned jobs = 1);

} // namespace ranklab
