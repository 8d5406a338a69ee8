#pragma once

#include <memory>

#include "ranklab/poisson.hpp"
#include "ranklab/spectral.hpp"

namespace ranklab {

/// The homoclinic repulsion experiment: over a Sidon base construction, the
/// involution R swaps two disjoint translate floor sets E and RE inside X1
/// and the tracked event is D = C(E,0) ∩ C(RE,1). The quantity of interest
/// is mu°(S^n D ∩ T^n D) with S = R T R, which by invariance of the Poisson
/// measure equals the measure of a four-event cylinder conjunction built
/// from T^n E, T^n RE and their R-images.
struct RepulsionOptions {
    /// Class exponent of the base family. The default 0 gives block length
    /// one, i.e. a cut count that grows at every stage, so the per-window
    /// repulsion maxima (aligned mass ~ mu(E)/r_j) strictly decay.
    Rat nu = Rat(0);
    /// Cut count of the first block; block k uses first_r * 2^(k-1).
    Int first_r = Int(2);
    int windows = 3; // stage windows of lags to enumerate
    std::size_t lag_cap = 20000;
    unsigned tensor_exponent = 4;
};

class RepulsionScenario {
public:
    using Options = RepulsionOptions;

    /// E and RE default to the first two columns of X1 inside the stage-2
    /// tower, so U = E ∪ RE is contained in X1 and the X1 correlation
    /// sequence dominates mu(T^n U ∩ U).
    explicit RepulsionScenario(const Options& options = Options{});

    Construction& base() { return *construction_; }
    CorrelationEngine& engine() { return *engine_; }
    const Options& options() const { return options_; }
    const FloorSet& e_set() const { return e_; }
    const FloorSet& re_set() const { return re_; }
    FloorSet u_set() const { return e_.unite(re_); }
    Rat epsilon() const { return epsilon_; } // mu(E) = mu(RE)

    /// mu(D) and friends come from the exact cylinder calculus.
    ExactExp d_measure();

    /// mu°(S^n D ∩ T^n D), exact symbolic value.
    ExactExp repulsion_measure(const Int& n);

    /// All lags 0 < n <= n_max with mu(T^n U ∩ U) > 0.
    std::vector<std::pair<Int, Rat>> overlap_lags(const Int& n_max);

    struct LagRow {
        Int n;
        Rat overlap;       // mu(T^n U ∩ U)
        ExactExp repulsion;
    };

    struct Report {
        std::vector<LagRow> rows;      // nonzero-overlap lags through the window range
        Int n_max;                     // last lag examined
        Int last_nonzero_lag;          // beyond this, terms up to n_max are certified zero
        double fitted_const = 0;       // max over rows of repulsion / overlap
        std::vector<double> window_max; // max repulsion value per stage window
        Rat overlap_power_sum;         // sum of overlap^{2d'} with 2d' = tensor exponent
        Rat product_tail_bound;        // (product side - 1) / 2 for d = exponent/2
        bool sum_within_bound = false;
        double repulsion_power_sum = 0; // numeric sum of repulsion^exponent
        bool tensor_sum_within_fitted = false;
    };

    /// Enumerates the nonzero-overlap lags through `windows` stage windows,
    /// evaluates the repulsion measure at each, fits the constant in
    /// repulsion <= const * overlap, and compares the fourth-power partial
    /// sums against the product-side tail bound.
    Report run();

private:
    CylinderConjunction conjunction_at(const Int& n);
    void ensure_lifted(const Int& n_max);
    FloorSet swap_image(const FloorSet& set) const;

    Options options_;
    std::shared_ptr<Construction> construction_;
    std::unique_ptr<CorrelationEngine> engine_;
    FloorSet e_;
    FloorSet re_;
    Rat epsilon_;
    // Lifted copies at a stage deep enough that every examined translate
    // resolves; computed once per run.
    int lifted_stage_ = 0;
    FloorSet e_lifted_;
    FloorSet re_lifted_;
    Int delta_;
};

} // namespace ranklab
