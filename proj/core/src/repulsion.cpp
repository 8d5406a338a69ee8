#include "ranklab/repulsion.hpp"

#include <algorithm>
#include <cmath>

namespace ranklab {

RepulsionScenario::RepulsionScenario(const Options& options) : options_(options) {
    if (options.tensor_exponent % 2 != 0 || options.tensor_exponent < 2)
        fail(ErrorCode::InvalidSpec, "tensor exponent must be even and >= 2");
    if (options.first_r < 2) fail(ErrorCode::InvalidSpec, "first cut count must be >= 2");
    Int first_r = options.first_r;
    SidonClassParams family;
    family.nu = options.nu;
    family.block_r = [first_r](int k) { return first_r * ipow(Int(2), k - 1); };
    family.psi = default_psi();
    family.name = "repulsion-base(nu=" + rat_str(options.nu) + ", r1=" + first_r.str() + ")";
    family.validate();
    construction_ = std::make_shared<Construction>(make_cnu_spec(family));
    engine_ = std::make_unique<CorrelationEngine>(*construction_);
    // E and RE: the first two stage-1 columns of X1, as floors of stage 2.
    construction_->ensure_stage(2);
    const auto& q = construction_->offsets(1);
    require_internal(q.size() >= 2, "base construction needs r_1 >= 2");
    e_ = FloorSet::single(2, q[0]);
    re_ = FloorSet::single(2, q[1]);
    delta_ = q[1] - q[0];
    epsilon_ = construction_->measure(e_);
}

ExactExp RepulsionScenario::d_measure() {
    CylinderConjunction d;
    d.events.push_back(CylinderEvent{e_, Int(0)});
    d.events.push_back(CylinderEvent{re_, Int(1)});
    return cylinder_measure(*construction_, d);
}

void RepulsionScenario::ensure_lifted(const Int& n_max) {
    if (lifted_stage_ > 0 &&
        e_lifted_.max() + delta_ + n_max < construction_->stage(lifted_stage_).h)
        return;
    int level = std::max(lifted_stage_ + 1, 3);
    while (true) {
        const StageState& state = construction_->ensure_stage(level);
        FloorSet e = construction_->lift(e_, level);
        if (e.max() + delta_ + n_max < state.h) {
            e_lifted_ = std::move(e);
            re_lifted_ = construction_->lift(re_, level);
            lifted_stage_ = level;
            return;
        }
        ++level;
        if (level > 64) fail(ErrorCode::Unresolvable, "translates never resolve");
    }
}

FloorSet RepulsionScenario::swap_image(const FloorSet& set) const {
    FloorSet fixed = set.subtract(e_lifted_).subtract(re_lifted_);
    FloorSet from_e = set.intersect(e_lifted_).translated(delta_);
    FloorSet from_re = set.intersect(re_lifted_).translated(-delta_);
    return fixed.unite(from_e).unite(from_re);
}

CylinderConjunction RepulsionScenario::conjunction_at(const Int& n) {
    // mu°(S^n D ∩ T^n D) = mu°(T^n R D ∩ R T^n D) with R applied set-wise.
    ensure_lifted(n);
    FloorSet tn_e = e_lifted_.translated(n);
    FloorSet tn_re = re_lifted_.translated(n);
    CylinderConjunction conj;
    conj.events.push_back(CylinderEvent{tn_re, Int(0)}); // T^n R D: C(T^n RE, 0)
    conj.events.push_back(CylinderEvent{tn_e, Int(1)});  //          C(T^n E, 1)
    conj.events.push_back(CylinderEvent{swap_image(tn_e), Int(0)}); // R T^n D
    conj.events.push_back(CylinderEvent{swap_image(tn_re), Int(1)});
    return conj;
}

ExactExp RepulsionScenario::repulsion_measure(const Int& n) {
    return cylinder_measure(*construction_, conjunction_at(n));
}

std::vector<std::pair<Int, Rat>> RepulsionScenario::overlap_lags(const Int& n_max) {
    return engine_->positive_lags(u_set(), n_max, options_.lag_cap);
}

RepulsionScenario::Report RepulsionScenario::run() {
    Report report;
    const StageState& top = construction_->ensure_stage(options_.windows + 1);
    report.n_max = top.h;
    ensure_lifted(report.n_max);
    auto lags = overlap_lags(report.n_max);

    unsigned exponent = options_.tensor_exponent;
    report.overlap_power_sum = 0;
    report.repulsion_power_sum = 0;
    // Window w holds the lags in (h_w, h_{w+1}]; lags below h_1 join window 1.
    std::vector<Int> window_tops;
    for (int j = 2; j <= options_.windows + 1; ++j)
        window_tops.push_back(construction_->stage(j).h);
    report.window_max.assign(window_tops.size(), 0.0);

    for (const auto& [n, overlap] : lags) {
        LagRow row;
        row.n = n;
        row.overlap = overlap;
        row.repulsion = repulsion_measure(n);
        double value = row.repulsion.approx();
        double ratio = value / rat_double(overlap);
        report.fitted_const = std::max(report.fitted_const, ratio);
        report.overlap_power_sum += rpow(overlap, exponent);
        report.repulsion_power_sum += std::pow(value, static_cast<double>(exponent));
        for (std::size_t w = 0; w < window_tops.size(); ++w) {
            if (n <= window_tops[w]) {
                report.window_max[w] = std::max(report.window_max[w], value);
                break;
            }
        }
        report.last_nonzero_lag = std::max(report.last_nonzero_lag, n);
        report.rows.push_back(std::move(row));
    }

    // Tail bound: mu(T^n U ∩ U) <= c_n since U is contained in X1, and the
    // positive-lag power sum of c is (product side - 1) / 2.
    int m = options_.windows + 2;
    construction_->ensure_stage(m);
    require_internal(construction_->stage(m).h > report.n_max,
                     "tail bound window does not cover the examined lags");
    report.product_tail_bound =
        (product_side(construction_->spec(), m, exponent / 2) - 1) / 2;
    report.sum_within_bound = report.overlap_power_sum <= report.product_tail_bound;

    double fitted4 = std::pow(report.fitted_const, static_cast<double>(exponent));
    report.tensor_sum_within_fitted =
        report.repulsion_power_sum <= fitted4 * rat_double(report.overlap_power_sum) + 1e-12;
    return report;
}

} // namespace ranklab
