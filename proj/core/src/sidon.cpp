#include "ranklab/sidon.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <sstream>

namespace ranklab {

std::vector<SidonVerdict> check_sidon(Construction& construction, int upto_stage) {
    std::vector<SidonVerdict> verdicts;
    for (int j = 1; j <= upto_stage; ++j) {
        construction.ensure_stage(j + 1);
        const StageState& state = construction.stage(j);
        const auto& q = construction.offsets(j);
        if (q.size() > 4096)
            fail(ErrorCode::BudgetExceeded, "sidon check with r = " + std::to_string(q.size()));
        std::vector<Int> diffs;
        diffs.reserve(q.size() * (q.size() - 1));
        for (std::size_t i = 0; i < q.size(); ++i)
            for (std::size_t m = 0; m < q.size(); ++m)
                if (i != m) diffs.push_back(q[i] - q[m]);
        std::sort(diffs.begin(), diffs.end());
        SidonVerdict verdict;
        verdict.stage = j;
        verdict.sidon = true;
        Int gap_needed = 2 * state.h;
        for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
            if (diffs[i + 1] - diffs[i] < gap_needed) {
                verdict.sidon = false;
                std::ostringstream msg;
                msg << "offset differences " << diffs[i] << " and " << diffs[i + 1]
                    << " are closer than 2*h_j = " << gap_needed;
                verdict.detail = msg.str();
                break;
            }
        }
        if (verdict.sidon) verdict.detail = "all offset differences separated by >= 2*h_j";
        verdicts.push_back(std::move(verdict));
    }
    return verdicts;
}

GrowthCheck check_growth(Construction& construction, const std::function<Int(int)>& psi,
                         int upto_stage) {
    for (int j = 1; j <= upto_stage; ++j) {
        if (!construction.spec().has_stage(j)) break;
        const StageState& state = construction.ensure_stage(j);
        const StageParams& params = construction.spec().stage(j);
        Int factor = psi(j);
        Int prev = state.h;
        for (const auto& s : params.spacers) {
            if (s <= factor * prev) return GrowthCheck{false, j};
            prev = s;
        }
    }
    return GrowthCheck{true, 0};
}

SidonClassParams SidonClassParams::power_rule(Rat nu, Int base) {
    if (base < 2) fail(ErrorCode::InvalidDescriptor, "block rule base must be >= 2");
    SidonClassParams params;
    params.nu = std::move(nu);
    params.block_r = [base](int k) { return ipow(base, static_cast<unsigned long>(k) * k); };
    params.psi = default_psi();
    params.name = "cnu(nu=" + rat_str(params.nu) + ", base=" + base.str() + ")";
    params.validate();
    return params;
}

SidonClassParams SidonClassParams::explicit_blocks(Rat nu, std::vector<Int> rs, std::string name) {
    if (rs.empty()) fail(ErrorCode::InvalidDescriptor, "empty block sequence");
    SidonClassParams params;
    params.nu = std::move(nu);
    params.block_r = [rs = std::move(rs)](int k) {
        if (k < 1 || k > static_cast<int>(rs.size()))
            fail(ErrorCode::StageUnavailable, "block " + std::to_string(k) + " not declared");
        return rs[k - 1];
    };
    params.psi = default_psi();
    params.name = std::move(name);
    params.validate();
    return params;
}

void SidonClassParams::validate() const {
    if (nu < 0) fail(ErrorCode::InvalidDescriptor, "nu must be >= 0");
    if (!block_r) fail(ErrorCode::InvalidDescriptor, "missing block rule");
    if (!psi) fail(ErrorCode::InvalidDescriptor, "missing growth witness psi");
    Int r1 = block_r(1);
    if (r1 < 2) fail(ErrorCode::InvalidDescriptor, "block cut count r = " + r1.str() + " < 2");
}

Int SidonClassParams::block_length(int k) const {
    Int len = ipow_rational_floor(block_r(k), nu);
    return std::max(len, Int(1)); // nu = 0 gives length 1
}

int SidonClassParams::block_first_stage(int k) const {
    if (k < 1) fail(ErrorCode::InvalidDescriptor, "block index " + std::to_string(k));
    Int first = 1;
    for (int b = 1; b < k; ++b) first += block_length(b);
    if (first > Int(1 << 30)) fail(ErrorCode::CombinatorialBudget, "block start overflows budget");
    return first.convert_to<int>();
}

int SidonClassParams::block_of_stage(int j) const {
    if (j < 1) fail(ErrorCode::StageUnavailable, "stage " + std::to_string(j));
    int k = 1;
    Int first = 1;
    while (true) {
        Int next = first + block_length(k);
        if (Int(j) < next) return k;
        first = next;
        ++k;
        if (k > 1 << 20) fail(ErrorCode::CombinatorialBudget, "block search diverged");
    }
}

namespace {

/// Stage parameters of the generated family are produced iteratively since
/// spacers at stage j scale with the height h_j; heights are memoized so the
/// rule is deterministic and cheap to re-evaluate.
struct CnuRuleState {
    SidonClassParams params;
    std::mutex mutex;
    std::vector<Int> heights{Int(1)}; // heights[j-1] = h_j; h_1 = 1
    std::vector<StageParams> stages;

    StageParams stage(int j) {
        std::lock_guard<std::mutex> lock(mutex);
        while (static_cast<int>(stages.size()) < j) {
            int at = static_cast<int>(stages.size()) + 1;
            const Int& h = heights[at - 1];
            Int r = params.block_r(params.block_of_stage(at));
            if (r > 4096)
                fail(ErrorCode::CombinatorialBudget,
                     "generated stage " + std::to_string(at) + " has r = " + r.str());
            StageParams sp;
            sp.r = r;
            Int mult = params.psi(at) + 1;
            Int s = h;
            unsigned long count = r.convert_to<unsigned long>();
            sp.spacers.reserve(count);
            for (unsigned long i = 0; i < count; ++i) {
                s *= mult;
                sp.spacers.push_back(s);
            }
            Int next_h = h * sp.r + sp.spacer_total();
            heights.push_back(next_h);
            stages.push_back(std::move(sp));
        }
        return stages[j - 1];
    }
};

} // namespace

ConstructionSpec make_cnu_spec(const SidonClassParams& params) {
    params.validate();
    auto state = std::make_shared<CnuRuleState>();
    state->params = params;
    return ConstructionSpec::from_rule(
        Int(1), [state](int j) { return state->stage(j); }, params.name);
}

ConstructionSpec make_cnu_spec(const CnuRuleParams& rule) {
    return make_cnu_spec(SidonClassParams::power_rule(rule.nu, rule.base));
}

PhaseReport classify_tensor_powers(const Rat& nu, unsigned d_max) {
    if (nu < 0) fail(ErrorCode::InvalidDescriptor, "nu must be >= 0");
    PhaseReport report;
    report.nu = nu;
    for (unsigned d = 1; d <= d_max; ++d) {
        PowerPhase phase;
        phase.d = d;
        Rat d_minus_1 = Rat(d) - 1;
        phase.recurrence = (nu >= d_minus_1) ? Recurrence::Conservative : Recurrence::Dissipative;
        Rat singular_threshold = Rat(2) * Rat(d) - 2;
        phase.spectrum = (nu >= singular_threshold) ? SpectrumKind::Singular
                                                    : SpectrumKind::AbsolutelyContinuous;
        if (nu == d_minus_1 && d > 1)
            report.notes.push_back(
                "power " + std::to_string(d) +
                " sits on the conservativity boundary; the verdict relies on the block "
                "divergence of sum (1/r_j)^(d-1), which holds for the default block rule");
        report.powers.push_back(phase);
    }
    return report;
}

const char* recurrence_name(Recurrence r) {
    return r == Recurrence::Conservative ? "conservative" : "dissipative";
}

const char* spectrum_name(SpectrumKind s) {
    switch (s) {
        case SpectrumKind::Singular: return "singular";
        case SpectrumKind::AbsolutelyContinuous: return "absolutely-continuous";
        case SpectrumKind::NotClassified: return "not-classified";
    }
    return "not-classified";
}

} // namespace ranklab
