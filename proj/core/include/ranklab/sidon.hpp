#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ranklab/tower.hpp"

namespace ranklab {

/// Per-stage structural Sidon verdict. The test is the offset-difference
/// separation extracted from the disjointness lemma: every two distinct
/// ordered column pairs must have offset differences at least 2*h_j apart,
/// so translate windows of width h_j around distinct differences can never
/// meet the same tower floor.
struct SidonVerdict {
    int stage = 0;
    bool sidon = false;
    std::string detail;
};

std::vector<SidonVerdict> check_sidon(Construction& construction, int upto_stage);

struct GrowthCheck {
    bool ok = true;
    int first_failing_stage = 0; // 0 when ok
};

/// Verifies the spacer growth chain h_j << s_j(1) << ... << s_j(r_j) at each
/// built stage, where a << b means b > psi(j) * a.
GrowthCheck check_growth(Construction& construction, const std::function<Int(int)>& psi,
                         int upto_stage);

inline std::function<Int(int)> default_psi() {
    return [](int j) { return Int(j) + 1; };
}

/// Descriptor of a generated Sidon family: cut counts are constant on blocks
/// of length floor(r^nu), with the block cut counts strictly increasing.
struct SidonClassParams {
    Rat nu;
    /// Cut count of block k (1-based). Default rule: base^(k^2), which grows
    /// fast enough that sum_k r_k^(-delta) converges for every delta > 0.
    std::function<Int(int)> block_r;
    /// Growth witness psi(j) -> infinity for the spacer chain.
    std::function<Int(int)> psi;
    std::string name;

    static SidonClassParams power_rule(Rat nu, Int base);
    static SidonClassParams explicit_blocks(Rat nu, std::vector<Int> rs, std::string name);

    void validate() const;

    Int block_length(int k) const;      // floor(r_k^nu), at least 1
    int block_first_stage(int k) const; // j(k); j(1) = 1
    int block_of_stage(int j) const;    // k with j(k) <= j < j(k+1)
};

/// Schedule generator for the descriptor: spacers s_j(i) = h_j * (psi(j)+1)^i,
/// which strictly satisfies s_j(1) > psi(j) h_j and s_j(i+1) > psi(j) s_j(i).
/// The result passes check_sidon and check_growth at every built stage.
ConstructionSpec make_cnu_spec(const SidonClassParams& params);

/// Convenience: expand the schedule-file rule form.
ConstructionSpec make_cnu_spec(const CnuRuleParams& rule);

enum class Recurrence { Conservative, Dissipative };
enum class SpectrumKind { Singular, AbsolutelyContinuous, NotClassified };

struct PowerPhase {
    unsigned d = 1;
    Recurrence recurrence = Recurrence::Conservative;
    SpectrumKind spectrum = SpectrumKind::NotClassified;
};

struct PhaseReport {
    Rat nu;
    std::vector<PowerPhase> powers;
    std::vector<std::string> notes;
};

/// Tensor-power phase classification for the class of exponent nu:
/// the d-th power is conservative iff nu >= d-1 (block divergence of
/// sum (1/r_j)^(d-1) under super-polynomially growing cut counts) and its
/// spectrum is singular iff nu >= 2d-2, absolutely continuous otherwise.
PhaseReport classify_tensor_powers(const Rat& nu, unsigned d_max);

const char* recurrence_name(Recurrence r);
const char* spectrum_name(SpectrumKind s);

} // namespace ranklab
