#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ranklab/numeric.hpp"

namespace ranklab {

/// Cut-and-spacer parameters of one stage: the tower is cut into r columns
/// and spacers[i-1] floors are stacked above column i before restacking.
struct StageParams {
    Int r;
    std::vector<Int> spacers;

    Int spacer_total() const;
    Int min_spacer() const;
    void validate(int stage_index) const;

    bool operator==(const StageParams&) const = default;
};

/// Parameter schedule of a rank-one construction: initial height h1 plus
/// per-stage StageParams, either an explicit finite list or a deterministic
/// generator rule evaluable at any stage index (memoized).
class ConstructionSpec {
public:
    using Rule = std::function<StageParams(int j)>; // 1-based stage index

    static ConstructionSpec from_stages(Int h1, std::vector<StageParams> stages,
                                        std::string name = "explicit");
    static ConstructionSpec from_rule(Int h1, Rule rule, std::string name);

    const Int& h1() const { return h1_; }
    const std::string& name() const { return name_; }

    /// True if stage j's parameters exist (always true for rule specs).
    bool has_stage(int j) const;
    /// Stage parameters for 1-based index j; validates invariants on first
    /// evaluation. Throws StageUnavailable past the end of a finite list.
    const StageParams& stage(int j) const;
    /// Number of explicit stages, or nullopt for an unbounded rule.
    std::optional<int> finite_stage_count() const;

private:
    ConstructionSpec() = default;

    Int h1_;
    std::string name_;
    std::vector<StageParams> explicit_stages_;
    Rule rule_;
    bool is_rule_ = false;

    struct Memo {
        std::mutex mutex;
        std::vector<std::unique_ptr<StageParams>> cache;
    };
    std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

/// Parsed form of a schedule file before rule expansion.
struct CnuRuleParams {
    Rat nu;
    Int base;
};

struct ScheduleFile {
    Int h1 = 1;
    std::variant<std::vector<StageParams>, CnuRuleParams> body;
};

/// Line-based schedule grammar:
///   h1 = <int>
///   stage <j>: r=<int> s=<int,int,...>
/// or, for generated families:
///   rule = cnu(nu=<rational>, base=<int>)
/// '#' starts a comment; blank lines are ignored. Stage lines must be
/// numbered consecutively from 1.
ScheduleFile parse_schedule(std::istream& in);
ScheduleFile parse_schedule_file(const std::string& path);
std::string schedule_to_string(const ScheduleFile& file);

} // namespace ranklab
