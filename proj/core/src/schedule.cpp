#include "ranklab/schedule.hpp"

#include <fstream>
#include <sstream>

namespace ranklab {

Int StageParams::spacer_total() const {
    Int total = 0;
    for (const auto& s : spacers) total += s;
    return total;
}

Int StageParams::min_spacer() const {
    require_internal(!spacers.empty(), "stage with no spacer vector");
    Int best = spacers.front();
    for (const auto& s : spacers) best = std::min(best, s);
    return best;
}

void StageParams::validate(int stage_index) const {
    if (r < 2)
        fail(ErrorCode::InvalidSpec,
             "stage " + std::to_string(stage_index) + " has r = " + r.str() + " < 2");
    if (Int(spacers.size()) != r)
        fail(ErrorCode::InvalidSpec, "stage " + std::to_string(stage_index) + " has " +
                                         std::to_string(spacers.size()) + " spacers for r = " +
                                         r.str());
    for (const auto& s : spacers)
        if (s < 0)
            fail(ErrorCode::InvalidSpec,
                 "stage " + std::to_string(stage_index) + " has negative spacer");
}

ConstructionSpec ConstructionSpec::from_stages(Int h1, std::vector<StageParams> stages,
                                               std::string name) {
    if (h1 < 1) fail(ErrorCode::InvalidSpec, "h1 = " + h1.str() + " < 1");
    ConstructionSpec spec;
    spec.h1_ = std::move(h1);
    spec.name_ = std::move(name);
    spec.explicit_stages_ = std::move(stages);
    for (std::size_t i = 0; i < spec.explicit_stages_.size(); ++i)
        spec.explicit_stages_[i].validate(static_cast<int>(i) + 1);
    return spec;
}

ConstructionSpec ConstructionSpec::from_rule(Int h1, Rule rule, std::string name) {
    if (h1 < 1) fail(ErrorCode::InvalidSpec, "h1 = " + h1.str() + " < 1");
    ConstructionSpec spec;
    spec.h1_ = std::move(h1);
    spec.name_ = std::move(name);
    spec.rule_ = std::move(rule);
    spec.is_rule_ = true;
    return spec;
}

bool ConstructionSpec::has_stage(int j) const {
    if (j < 1) return false;
    return is_rule_ || j <= static_cast<int>(explicit_stages_.size());
}

const StageParams& ConstructionSpec::stage(int j) const {
    if (j < 1) fail(ErrorCode::StageUnavailable, "stage index " + std::to_string(j));
    if (!is_rule_) {
        if (j > static_cast<int>(explicit_stages_.size()))
            fail(ErrorCode::StageUnavailable,
                 "schedule '" + name_ + "' ends at stage " +
                     std::to_string(explicit_stages_.size()) + ", requested " + std::to_string(j));
        return explicit_stages_[j - 1];
    }
    std::lock_guard<std::mutex> lock(memo_->mutex);
    auto& cache = memo_->cache;
    if (cache.size() < static_cast<std::size_t>(j)) cache.resize(j);
    if (!cache[j - 1]) {
        StageParams params = rule_(j);
        params.validate(j);
        cache[j - 1] = std::make_unique<StageParams>(std::move(params));
    }
    return *cache[j - 1];
}

std::optional<int> ConstructionSpec::finite_stage_count() const {
    if (is_rule_) return std::nullopt;
    return static_cast<int>(explicit_stages_.size());
}

namespace {

std::string strip(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// "key=value" from text like "nu=2" inside rule arguments
std::pair<std::string, std::string> split_kv(const std::string& item, const std::string& context) {
    auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, "expected key=value in " + context);
    return {strip(item.substr(0, eq)), strip(item.substr(eq + 1))};
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

ScheduleFile parse_schedule(std::istream& in) {
    ScheduleFile file;
    std::vector<StageParams> stages;
    bool saw_h1 = false;
    bool saw_rule = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        std::string where = "line " + std::to_string(line_no);

        if (line.rfind("h1", 0) == 0) {
            auto [key, value] = split_kv(line, where);
            if (key != "h1") fail(ErrorCode::ParseError, where + ": expected 'h1 = <int>'");
            file.h1 = int_parse(value);
            saw_h1 = true;
            continue;
        }
        if (line.rfind("rule", 0) == 0) {
            auto [key, value] = split_kv(line, where);
            if (key != "rule") fail(ErrorCode::ParseError, where + ": expected 'rule = ...'");
            auto open = value.find('(');
            auto close = value.rfind(')');
            if (open == std::string::npos || close == std::string::npos || close < open)
                fail(ErrorCode::ParseError, where + ": malformed rule call");
            std::string fn = strip(value.substr(0, open));
            if (fn != "cnu")
                fail(ErrorCode::ParseError, where + ": unknown rule '" + fn + "'");
            CnuRuleParams rule{Rat(0), Int(0)};
            bool saw_nu = false, saw_base = false;
            for (const auto& item : split_on(value.substr(open + 1, close - open - 1), ',')) {
                auto [k, v] = split_kv(strip(item), where);
                if (k == "nu") {
                    rule.nu = rat_parse(v);
                    saw_nu = true;
                } else if (k == "base") {
                    rule.base = int_parse(v);
                    saw_base = true;
                } else {
                    fail(ErrorCode::ParseError, where + ": unknown cnu argument '" + k + "'");
                }
            }
            if (!saw_nu || !saw_base)
                fail(ErrorCode::ParseError, where + ": cnu rule needs nu and base");
            file.body = rule;
            saw_rule = true;
            continue;
        }
        if (line.rfind("stage", 0) == 0) {
            auto colon = line.find(':');
            if (colon == std::string::npos) fail(ErrorCode::ParseError, where + ": missing ':'");
            Int index = int_parse(line.substr(5, colon - 5));
            if (index != Int(static_cast<int>(stages.size()) + 1))
                fail(ErrorCode::ParseError, where + ": stage lines must be numbered 1,2,...");
            StageParams params;
            bool saw_r = false, saw_s = false;
            std::istringstream rest(line.substr(colon + 1));
            std::string token;
            while (rest >> token) {
                auto [k, v] = split_kv(token, where);
                if (k == "r") {
                    params.r = int_parse(v);
                    saw_r = true;
                } else if (k == "s") {
                    for (const auto& piece : split_on(v, ',')) params.spacers.push_back(int_parse(piece));
                    saw_s = true;
                } else {
                    fail(ErrorCode::ParseError, where + ": unknown stage field '" + k + "'");
                }
            }
            if (!saw_r || !saw_s) fail(ErrorCode::ParseError, where + ": stage needs r= and s=");
            stages.push_back(std::move(params));
            continue;
        }
        fail(ErrorCode::ParseError, where + ": unrecognized line '" + line + "'");
    }
    if (!saw_h1) fail(ErrorCode::ParseError, "schedule missing 'h1 = <int>' line");
    if (saw_rule && !stages.empty())
        fail(ErrorCode::ParseError, "schedule mixes explicit stages with a rule");
    if (!saw_rule) {
        if (stages.empty()) fail(ErrorCode::ParseError, "schedule has no stages and no rule");
        file.body = std::move(stages);
    }
    return file;
}

ScheduleFile parse_schedule_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, "cannot open schedule file '" + path + "'");
    return parse_schedule(in);
}

std::string schedule_to_string(const ScheduleFile& file) {
    std::ostringstream out;
    out << "h1 = " << file.h1 << "\n";
    if (const auto* stages = std::get_if<std::vector<StageParams>>(&file.body)) {
        for (std::size_t i = 0; i < stages->size(); ++i) {
            out << "stage " << (i + 1) << ": r=" << (*stages)[i].r << " s=";
            for (std::size_t k = 0; k < (*stages)[i].spacers.size(); ++k) {
                if (k) out << ",";
                out << (*stages)[i].spacers[k];
            }
            out << "\n";
        }
    } else {
        const auto& rule = std::get<CnuRuleParams>(file.body);
        out << "rule = cnu(nu=" << rat_str(rule.nu) << ", base=" << rule.base << ")\n";
    }
    return out.str();
}

} // namespace ranklab
