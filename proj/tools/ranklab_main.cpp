// ranklab: command-line laboratory for rank-one cutting-and-stacking
// constructions. Subcommands cover construction building, exact correlation
// series, Sidon verification and tensor-power classification, the power-sum
// product identity, block norm diagnostics, the Poisson cylinder calculus,
// and the joint-dynamics experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ranklab/correlation.hpp"
#include "ranklab/divergence.hpp"
#include "ranklab/oracle.hpp"
#include "ranklab/poisson.hpp"
#include "ranklab/repulsion.hpp"
#include "ranklab/spectral.hpp"

using namespace ranklab;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigFile {
    std::string schedule_text;
    std::map<std::string, std::map<std::string, std::string>> sections;
};

// Config grammar: an optional schedule head (same grammar as --schedule
// files), then [subcommand] sections of key = value lines that act as
// defaults for that subcommand's options.
ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, "cannot open config file '" + path + "'");
    ConfigFile cfg;
    std::string line;
    std::string section;
    std::ostringstream head;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        std::string stripped = line.substr(0, hash == std::string::npos ? line.size() : hash);
        auto begin = stripped.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        auto end = stripped.find_last_not_of(" \t\r");
        stripped = stripped.substr(begin, end - begin + 1);
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                fail(ErrorCode::ParseError, "malformed section header: " + stripped);
            section = stripped.substr(1, stripped.size() - 2);
            continue;
        }
        if (section.empty()) {
            head << stripped << "\n";
        } else {
            auto eq = stripped.find('=');
            if (eq == std::string::npos)
                fail(ErrorCode::ParseError, "expected key = value in section [" + section + "]");
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t");
                auto e = s.find_last_not_of(" \t");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            cfg.sections[section][trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
        }
    }
    cfg.schedule_text = head.str();
    return cfg;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Tool {
    // global options
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    unsigned jobs = 1;
    int max_stage = 24;
    std::uint64_t samples = 100000;
    std::string config_path;
    std::string schedule_path;
    std::string cnu_nu;
    std::string cnu_base;

    ConfigFile config;
    json manifest_options = json::object();

    void note(const std::string& key, const std::string& value) {
        manifest_options[key] = value;
    }

    std::string section_value(const std::string& section, const std::string& key) const {
        auto sit = config.sections.find(section);
        if (sit == config.sections.end()) return {};
        auto kit = sit->second.find(key);
        return kit == sit->second.end() ? std::string() : kit->second;
    }

    // Effective option value: command line wins, then config section, then
    // the built-in default already stored in `value`.
    template <typename T, typename Parse>
    void resolve(const CLI::Option* opt, const std::string& section, const std::string& key,
                 T& value, Parse parse) {
        if (opt && opt->count() > 0) return;
        std::string raw = section_value(section, key);
        if (!raw.empty()) value = parse(raw);
    }

    ScheduleFile schedule_source() {
        if (!schedule_path.empty()) return parse_schedule_file(schedule_path);
        if (!config.schedule_text.empty()) {
            std::istringstream in(config.schedule_text);
            return parse_schedule(in);
        }
        ScheduleFile file;
        file.h1 = 1;
        Rat nu = cnu_nu.empty() ? Rat(2) : rat_parse(cnu_nu);
        Int base = cnu_base.empty() ? Int(2) : int_parse(cnu_base);
        file.body = CnuRuleParams{nu, base};
        return file;
    }

    ConstructionSpec make_spec(const ScheduleFile& file) {
        if (const auto* stages = std::get_if<std::vector<StageParams>>(&file.body))
            return ConstructionSpec::from_stages(file.h1, *stages, "schedule");
        return make_cnu_spec(std::get<CnuRuleParams>(file.body));
    }

    SidonClassParams family_source() {
        Rat nu = cnu_nu.empty() ? Rat(2) : rat_parse(cnu_nu);
        Int base = cnu_base.empty() ? Int(2) : int_parse(cnu_base);
        std::optional<ScheduleFile> file;
        if (!schedule_path.empty()) {
            file = parse_schedule_file(schedule_path);
        } else if (!config.schedule_text.empty()) {
            std::istringstream in(config.schedule_text);
            file = parse_schedule(in);
        }
        if (file) {
            const auto* rule = std::get_if<CnuRuleParams>(&file->body);
            if (!rule)
                fail(ErrorCode::InvalidDescriptor,
                     "block diagnostics need a generated family, not an explicit schedule");
            nu = rule->nu;
            base = rule->base;
        }
        return SidonClassParams::power_rule(nu, base);
    }

    std::filesystem::path out_path(const std::string& name) const {
        return std::filesystem::path(out_dir) / name;
    }

    std::ofstream open_out(const std::string& name) const {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_path(name), std::ios::binary);
        if (!out) fail(ErrorCode::ParseError, "cannot write " + out_path(name).string());
        return out;
    }

    void write_json(const std::string& name, const json& value) const {
        auto out = open_out(name);
        out << value.dump(2) << "\n";
    }

    void write_manifest(const std::string& subcommand, const ScheduleFile* schedule,
                        const std::vector<std::string>& artifacts) {
        json manifest;
        manifest["tool"] = "ranklab";
        manifest["version"] = kVersion;
        manifest["subcommand"] = subcommand;
        manifest["seed"] = seed;
        manifest["jobs"] = jobs;
        manifest["max_stage"] = max_stage;
        manifest["options"] = manifest_options;
        if (schedule) manifest["construction"] = schedule_to_string(*schedule);
        manifest["artifacts"] = artifacts;
        manifest["rng"] = CounterRng::kName;
        write_json("manifest.json", manifest);
    }
};

FloorSet parse_floor_list(int stage, const std::string& text) {
    std::vector<Interval> intervals;
    std::istringstream in(text);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        auto dash = piece.find('-');
        if (dash == std::string::npos) {
            Int v = int_parse(piece);
            intervals.push_back(Interval{v, v + 1});
        } else {
            Int lo = int_parse(piece.substr(0, dash));
            Int hi = int_parse(piece.substr(dash + 1));
            intervals.push_back(Interval{lo, hi + 1}); // inclusive range a-b
        }
    }
    return FloorSet(stage, std::move(intervals));
}

// --event "stage=2;floors=0,4-7;k=1"
CylinderEvent parse_event(const std::string& text) {
    int stage = 0;
    std::string floors;
    Int count{-1};
    std::istringstream in(text);
    std::string field;
    while (std::getline(in, field, ';')) {
        auto eq = field.find('=');
        if (eq == std::string::npos) fail(ErrorCode::ParseError, "bad event field: " + field);
        std::string key = field.substr(0, eq);
        std::string value = field.substr(eq + 1);
        if (key == "stage")
            stage = static_cast<int>(int_parse(value).convert_to<int>());
        else if (key == "floors")
            floors = value;
        else if (key == "k")
            count = int_parse(value);
        else
            fail(ErrorCode::ParseError, "unknown event field: " + key);
    }
    if (stage < 1 || floors.empty() || count < 0)
        fail(ErrorCode::ParseError, "event needs stage=, floors=, k=: " + text);
    return CylinderEvent{parse_floor_list(stage, floors), count};
}

json exact_exp_json(const ExactExp& value) {
    json out;
    out["coeff"] = rat_str(value.coeff);
    out["exponent"] = rat_str(value.exponent);
    out["approx"] = value.approx();
    return out;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::BudgetExceeded:
        case ErrorCode::CombinatorialBudget:
        case ErrorCode::TooLarge:
        case ErrorCode::NotExact:
        case ErrorCode::Unresolvable:
        case ErrorCode::NonmonotoneSpacers: return 2;
        case ErrorCode::InternalInvariant: return 3;
        default: return 1;
    }
}

void run_build(Tool& tool, int stages) {
    ScheduleFile schedule = tool.schedule_source();
    Construction c(tool.make_spec(schedule));
    c.ensure_stage(stages);
    json report;
    report["name"] = c.spec().name();
    report["h1"] = c.spec().h1().str();
    json stage_list = json::array();
    for (int j = 1; j <= stages; ++j) {
        const StageState& state = c.stage(j);
        json entry;
        entry["j"] = j;
        entry["h"] = state.h.str();
        entry["floor_measure"] = rat_str(state.floor_measure);
        entry["x1_interval_count"] = state.x1_floors.interval_count();
        entry["x1_floor_count"] = state.x1_floors.cardinality().str();
        if (j < stages && c.spec().has_stage(j)) {
            json offsets = json::array();
            for (const auto& q : c.offsets(j)) offsets.push_back(q.str());
            entry["offsets"] = offsets;
        }
        stage_list.push_back(entry);
    }
    report["stages"] = stage_list;
    tool.write_json("build.json", report);
    tool.write_manifest("build", &schedule, {"build.json"});
    std::cout << "built " << stages << " stages of '" << c.spec().name() << "'\n";
}

void run_correlate(Tool& tool, const Int& n_from, const Int& n_to, const Rat& eps) {
    ScheduleFile schedule = tool.schedule_source();
    Construction c(tool.make_spec(schedule));
    EngineLimits limits;
    limits.max_stage = tool.max_stage;
    CorrelationEngine engine(c, limits);
    FloorSet x1 = c.x1(1);
    auto out = tool.open_out("correlate.csv");
    out << "n,lo,hi,exact\n";
    for (Int n = n_from; n <= n_to; ++n) {
        CorrelationValue v = engine.correlation(n, x1, x1, eps);
        out << n << "," << rat_str(v.lo) << "," << rat_str(v.hi) << "," << (v.exact ? 1 : 0)
            << "\n";
    }
    tool.write_manifest("correlate", &schedule, {"correlate.csv"});
    std::cout << "correlations for n in [" << n_from << ", " << n_to << "] written\n";
}

void run_sidon_check(Tool& tool, int upto) {
    ScheduleFile schedule = tool.schedule_source();
    Construction c(tool.make_spec(schedule));
    auto verdicts = check_sidon(c, upto);
    GrowthCheck growth = check_growth(c, default_psi(), upto);
    json report;
    json list = json::array();
    for (const auto& v : verdicts) {
        json entry;
        entry["stage"] = v.stage;
        entry["sidon"] = v.sidon;
        entry["detail"] = v.detail;
        list.push_back(entry);
    }
    report["stages"] = list;
    report["growth_ok"] = growth.ok;
    if (!growth.ok) report["growth_first_failing_stage"] = growth.first_failing_stage;
    tool.write_json("sidon.json", report);
    tool.write_manifest("sidon-check", &schedule, {"sidon.json"});
    int sidon_count = 0;
    for (const auto& v : verdicts) sidon_count += v.sidon ? 1 : 0;
    std::cout << "sidon verdicts: " << sidon_count << "/" << verdicts.size()
              << " stages pass, growth " << (growth.ok ? "ok" : "fails") << "\n";
}

void run_classify(Tool& tool, const std::string& nu_text, unsigned dmax) {
    Rat nu = rat_parse(nu_text);
    PhaseReport report = classify_tensor_powers(nu, dmax);
    json out;
    out["nu"] = rat_str(report.nu);
    json powers = json::array();
    for (const auto& phase : report.powers) {
        json entry;
        entry["d"] = phase.d;
        entry["recurrence"] = recurrence_name(phase.recurrence);
        entry["spectrum"] = spectrum_name(phase.spectrum);
        powers.push_back(entry);
    }
    out["powers"] = powers;
    if (!report.notes.empty()) out["notes"] = report.notes;
    tool.write_json("classify.json", out);
    tool.write_manifest("classify", nullptr, {"classify.json"});
    std::cout << "classified tensor powers d <= " << dmax << " for nu = " << rat_str(nu) << "\n";
}

void run_verify41(Tool& tool, int m, unsigned d) {
    ScheduleFile schedule = tool.schedule_source();
    Construction c(tool.make_spec(schedule));
    EngineLimits limits;
    limits.max_stage = tool.max_stage;
    CorrelationEngine engine(c, limits);
    IdentityReport report = verify_power_product_identity(engine, m, d);
    json out;
    out["m"] = report.m;
    out["d"] = report.d;
    out["lhs"] = rat_str(report.lhs);
    out["rhs"] = rat_str(report.rhs);
    out["equal"] = report.equal;
    tool.write_json("verify41.json", out);
    tool.write_manifest("verify-41", &schedule, {"verify41.json"});
    std::cout << "power sum " << (report.equal ? "equals" : "differs from")
              << " the product side at m = " << m << ", d = " << d << "\n";
}

void run_pk(Tool& tool, int k, unsigned d, unsigned p, int truncate, bool decompose) {
    SidonClassParams family = tool.family_source();
    Construction c(make_cnu_spec(family));
    EngineLimits limits;
    limits.max_stage = tool.max_stage;
    CorrelationEngine engine(c, limits);
    PkNormOptions options;
    options.n_effective = truncate;
    options.decomposition = decompose;
    BlockNormReport report = pk_norm(engine, family, k, d, p, options);

    auto csv = tool.open_out("pk.csv");
    csv << "k,d,p,a_k,N_k_effective,dist_lo,dist_hi\n";
    csv << report.k << "," << report.d << "," << report.p << "," << rat_str(report.a_k) << ","
        << report.n_effective << "," << rat_str(report.dist.lo) << "," << rat_str(report.dist.hi)
        << "\n";

    json out;
    out["k"] = report.k;
    out["d"] = report.d;
    out["p"] = report.p;
    out["a_k"] = rat_str(report.a_k);
    out["N_k"] = report.n_k.str();
    out["N_k_effective"] = report.n_effective;
    out["dist_lo"] = rat_str(report.dist.lo);
    out["dist_hi"] = rat_str(report.dist.hi);
    out["exact"] = report.dist.exact;
    out["query_count"] = report.query_count;
    if (report.has_decomposition) {
        out["variance_term"] = rat_str(report.variance_term);
        out["outside_term"] = rat_str(report.outside_term);
    }
    tool.write_json("pk.json", out);
    tool.write_manifest("pk-diagnose", nullptr, {"pk.csv", "pk.json"});
    std::cout << "block " << k << " norm diagnostic written (" << report.query_count
              << " correlation queries)\n";
}

void run_poisson(Tool& tool, const std::vector<std::string>& event_texts, int region_stage,
                 bool with_mc) {
    ScheduleFile schedule = tool.schedule_source();
    Construction c(tool.make_spec(schedule));
    CylinderConjunction conj;
    for (const auto& text : event_texts) conj.events.push_back(parse_event(text));
    if (conj.events.empty()) fail(ErrorCode::InvalidSpec, "poisson needs at least one --event");
    int region = region_stage;
    if (region == 0)
        for (const auto& event : conj.events) region = std::max(region, event.set.stage());
    ExactExp value = cylinder_measure(c, conj);
    json out = exact_exp_json(value);
    if (with_mc) {
        McEstimate mc =
            mc_estimate(c, conj, region, tool.samples, CounterRng(tool.seed), tool.jobs);
        json mc_json;
        mc_json["estimate"] = mc.estimate;
        mc_json["stderr"] = mc.stderr_est;
        mc_json["samples"] = mc.samples;
        mc_json["seed"] = mc.seed;
        out["mc"] = mc_json;
    }
    out["rng"] = CounterRng::kName;
    out["region_stage"] = region;
    tool.write_json("poisson.json", out);
    tool.write_manifest("poisson", &schedule, {"poisson.json"});
    std::cout << "cylinder measure " << rat_str(value.coeff) << " * e^(-"
              << rat_str(value.exponent) << ") ~= " << fmt_double(value.approx()) << "\n";
}

DivergenceScenario make_scenario(const std::string& pair_name, int stages, const Int& h1,
                                 const std::set<int>& katok) {
    DivergenceOptions options;
    options.h1 = h1;
    options.active_stages = stages;
    options.katok_stages = katok;
    if (pair_name == "staircase") return DivergenceScenario::staircase(options);
    if (pair_name == "linear")
        return DivergenceScenario::from_pair(
            SequencePair{SequenceRule::affine(Int(2)), SequenceRule::affine(Int(3))}, options);
    if (pair_name == "poly")
        return DivergenceScenario::from_pair(
            SequencePair{SequenceRule::monomial(2), SequenceRule::monomial(3)}, options);
    fail(ErrorCode::InvalidSpec, "unknown sequence pair '" + pair_name + "'");
}

void run_diverge(Tool& tool, const std::string& pair_name, int stages, const std::string& h1_text,
                 const std::string& count_text, const std::string& katok_text) {
    std::set<int> katok;
    if (!katok_text.empty()) {
        std::istringstream in(katok_text);
        std::string piece;
        while (std::getline(in, piece, ','))
            katok.insert(static_cast<int>(int_parse(piece).convert_to<int>()));
    }
    Int h1 = int_parse(h1_text);
    DivergenceScenario scenario = make_scenario(pair_name, stages, h1, katok);

    // Sigma schedule echo for the manifest.
    ScheduleFile schedule;
    schedule.h1 = h1;
    std::vector<StageParams> stage_params;
    for (int j = 1; j <= stages; ++j) stage_params.push_back(scenario.sigma().spec().stage(j));
    schedule.body = stage_params;

    json scenario_json;
    scenario_json["pair_p"] = scenario.pair().p.describe();
    scenario_json["pair_q"] = scenario.pair().q.describe();
    scenario_json["mu_A"] = rat_str(scenario.sigma().measure(scenario.sigma().x1(1)));
    json stages_json = json::array();
    Int default_count = 0;
    for (int j = 1; j <= stages; ++j) {
        json entry;
        entry["j"] = j;
        entry["h"] = scenario.sigma().stage(j).h.str();
        json spacers = json::array();
        for (const auto& s : scenario.sigma().spec().stage(j).spacers) spacers.push_back(s.str());
        entry["spacers"] = spacers;
        const StageWindow& window = scenario.windows()[j - 1];
        entry["window_first"] = window.first.str();
        entry["window_last"] = window.last.str();
        entry["window_parity"] = window.odd ? "odd" : "even";
        entry["katok"] = scenario.is_katok(j);
        entry["N_j"] = scenario.block_bound(j).str();
        if (!window.empty() && !scenario.is_katok(j)) {
            auto check = scenario.verify_window_identities(j);
            entry["identities_checked"] = check.checked.str();
            entry["identities_holding"] = check.holds.str();
            entry["pieces"] = scenario.pi(j).pieces().size();
        }
        stages_json.push_back(entry);
        if (j == stages - 2) default_count = scenario.block_bound(j);
    }
    scenario_json["stages"] = stages_json;

    Int count = count_text.empty() ? default_count : int_parse(count_text);
    if (count < 1) count = 16;
    auto series = scenario.average_series(count);

    auto base_csv = tool.open_out("diverge.csv");
    base_csv << "n,p_n,q_n,term_lo,term_hi,running_avg\n";
    Rat running = 0;
    for (const auto& term : series) {
        running += term.base;
        base_csv << term.n << "," << term.p_n << "," << term.q_n << "," << rat_str(term.base)
                 << "," << rat_str(term.base) << "," << rat_str(running / Rat(term.n)) << "\n";
    }

    auto poisson_csv = tool.open_out("diverge_poisson.csv");
    poisson_csv << "n,p_n,q_n,term_coeff,term_exponent,term_approx,running_avg_approx\n";
    double p_running = 0;
    for (const auto& term : series) {
        double approx = std::exp(-rat_double(term.poisson_exponent));
        p_running += approx;
        poisson_csv << term.n << "," << term.p_n << "," << term.q_n << ",1,"
                    << rat_str(term.poisson_exponent) << "," << fmt_double(approx) << ","
                    << fmt_double(p_running / static_cast<double>(term.n.convert_to<long>()))
                    << "\n";
    }

    scenario_json["series_length"] = count.str();
    tool.write_json("diverge.json", scenario_json);
    tool.write_manifest("diverge", &schedule,
                        {"diverge.csv", "diverge_poisson.csv", "diverge.json"});
    std::cout << "joint average series of length " << count << " written ("
              << scenario.pair().p.describe() << ", " << scenario.pair().q.describe() << ")\n";
}

void run_repulse(Tool& tool, const std::string& nu_text, const std::string& base_text,
                 int windows) {
    RepulsionScenario::Options options;
    options.nu = rat_parse(nu_text);
    options.first_r = int_parse(base_text);
    options.windows = windows;
    RepulsionScenario scenario(options);
    auto report = scenario.run();

    auto csv = tool.open_out("repulse.csv");
    csv << "n,overlap,repulsion_coeff,repulsion_exponent,repulsion_approx\n";
    for (const auto& row : report.rows) {
        csv << row.n << "," << rat_str(row.overlap) << "," << rat_str(row.repulsion.coeff) << ","
            << rat_str(row.repulsion.exponent) << "," << fmt_double(row.repulsion.approx())
            << "\n";
    }

    json out;
    out["epsilon"] = rat_str(scenario.epsilon());
    out["d_measure"] = exact_exp_json(scenario.d_measure());
    out["lags_examined_through"] = report.n_max.str();
    out["last_nonzero_lag"] = report.last_nonzero_lag.str();
    out["rows"] = report.rows.size();
    out["fitted_const"] = report.fitted_const;
    json maxima = json::array();
    for (double v : report.window_max) maxima.push_back(v);
    out["window_max"] = maxima;
    out["overlap_power_sum"] = rat_str(report.overlap_power_sum);
    out["product_tail_bound"] = rat_str(report.product_tail_bound);
    out["sum_within_bound"] = report.sum_within_bound;
    out["repulsion_power_sum"] = report.repulsion_power_sum;
    out["tensor_sum_within_fitted"] = report.tensor_sum_within_fitted;
    tool.write_json("repulse.json", out);
    tool.write_manifest("repulse", nullptr, {"repulse.csv", "repulse.json"});
    std::cout << "repulsion report over " << report.rows.size() << " lags written\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact-arithmetic laboratory for rank-one constructions"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand

    Tool tool;
    app.add_option("--out", tool.out_dir, "output directory");
    app.add_option("--seed", tool.seed, "rng seed recorded in every output");
    app.add_option("--jobs", tool.jobs, "worker cap for sampling loops");
    app.add_option("--max-stage", tool.max_stage, "stage budget for certification");
    app.add_option("--samples", tool.samples, "monte carlo sample count");
    app.add_option("--config", tool.config_path,
                   "config file: schedule plus [subcommand] sections");
    app.add_option("--schedule", tool.schedule_path, "construction schedule file");
    app.add_option("--cnu-nu", tool.cnu_nu, "generated family exponent nu (rational)");
    app.add_option("--cnu-base", tool.cnu_base, "generated family block base (>= 2)");

    auto* build_cmd = app.add_subcommand("build", "build construction stages");
    int build_stages = 4;
    auto* build_stages_opt = build_cmd->add_option("--stages", build_stages, "stages to build");

    auto* corr_cmd = app.add_subcommand("correlate", "exact correlation series for X1");
    std::string corr_n, corr_from, corr_to, corr_eps = "0";
    auto* corr_n_opt = corr_cmd->add_option("--n", corr_n, "single lag");
    auto* corr_from_opt = corr_cmd->add_option("--n-from", corr_from, "range start");
    auto* corr_to_opt = corr_cmd->add_option("--n-to", corr_to, "range end");
    auto* corr_eps_opt =
        corr_cmd->add_option("--eps", corr_eps, "enclosure width target (0 = exact)");

    auto* sidon_cmd = app.add_subcommand("sidon-check", "per-stage sidon and growth verdicts");
    int sidon_upto = 4;
    auto* sidon_upto_opt = sidon_cmd->add_option("--upto", sidon_upto, "stages to check");

    auto* classify_cmd = app.add_subcommand("classify", "tensor power phase report");
    std::string classify_nu = "2";
    unsigned classify_dmax = 5;
    auto* classify_nu_opt = classify_cmd->add_option("--nu", classify_nu, "class exponent");
    auto* classify_dmax_opt = classify_cmd->add_option("--dmax", classify_dmax, "largest power");

    auto* verify_cmd = app.add_subcommand("verify-41", "power-sum vs product identity");
    int verify_m = 3;
    unsigned verify_d = 1;
    auto* verify_m_opt = verify_cmd->add_option("--m", verify_m, "stage bound");
    auto* verify_d_opt = verify_cmd->add_option("--d", verify_d, "tensor exponent");

    auto* pk_cmd = app.add_subcommand("pk-diagnose", "block average norm diagnostics");
    int pk_k = 1, pk_truncate = 2;
    unsigned pk_d = 1, pk_p = 1;
    bool pk_decompose = false;
    auto* pk_k_opt = pk_cmd->add_option("--k", pk_k, "block index");
    auto* pk_d_opt = pk_cmd->add_option("--d", pk_d, "tensor exponent");
    auto* pk_p_opt = pk_cmd->add_option("--p", pk_p, "translate power");
    auto* pk_tr_opt =
        pk_cmd->add_option("--block-truncate", pk_truncate, "effective block length");
    pk_cmd->add_flag("--decompose", pk_decompose, "include the variance/outside split");

    auto* poisson_cmd = app.add_subcommand("poisson", "exact cylinder measures and MC checks");
    std::vector<std::string> poisson_events;
    int poisson_region = 0;
    bool poisson_mc = false;
    poisson_cmd->add_option("--event", poisson_events,
                            "cylinder event, e.g. stage=2;floors=0,4-7;k=1");
    auto* poisson_region_opt =
        poisson_cmd->add_option("--region-stage", poisson_region, "sampling region tower");
    poisson_cmd->add_flag("--mc", poisson_mc, "add a monte carlo cross-check");

    auto* diverge_cmd = app.add_subcommand("diverge", "joint average divergence experiment");
    std::string diverge_pair = "staircase", diverge_h1 = "1", diverge_count, diverge_katok;
    int diverge_stages = 5;
    auto* diverge_pair_opt =
        diverge_cmd->add_option("--pair", diverge_pair, "staircase | linear | poly");
    auto* diverge_stages_opt = diverge_cmd->add_option("--stages", diverge_stages, "active stages");
    auto* diverge_h1_opt = diverge_cmd->add_option("--h1", diverge_h1, "initial height");
    auto* diverge_count_opt = diverge_cmd->add_option("--count", diverge_count, "series length");
    auto* diverge_katok_opt =
        diverge_cmd->add_option("--katok", diverge_katok, "comma list of Katok-spacer stages");

    auto* repulse_cmd = app.add_subcommand("repulse", "homoclinic repulsion experiment");
    std::string repulse_nu = "0", repulse_base = "2";
    int repulse_windows = 3;
    auto* repulse_nu_opt = repulse_cmd->add_option("--nu", repulse_nu, "base family exponent");
    auto* repulse_base_opt = repulse_cmd->add_option("--base", repulse_base, "first block cut count (blocks double)");
    auto* repulse_windows_opt =
        repulse_cmd->add_option("--windows", repulse_windows, "stage windows of lags");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tool.max_stage < 2 || tool.jobs < 1 || tool.samples < 1)
            fail(ErrorCode::InvalidSpec, "budgets must be positive (max-stage >= 2)");
        if (!tool.config_path.empty()) tool.config = load_config(tool.config_path);

        auto as_int = [](const std::string& s) {
            return static_cast<int>(int_parse(s).convert_to<int>());
        };
        auto as_unsigned = [](const std::string& s) {
            return static_cast<unsigned>(int_parse(s).convert_to<unsigned>());
        };
        auto as_string = [](const std::string& s) { return s; };

        if (*build_cmd) {
            tool.resolve(build_stages_opt, "build", "stages", build_stages, as_int);
            tool.note("stages", std::to_string(build_stages));
            run_build(tool, build_stages);
        } else if (*corr_cmd) {
            tool.resolve(corr_n_opt, "correlate", "n", corr_n, as_string);
            tool.resolve(corr_from_opt, "correlate", "n-from", corr_from, as_string);
            tool.resolve(corr_to_opt, "correlate", "n-to", corr_to, as_string);
            tool.resolve(corr_eps_opt, "correlate", "eps", corr_eps, as_string);
            Int from, to;
            if (!corr_n.empty()) {
                from = to = int_parse(corr_n);
            } else {
                from = corr_from.empty() ? Int(0) : int_parse(corr_from);
                to = corr_to.empty() ? from + 16 : int_parse(corr_to);
            }
            tool.note("n_from", from.str());
            tool.note("n_to", to.str());
            tool.note("eps", corr_eps);
            run_correlate(tool, from, to, rat_parse(corr_eps));
        } else if (*sidon_cmd) {
            tool.resolve(sidon_upto_opt, "sidon-check", "upto", sidon_upto, as_int);
            tool.note("upto", std::to_string(sidon_upto));
            run_sidon_check(tool, sidon_upto);
        } else if (*classify_cmd) {
            tool.resolve(classify_nu_opt, "classify", "nu", classify_nu, as_string);
            tool.resolve(classify_dmax_opt, "classify", "dmax", classify_dmax, as_unsigned);
            tool.note("nu", classify_nu);
            tool.note("dmax", std::to_string(classify_dmax));
            run_classify(tool, classify_nu, classify_dmax);
        } else if (*verify_cmd) {
            tool.resolve(verify_m_opt, "verify-41", "m", verify_m, as_int);
            tool.resolve(verify_d_opt, "verify-41", "d", verify_d, as_unsigned);
            tool.note("m", std::to_string(verify_m));
            tool.note("d", std::to_string(verify_d));
            run_verify41(tool, verify_m, verify_d);
        } else if (*pk_cmd) {
            tool.resolve(pk_k_opt, "pk-diagnose", "k", pk_k, as_int);
            tool.resolve(pk_d_opt, "pk-diagnose", "d", pk_d, as_unsigned);
            tool.resolve(pk_p_opt, "pk-diagnose", "p", pk_p, as_unsigned);
            tool.resolve(pk_tr_opt, "pk-diagnose", "block-truncate", pk_truncate, as_int);
            tool.note("k", std::to_string(pk_k));
            tool.note("d", std::to_string(pk_d));
            tool.note("p", std::to_string(pk_p));
            tool.note("block_truncate", std::to_string(pk_truncate));
            run_pk(tool, pk_k, pk_d, pk_p, pk_truncate, pk_decompose);
        } else if (*poisson_cmd) {
            tool.resolve(poisson_region_opt, "poisson", "region-stage", poisson_region, as_int);
            if (poisson_events.empty()) {
                std::string from_config = tool.section_value("poisson", "event");
                if (!from_config.empty()) poisson_events.push_back(from_config);
            }
            for (const auto& event : poisson_events) tool.note("event", event);
            tool.note("mc", poisson_mc ? "true" : "false");
            run_poisson(tool, poisson_events, poisson_region, poisson_mc);
        } else if (*diverge_cmd) {
            tool.resolve(diverge_pair_opt, "diverge", "pair", diverge_pair, as_string);
            tool.resolve(diverge_stages_opt, "diverge", "stages", diverge_stages, as_int);
            tool.resolve(diverge_h1_opt, "diverge", "h1", diverge_h1, as_string);
            tool.resolve(diverge_count_opt, "diverge", "count", diverge_count, as_string);
            tool.resolve(diverge_katok_opt, "diverge", "katok", diverge_katok, as_string);
            tool.note("pair", diverge_pair);
            tool.note("stages", std::to_string(diverge_stages));
            tool.note("h1", diverge_h1);
            tool.note("count", diverge_count.empty() ? "auto" : diverge_count);
            tool.note("katok", diverge_katok);
            run_diverge(tool, diverge_pair, diverge_stages, diverge_h1, diverge_count,
                        diverge_katok);
        } else if (*repulse_cmd) {
            tool.resolve(repulse_nu_opt, "repulse", "nu", repulse_nu, as_string);
            tool.resolve(repulse_base_opt, "repulse", "base", repulse_base, as_string);
            tool.resolve(repulse_windows_opt, "repulse", "windows", repulse_windows, as_int);
            tool.note("nu", repulse_nu);
            tool.note("base", repulse_base);
            tool.note("windows", std::to_string(repulse_windows));
            run_repulse(tool, repulse_nu, repulse_base, repulse_windows);
        }
    } catch (const Error& e) {
        nlohmann::ordered_json err;
        err["error"] = error_code_name(e.code());
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << R"({"error":"Unhandled","message":")" << e.what() << "\"}\n";
        return 1;
    }
    return 0;
}
