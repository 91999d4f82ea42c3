#pragma once

// Command-line front end. Exit codes: 0 solved / valid, 1 unsolved /
// invalid, 2 usage, file or parse error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "symplan/dataset.hpp"
#include "symplan/fixtures.hpp"
#include "symplan/gnn.hpp"
#include "symplan/pddl.hpp"
#include "symplan/pruning.hpp"
#include "symplan/search.hpp"
#include "symplan/symmetry.hpp"
#include "symplan/tilg.hpp"

namespace symplan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitError = 2;

/// Environment variable naming the directory that relative problem paths
/// fall back to when they do not exist as given.
inline constexpr const char* kFixtureEnv = "SYMPLAN_FIXTURES";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::filesystem::path resolve_path(const std::string& p) {
    namespace fs = std::filesystem;
    fs::path path(p);
    if (fs::exists(path) || path.is_absolute()) return path;
    if (const char* root = std::getenv(kFixtureEnv); root && *root) {
        fs::path alt = fs::path(root) / path;
        if (fs::exists(alt)) return alt;
    }
    return path;
}

inline std::string read_file(const std::string& p) {
    auto path = resolve_path(p);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("error writing " + path);
}

inline std::shared_ptr<const pddl::DomainModel> load_domain(const std::string& path) {
    try {
        return std::make_shared<const pddl::DomainModel>(pddl::parse_domain(read_file(path)));
    } catch (const pddl::ParseError& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline pddl::LiftedProblem load_problem(const std::string& path, std::shared_ptr<const pddl::DomainModel> dom) {
    try {
        return pddl::parse_problem(read_file(path), std::move(dom));
    } catch (const pddl::ParseError& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

struct PruneFlags {
    bool action = false;
    bool state = false;
};

/// Accepts "none", "both", or a comma list of "action" and "state".
inline PruneFlags parse_prune(const std::string& spec) {
    PruneFlags f;
    std::istringstream is(spec);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item == "action") f.action = true;
        else if (item == "state") f.state = true;
        else if (item == "both") f.action = f.state = true;
        else if (item != "none" && !item.empty()) throw UsageError("unknown pruning mode '" + item + "'");
    }
    return f;
}

struct HeuristicOptions {
    std::string spec = "goal-count";
    int scale = pruning::kDefaultKeyScale;
    std::size_t wl_rounds = gnn::kDefaultWlRounds;
};

/// goal-count | wl | hmax | blind | model:<weights.json>. "wl" is goal-count
/// ordering with WL-embedding state keys, the same as goal-count.
inline std::unique_ptr<search::Evaluator> make_evaluator(const pddl::LiftedProblem& prob, const HeuristicOptions& o) {
    if (o.spec == "goal-count" || o.spec == "wl")
        return std::make_unique<search::GoalCountEvaluator>(prob, o.wl_rounds);
    if (o.spec == "hmax") return std::make_unique<search::HMaxEvaluator>(prob, o.wl_rounds);
    if (o.spec == "blind") return std::make_unique<search::BlindEvaluator>(prob);
    if (o.spec.rfind("model:", 0) == 0) {
        auto path = o.spec.substr(6);
        if (path.empty()) throw UsageError("model heuristic needs a weight file: model:<path>");
        return std::make_unique<search::ModelEvaluator>(prob, gnn::load_weights(resolve_path(path).string()), o.scale);
    }
    throw UsageError("unknown heuristic '" + o.spec + "'");
}

struct Limits {
    std::size_t max_expansions = search::SearchLimits{}.max_expansions;
    double max_seconds = search::SearchLimits{}.max_seconds;
    std::size_t orbit_budget = symmetry::kDefaultOrbitBudget;

    search::SearchLimits search_limits() const { return {max_expansions, max_seconds}; }
};

inline void add_limit_options(CLI::App& cmd, Limits& l) {
    cmd.add_option("--max-expansions", l.max_expansions, "Expansion cap")->capture_default_str();
    cmd.add_option("--max-seconds", l.max_seconds, "Wall-clock budget per search")->capture_default_str();
    cmd.add_option("--orbit-budget", l.orbit_budget, "Search-tree node budget per orbit computation")
        ->capture_default_str();
}

inline void add_heuristic_options(CLI::App& cmd, HeuristicOptions& h) {
    cmd.add_option("--heuristic", h.spec, "goal-count | wl | hmax | blind | model:<weights.json>")
        ->capture_default_str();
    cmd.add_option("--scale", h.scale, "Decimal rounding scale for embedding state keys")->capture_default_str();
    cmd.add_option("--wl-rounds", h.wl_rounds, "Refinement rounds of the WL embedding")->capture_default_str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SolveConfig {
    std::string domain, problem;
    HeuristicOptions heuristic;
    std::string prune = "none";
    Limits limits;
    std::string plan_out, report_out;
    bool timings = false;
};

inline int cmd_solve(const SolveConfig& c, std::ostream& out, std::ostream& err) {
    auto prob = load_problem(c.problem, load_domain(c.domain));
    auto flags = parse_prune(c.prune);
    auto eval = make_evaluator(prob, c.heuristic);
    search::SearchConfig sc{flags.action, flags.state, c.limits.search_limits(), c.limits.orbit_budget};
    auto r = search::gbfs(prob, *eval, sc);
    out << search::report_to_text(prob, r, c.timings);
    if (!c.report_out.empty()) {
        auto j = search::report_to_json(prob, r, c.timings);
        j["heuristic"] = c.heuristic.spec;
        j["action_pruning"] = flags.action;
        j["state_pruning"] = flags.state;
        write_file(c.report_out, j.dump(2) + "\n");
    }
    if (r.plan) {
        auto text = search::write_plan(prob, *r.plan);
        if (c.plan_out.empty()) out << text;
        else write_file(c.plan_out, text);
    }
    if (r.outcome != search::Outcome::solved) err << "no plan found (" << search::to_string(r.outcome) << ")\n";
    return r.outcome == search::Outcome::solved ? kExitOk : kExitFailed;
}

struct ValidateConfig {
    std::string domain, problem, plan;
};

inline int cmd_validate(const ValidateConfig& c, std::ostream& out, std::ostream& err) {
    auto prob = load_problem(c.problem, load_domain(c.domain));
    search::Plan plan;
    try {
        plan = search::parse_plan(prob, read_file(c.plan));
    } catch (const search::PlanParseError& e) {
        err << c.plan << ": " << e.what() << '\n';
        return kExitFailed;
    }
    auto v = search::validate_plan(prob, plan);
    if (v) {
        out << "valid plan_length=" << plan.size() << '\n';
        return kExitOk;
    }
    out << "invalid";
    if (v.failed_step) out << " step=" << v.failed_step;
    out << " reason=" << v.reason << '\n';
    return kExitFailed;
}

struct GenDataConfig {
    std::string domain;
    std::vector<std::string> train, validation;
    std::string augment = "on";
    std::string out_dir;
    Limits limits;
};

struct GenDataSummary {
    std::size_t problems = 0;
    std::size_t solved = 0;
    std::size_t skipped = 0;
    std::size_t augmented_problems = 0;
    std::size_t train_records = 0;
    std::size_t validation_problems = 0;
    std::size_t validation_records = 0;

    nlohmann::ordered_json to_json() const {
        return {{"problems", problems},
                {"solved", solved},
                {"skipped", skipped},
                {"augmented_problems", augmented_problems},
                {"train_records", train_records},
                {"validation_problems", validation_problems},
                {"validation_records", validation_records}};
    }
};

inline std::optional<search::Plan> solve_optimal(const pddl::LiftedProblem& prob, const search::SearchLimits& limits) {
    search::HMaxEvaluator h(prob);
    auto r = search::astar_optimal(prob, h, limits);
    return r.plan;
}

inline int cmd_gen_data(const GenDataConfig& c, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    if (c.augment != "on" && c.augment != "off") throw UsageError("--augment must be on or off");
    auto dom = load_domain(c.domain);
    fs::create_directories(c.out_dir);
    auto train = dataset::make_dataset(dataset::DatasetKind::train, *dom);
    auto valid = dataset::make_dataset(dataset::DatasetKind::siblings, *dom);
    GenDataSummary s;
    for (const auto& path : c.train) {
        ++s.problems;
        auto prob = load_problem(path, dom);
        auto plan = solve_optimal(prob, c.limits.search_limits());
        if (!plan) {
            err << "warning: skipping unsolved training problem " << path << '\n';
            ++s.skipped;
            continue;
        }
        ++s.solved;
        auto recs = dataset::extract_training_pairs(prob, *plan);
        train.train.insert(train.train.end(), recs.begin(), recs.end());
        if (c.augment == "off") continue;
        for (auto& aug : dataset::augment_subgoal_prefixes(prob, *plan)) {
            auto aplan = solve_optimal(aug.problem, c.limits.search_limits());
            if (!aplan) {
                err << "warning: skipping unsolved prefix problem " << aug.problem.name << '\n';
                ++s.skipped;
                continue;
            }
            ++s.augmented_problems;
            auto arecs = dataset::extract_training_pairs(aug.problem, *aplan, aug.k);
            train.train.insert(train.train.end(), arecs.begin(), arecs.end());
        }
    }
    for (const auto& path : c.validation) {
        ++s.validation_problems;
        auto prob = load_problem(path, dom);
        auto plan = solve_optimal(prob, c.limits.search_limits());
        if (!plan) {
            err << "warning: skipping unsolved validation problem " << path << '\n';
            ++s.skipped;
            continue;
        }
        auto recs = dataset::sibling_validation_set(prob, *plan);
        valid.siblings.insert(valid.siblings.end(), recs.begin(), recs.end());
    }
    s.train_records = train.train.size();
    s.validation_records = valid.siblings.size();
    dataset::write_dataset(train, (fs::path(c.out_dir) / "train.jsonl").string());
    dataset::write_dataset(valid, (fs::path(c.out_dir) / "validation.jsonl").string());
    auto summary = s.to_json();
    write_file((fs::path(c.out_dir) / "summary.json").string(), summary.dump(2) + "\n");
    for (const auto& [k, v] : summary.items()) out << k << '=' << v << '\n';
    return kExitOk;
}

struct AblateConfig {
    std::string domain;
    std::vector<std::string> problems;
    HeuristicOptions heuristic;
    Limits limits;
    std::string table_out, json_out;
};

struct AblationRow {
    std::string config;
    std::size_t coverage = 0;
    std::size_t valid_plans = 0;
    std::size_t expansions = 0;   // summed over solved runs
    std::size_t plan_length = 0;  // summed over solved runs
    std::size_t failures = 0;     // runs that raised an error
};

inline std::vector<AblationRow> run_ablation(const std::vector<pddl::LiftedProblem>& problems,
                                             const HeuristicOptions& h, const Limits& limits,
                                             nlohmann::ordered_json* runs = nullptr) {
    const std::pair<const char*, PruneFlags> grid[] = {
        {"none", {false, false}}, {"action", {true, false}}, {"state", {false, true}}, {"both", {true, true}}};
    std::vector<AblationRow> rows;
    for (const auto& [name, flags] : grid) {
        AblationRow row{name};
        for (const auto& prob : problems) {
            try {
                auto eval = make_evaluator(prob, h);
                search::SearchConfig sc{flags.action, flags.state, limits.search_limits(), limits.orbit_budget};
                auto r = search::gbfs(prob, *eval, sc);
                if (runs) {
                    auto j = search::report_to_json(prob, r);
                    j["config"] = name;
                    runs->push_back(std::move(j));
                }
                if (r.outcome != search::Outcome::solved) continue;
                ++row.coverage;
                row.valid_plans += search::validate_plan(prob, *r.plan).valid;
                row.expansions += r.expansions;
                row.plan_length += r.plan->size();
            } catch (const std::exception& e) {
                ++row.failures;
                if (runs) runs->push_back({{"problem", prob.name}, {"config", name}, {"error", e.what()}});
            }
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::string ablation_table(const std::vector<AblationRow>& rows, std::size_t problems) {
    std::ostringstream os;
    os << "config\tcoverage\tproblems\tvalid_plans\texpansions\tplan_length\tfailures\n";
    for (const auto& r : rows)
        os << r.config << '\t' << r.coverage << '\t' << problems << '\t' << r.valid_plans << '\t' << r.expansions
           << '\t' << r.plan_length << '\t' << r.failures << '\n';
    return os.str();
}

inline int cmd_ablate(const AblateConfig& c, std::ostream& out, std::ostream&) {
    std::vector<pddl::LiftedProblem> problems;
    if (!c.problems.empty()) {
        auto dom = load_domain(c.domain);
        for (const auto& p : c.problems) problems.push_back(load_problem(p, dom));
    }
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    auto rows = problems.empty() ? std::vector<AblationRow>{} : run_ablation(problems, c.heuristic, c.limits, &runs);
    auto table = ablation_table(rows, problems.size());
    out << table;
    if (!c.table_out.empty()) write_file(c.table_out, table);
    if (!c.json_out.empty()) write_file(c.json_out, runs.dump(2) + "\n");
    return kExitOk;
}

struct InitWeightsConfig {
    std::string domain, out;
    std::optional<std::size_t> layers;
    std::uint32_t hidden = 64;
    std::uint64_t seed = 0;
};

inline int cmd_init_weights(const InitWeightsConfig& c, std::ostream& out, std::ostream&) {
    auto dom = load_domain(c.domain);
    auto meta = gnn::metadata_for(*dom, c.hidden);
    auto layers = c.layers.value_or(gnn::default_layer_count(dom->name));
    gnn::save_weights(gnn::random_weights(meta, layers, c.seed), c.out);
    out << "wrote " << c.out << " layers=" << layers << " hidden=" << c.hidden << '\n';
    return kExitOk;
}

inline int cmd_fixtures(const std::string& dir, std::ostream& out) {
    for (const auto& e : fixtures::write_corpus(dir)) out << e.domain_file << ' ' << e.problem_file << '\n';
    return kExitOk;
}

struct GraphConfig {
    std::string domain, problem;
    std::size_t budget = symmetry::kDefaultOrbitBudget;
};

inline int cmd_export_tilg(const GraphConfig& c, std::ostream& out) {
    auto prob = load_problem(c.problem, load_domain(c.domain));
    out << tilg::to_debug_text(tilg::build_tilg(prob, prob.init));
    return kExitOk;
}

inline int cmd_orbits(const GraphConfig& c, std::ostream& out) {
    auto prob = load_problem(c.problem, load_domain(c.domain));
    auto g = tilg::build_tilg(prob, prob.init);
    auto r = symmetry::automorphism_orbits(tilg::to_colored_graph(g), c.budget);
    out << "exact=" << (r.exact ? "true" : "false") << " orbits=" << r.orbits.num_orbits
        << " generators=" << r.generators.size() << '\n';
    std::vector<std::vector<std::string>> members(r.orbits.num_orbits);
    for (pddl::ObjectId o = 0; o < prob.objects.size(); ++o)
        members[r.orbits.orbit_id[o]].push_back(prob.objects[o].name);
    for (const auto& m : members) {
        if (m.empty()) continue;
        for (std::size_t i = 0; i < m.size(); ++i) out << (i ? " " : "") << m[i];
        out << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lifted planner with symmetry pruning over typed instance learning graphs"};
    app.require_subcommand(1);

    SolveConfig solve;
    auto* s = app.add_subcommand("solve", "Run greedy best-first search on one problem");
    s->add_option("--domain", solve.domain, "Domain file")->required();
    s->add_option("--problem", solve.problem, "Problem file")->required();
    add_heuristic_options(*s, solve.heuristic);
    s->add_option("--prune", solve.prune, "none | action | state | action,state | both")->capture_default_str();
    add_limit_options(*s, solve.limits);
    s->add_option("--plan", solve.plan_out, "Plan output file (default: stdout)");
    s->add_option("--report", solve.report_out, "JSON report file");
    s->add_flag("--report-timings", solve.timings, "Include wall-clock timings in reports");

    ValidateConfig val;
    auto* v = app.add_subcommand("validate", "Check a plan against a problem");
    v->add_option("--domain", val.domain, "Domain file")->required();
    v->add_option("--problem", val.problem, "Problem file")->required();
    v->add_option("--plan", val.plan, "Plan file")->required();

    GenDataConfig gen;
    auto* g = app.add_subcommand("gen-data", "Generate training and validation datasets");
    g->add_option("--domain", gen.domain, "Domain file")->required();
    g->add_option("--train", gen.train, "Training problem files")->required();
    g->add_option("--validation", gen.validation, "Held-out problem files for sibling records");
    g->add_option("--augment", gen.augment, "on | off")->capture_default_str();
    g->add_option("--out", gen.out_dir, "Output directory")->required();
    add_limit_options(*g, gen.limits);

    AblateConfig abl;
    auto* a = app.add_subcommand("ablate", "Run the none/action/state/both pruning grid");
    a->add_option("--domain", abl.domain, "Domain file")->required();
    a->add_option("--problems", abl.problems, "Problem files");
    add_heuristic_options(*a, abl.heuristic);
    add_limit_options(*a, abl.limits);
    a->add_option("--table", abl.table_out, "Tab-separated table output");
    a->add_option("--json", abl.json_out, "Per-run JSON reports");

    InitWeightsConfig iw;
    auto* w = app.add_subcommand("init-weights", "Write randomly initialized model weights");
    w->add_option("--domain", iw.domain, "Domain file")->required();
    w->add_option("--out", iw.out, "Weight file")->required();
    w->add_option("--layers", iw.layers, "Layer count (default depends on the domain)");
    w->add_option("--hidden", iw.hidden, "Hidden width")->capture_default_str();
    w->add_option("--seed", iw.seed, "Random seed")->capture_default_str();

    std::string fixture_dir;
    auto* f = app.add_subcommand("fixtures", "Write the bundled fixture problems");
    f->add_option("--out", fixture_dir, "Output directory")->required();

    GraphConfig gc;
    auto* e = app.add_subcommand("export-tilg", "Print the initial-state graph");
    auto* o = app.add_subcommand("orbits", "Print object orbits of the initial-state graph");
    for (auto* cmd : {e, o}) {
        cmd->add_option("--domain", gc.domain, "Domain file")->required();
        cmd->add_option("--problem", gc.problem, "Problem file")->required();
    }
    o->add_option("--budget", gc.budget, "Search-tree node budget")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*s) return cmd_solve(solve, out, err);
        if (*v) return cmd_validate(val, out, err);
        if (*g) return cmd_gen_data(gen, out, err);
        if (*a) return cmd_ablate(abl, out, err);
        if (*w) return cmd_init_weights(iw, out, err);
        if (*f) return cmd_fixtures(fixture_dir, out);
        if (*e) return cmd_export_tilg(gc, out);
        if (*o) return cmd_orbits(gc, out);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace symplan::cli
