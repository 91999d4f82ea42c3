#pragma once

// Eager greedy best-first search with action and state pruning, A* for
// optimal plans, built-in heuristics and plan validation.

#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "symplan/gnn.hpp"
#include "symplan/pddl.hpp"
#include "symplan/pruning.hpp"
#include "symplan/tilg.hpp"

namespace symplan::search {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Evaluators
// ---------------------------------------------------------------------------

struct Evaluation {
    double h = 0.0;
    std::optional<pruning::StateKey> key;
};

/// Heuristic plus an optional permutation-invariant key for state pruning.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual Evaluation evaluate(const pddl::State& s, bool want_key) = 0;
    virtual std::string name() const = 0;
    double key_seconds() const { return key_seconds_; }

protected:
    double key_seconds_ = 0.0;
};

inline double goal_count(const pddl::LiftedProblem& prob, const pddl::State& s) {
    std::size_t missing = 0;
    for (const auto& g : prob.goal)
        if (!s.contains(g) && !std::binary_search(prob.static_props.begin(), prob.static_props.end(), g)) ++missing;
    return static_cast<double>(missing);
}

/// Unit-cost h_max: the first layer of the relaxed reachability fixpoint in
/// which every goal has appeared; infinity if some goal never does.
inline double h_max(const pddl::LiftedProblem& prob, const pddl::State& s) {
    std::vector<pddl::Proposition> facts(s.begin(), s.end());
    facts.insert(facts.end(), prob.static_props.begin(), prob.static_props.end());
    pddl::State layer(std::move(facts));
    for (std::size_t level = 0;; ++level) {
        if (layer.contains_all(prob.goal)) return static_cast<double>(level);
        std::vector<pddl::Proposition> next(layer.begin(), layer.end());
        for (const auto& a : pddl::applicable_actions(prob, layer))
            next.insert(next.end(), a.add.begin(), a.add.end());
        pddl::State grown(std::move(next));
        if (grown.size() == layer.size()) return kInfinity;
        layer = std::move(grown);
    }
}

namespace detail {

class WlKeyed : public Evaluator {
public:
    WlKeyed(const pddl::LiftedProblem& prob, std::size_t rounds) : prob_(prob), rounds_(rounds) {}

protected:
    pruning::StateKey wl_key(const pddl::State& s) {
        auto t0 = std::chrono::steady_clock::now();
        auto emb = gnn::wl_embedding(tilg::build_tilg(prob_, s), rounds_);
        auto key = pruning::key_from_integers(emb);
        key_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return key;
    }
    const pddl::LiftedProblem& prob_;
    std::size_t rounds_;
};

}  // namespace detail

/// |G \ s|, with state keys from the WL embedding.
class GoalCountEvaluator : public detail::WlKeyed {
public:
    explicit GoalCountEvaluator(const pddl::LiftedProblem& prob, std::size_t wl_rounds = gnn::kDefaultWlRounds)
        : WlKeyed(prob, wl_rounds) {}
    Evaluation evaluate(const pddl::State& s, bool want_key) override {
        Evaluation e{goal_count(prob_, s), std::nullopt};
        if (want_key) e.key = wl_key(s);
        return e;
    }
    std::string name() const override { return "goal-count"; }
};

class HMaxEvaluator : public detail::WlKeyed {
public:
    explicit HMaxEvaluator(const pddl::LiftedProblem& prob, std::size_t wl_rounds = gnn::kDefaultWlRounds)
        : WlKeyed(prob, wl_rounds) {}
    Evaluation evaluate(const pddl::State& s, bool want_key) override {
        Evaluation e{h_max(prob_, s), std::nullopt};
        if (want_key) e.key = wl_key(s);
        return e;
    }
    std::string name() const override { return "hmax"; }
};

/// 0 on goal states, 1 elsewhere.
class BlindEvaluator : public Evaluator {
public:
    explicit BlindEvaluator(const pddl::LiftedProblem& prob) : prob_(prob) {}
    Evaluation evaluate(const pddl::State& s, bool) override { return {prob_.is_goal(s) ? 0.0 : 1.0, std::nullopt}; }
    std::string name() const override { return "blind"; }

private:
    const pddl::LiftedProblem& prob_;
};

/// Learned heuristic: the RGCN head output; state keys from the pooled
/// embedding rounded to `scale` decimals.
class ModelEvaluator : public Evaluator {
public:
    ModelEvaluator(const pddl::LiftedProblem& prob, gnn::ModelWeights weights, int scale = pruning::kDefaultKeyScale)
        : prob_(prob), weights_(std::move(weights)), scale_(scale) {
        weights_.check_compatible(prob_);
    }
    Evaluation evaluate(const pddl::State& s, bool want_key) override {
        auto r = gnn::forward(weights_, tilg::build_tilg(prob_, s));
        Evaluation e{r.heuristic, std::nullopt};
        if (want_key) {
            auto t0 = std::chrono::steady_clock::now();
            e.key = pruning::make_state_key(r.embedding, scale_);
            key_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        return e;
    }
    std::string name() const override { return "model"; }

private:
    const pddl::LiftedProblem& prob_;
    gnn::ModelWeights weights_;
    int scale_;
};

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

struct Plan {
    std::vector<pddl::GroundAction> actions;
    std::size_t size() const { return actions.size(); }
};

struct ValidationResult {
    bool valid = false;
    std::size_t failed_step = 0;  // 1-based; 0 when the failure is the goal
    std::string reason;
    explicit operator bool() const { return valid; }
};

inline ValidationResult validate_plan(const pddl::LiftedProblem& prob, const Plan& plan) {
    pddl::State s = prob.init;
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const auto& a = plan.actions[i];
        if (!pddl::is_applicable(prob, s, a))
            return {false, i + 1, "step " + std::to_string(i + 1) + " " + pddl::to_string(prob, a) + " is not applicable"};
        s = pddl::apply_unchecked(s, a);
    }
    if (!prob.is_goal(s)) return {false, 0, "goal unsatisfied"};
    return {true, 0, ""};
}

/// States s_0 .. s_L visited by the plan (no applicability check).
inline std::vector<pddl::State> trajectory(const pddl::LiftedProblem& prob, const Plan& plan) {
    std::vector<pddl::State> out{prob.init};
    for (const auto& a : plan.actions) out.push_back(pddl::apply_unchecked(out.back(), a));
    return out;
}

/// One `(name arg ...)` per line, then a unit-cost comment.
inline std::string write_plan(const pddl::LiftedProblem& prob, const Plan& plan) {
    std::string s;
    for (const auto& a : plan.actions) s += pddl::to_string(prob, a) + "\n";
    s += "; cost = " + std::to_string(plan.size()) + " (unit cost)\n";
    return s;
}

class PlanParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Plan parse_plan(const pddl::LiftedProblem& prob, const std::string& text) {
    const auto& dom = prob.dom();
    Plan plan;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto semi = line.find(';');
        if (semi != std::string::npos) line.erase(semi);
        for (auto& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        auto open = line.find('(');
        if (open == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw PlanParseError("plan line " + std::to_string(line_no) + ": expected '(name args...)'");
            continue;
        }
        auto close = line.find(')', open);
        if (close == std::string::npos) throw PlanParseError("plan line " + std::to_string(line_no) + ": missing ')'");
        std::istringstream ws(line.substr(open + 1, close - open - 1));
        std::string name;
        ws >> name;
        auto sit = std::find_if(dom.schemas.begin(), dom.schemas.end(),
                                [&](const pddl::ActionSchema& s) { return s.name == name; });
        if (sit == dom.schemas.end())
            throw PlanParseError("plan line " + std::to_string(line_no) + ": unknown action " + name);
        std::vector<pddl::ObjectId> args;
        std::string on;
        while (ws >> on) {
            auto o = prob.find_object(on);
            if (!o) throw PlanParseError("plan line " + std::to_string(line_no) + ": unknown object " + on);
            args.push_back(*o);
        }
        if (args.size() != sit->arity())
            throw PlanParseError("plan line " + std::to_string(line_no) + ": wrong argument count for " + name);
        for (std::size_t i = 0; i < args.size(); ++i)
            if (!dom.is_subtype(prob.objects[args[i]].type, sit->param_types[i]))
                throw PlanParseError("plan line " + std::to_string(line_no) + ": argument " +
                                     prob.objects[args[i]].name + " has the wrong type");
        plan.actions.push_back(
            pddl::instantiate(prob, static_cast<std::uint32_t>(sit - dom.schemas.begin()), std::move(args)));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

enum class Outcome { solved, exhausted, resource_limit };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::solved: return "solved";
        case Outcome::exhausted: return "exhausted";
        case Outcome::resource_limit: return "resource-limit";
    }
    return "unknown";
}

struct SearchLimits {
    std::size_t max_expansions = 1'000'000;
    double max_seconds = 300.0;
};

struct SearchConfig {
    bool action_pruning = false;
    bool state_pruning = false;
    SearchLimits limits;
    std::size_t orbit_budget = symmetry::kDefaultOrbitBudget;
};

struct SearchNode {
    pddl::State state;
    std::optional<std::size_t> parent;
    std::optional<pddl::GroundAction> action;
    double h = 0.0;
    std::size_t g = 0;
    std::size_t seq = 0;
};

struct SearchReport {
    Outcome outcome = Outcome::exhausted;
    std::optional<Plan> plan;
    std::size_t expansions = 0;
    std::size_t generated = 0;
    std::size_t evaluated = 0;
    double wall_seconds = 0.0;
    pruning::PruneStats prune;
};

namespace detail {

inline Plan extract_plan(const std::vector<SearchNode>& nodes, std::size_t idx) {
    Plan plan;
    for (std::optional<std::size_t> i = idx; i && nodes[*i].parent; i = nodes[*i].parent)
        plan.actions.push_back(*nodes[*i].action);
    std::reverse(plan.actions.begin(), plan.actions.end());
    return plan;
}

class Clock {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline void finish(const pddl::LiftedProblem& prob, SearchReport& r, const std::vector<SearchNode>& nodes,
                   std::size_t goal_idx) {
    r.outcome = Outcome::solved;
    r.plan = extract_plan(nodes, goal_idx);
    auto v = validate_plan(prob, *r.plan);
    if (!v) throw std::logic_error("search produced an invalid plan: " + v.reason);
}

}  // namespace detail

/// Eager GBFS ordered by (h, insertion order). Exact duplicates are always
/// discarded; pruning is applied per the config.
inline SearchReport gbfs(const pddl::LiftedProblem& prob, Evaluator& eval, const SearchConfig& cfg = {}) {
    detail::Clock clock;
    SearchReport r;
    std::vector<SearchNode> nodes;
    std::unordered_map<pddl::State, std::size_t, pddl::StateHash> seen;
    pruning::StateRegistry registry;
    using Entry = std::tuple<double, std::size_t, std::size_t>;  // h, seq, node
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

    auto root_eval = eval.evaluate(prob.init, cfg.state_pruning);
    ++r.evaluated;
    if (cfg.state_pruning) {
        ++r.prune.states_seen;
        registry.check_and_register(*root_eval.key);
    }
    nodes.push_back({prob.init, std::nullopt, std::nullopt, root_eval.h, 0, 0});
    seen.emplace(prob.init, 0);
    if (root_eval.h != kInfinity) open.emplace(root_eval.h, 0, 0);

    while (!open.empty()) {
        if (r.expansions >= cfg.limits.max_expansions || clock.seconds() > cfg.limits.max_seconds) {
            r.outcome = Outcome::resource_limit;
            break;
        }
        auto [h, seq, idx] = open.top();
        open.pop();
        if (prob.is_goal(nodes[idx].state)) {
            detail::finish(prob, r, nodes, idx);
            break;
        }
        ++r.expansions;
        const pddl::State parent_state = nodes[idx].state;
        const std::size_t parent_g = nodes[idx].g;
        auto actions = pddl::applicable_actions(prob, parent_state);
        if (cfg.action_pruning)
            actions = pruning::prune_actions(prob, parent_state, std::move(actions), cfg.orbit_budget, &r.prune);
        for (auto& a : actions) {
            pddl::State child = pddl::apply_unchecked(parent_state, a);
            ++r.generated;
            if (seen.count(child)) continue;
            seen.emplace(child, nodes.size());
            auto ev = eval.evaluate(child, cfg.state_pruning);
            ++r.evaluated;
            if (cfg.state_pruning) {
                ++r.prune.states_seen;
                if (registry.check_and_register(*ev.key)) {
                    ++r.prune.states_pruned;
                    continue;
                }
            }
            if (ev.h == kInfinity) continue;
            std::size_t id = nodes.size();
            nodes.push_back({std::move(child), idx, std::move(a), ev.h, parent_g + 1, id});
            open.emplace(ev.h, id, id);
        }
    }
    r.prune.embed_seconds = eval.key_seconds();
    r.wall_seconds = clock.seconds();
    return r;
}

/// A* with f = g + h (unit costs), ties on smaller h then insertion order;
/// re-opens states reached with a smaller g. Optimal for admissible h.
inline SearchReport astar_optimal(const pddl::LiftedProblem& prob, Evaluator& eval, const SearchLimits& limits = {}) {
    detail::Clock clock;
    SearchReport r;
    std::vector<SearchNode> nodes;
    std::unordered_map<pddl::State, std::size_t, pddl::StateHash> best;  // state -> node with smallest g
    std::unordered_map<pddl::State, double, pddl::StateHash> hcache;
    using Entry = std::tuple<double, double, std::size_t, std::size_t>;  // f, h, seq, node
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

    double h0 = eval.evaluate(prob.init, false).h;
    ++r.evaluated;
    hcache.emplace(prob.init, h0);
    nodes.push_back({prob.init, std::nullopt, std::nullopt, h0, 0, 0});
    best.emplace(prob.init, 0);
    if (h0 != kInfinity) open.emplace(h0, h0, 0, 0);

    while (!open.empty()) {
        if (r.expansions >= limits.max_expansions || clock.seconds() > limits.max_seconds) {
            r.outcome = Outcome::resource_limit;
            break;
        }
        auto [f, h, seq, idx] = open.top();
        open.pop();
        if (best.at(nodes[idx].state) != idx) continue;  // stale entry
        if (prob.is_goal(nodes[idx].state)) {
            detail::finish(prob, r, nodes, idx);
            break;
        }
        ++r.expansions;
        const pddl::State parent_state = nodes[idx].state;
        const std::size_t g = nodes[idx].g + 1;
        for (auto& a : pddl::applicable_actions(prob, parent_state)) {
            pddl::State child = pddl::apply_unchecked(parent_state, a);
            ++r.generated;
            auto it = best.find(child);
            if (it != best.end() && nodes[it->second].g <= g) continue;
            double hc;
            if (auto c = hcache.find(child); c != hcache.end()) {
                hc = c->second;
            } else {
                hc = eval.evaluate(child, false).h;
                ++r.evaluated;
                hcache.emplace(child, hc);
            }
            if (hc == kInfinity) continue;
            std::size_t id = nodes.size();
            nodes.push_back({child, idx, std::move(a), hc, g, id});
            best[std::move(child)] = id;
            open.emplace(static_cast<double>(g) + hc, hc, id, id);
        }
    }
    r.wall_seconds = clock.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Machine-readable report. Timings are opt-in so that reports of identical
/// runs are byte-identical.
inline nlohmann::ordered_json report_to_json(const pddl::LiftedProblem& prob, const SearchReport& r,
                                             bool include_timings = false) {
    nlohmann::ordered_json j;
    j["problem"] = prob.name;
    j["domain"] = prob.dom().name;
    j["outcome"] = to_string(r.outcome);
    j["plan_length"] = r.plan ? nlohmann::ordered_json(r.plan->size()) : nlohmann::ordered_json(nullptr);
    j["expansions"] = r.expansions;
    j["generated"] = r.generated;
    j["evaluated"] = r.evaluated;
    j["prune"] = {{"actions_seen", r.prune.actions_seen},
                  {"actions_pruned", r.prune.actions_pruned},
                  {"states_seen", r.prune.states_seen},
                  {"states_pruned", r.prune.states_pruned},
                  {"inexact_orbit_states", r.prune.inexact_orbit_states}};
    if (include_timings) {
        j["wall_seconds"] = r.wall_seconds;
        j["prune"]["orbit_seconds"] = r.prune.orbit_seconds;
        j["prune"]["embed_seconds"] = r.prune.embed_seconds;
    }
    return j;
}

/// `key=value` lines; timings are opt-in as for the JSON report.
inline std::string report_to_text(const pddl::LiftedProblem& prob, const SearchReport& r,
                                  bool include_timings = false) {
    std::ostringstream os;
    os << "problem=" << prob.name << '\n'
       << "outcome=" << to_string(r.outcome) << '\n'
       << "plan_length=" << (r.plan ? std::to_string(r.plan->size()) : "none") << '\n'
       << "expansions=" << r.expansions << '\n'
       << "generated=" << r.generated << '\n'
       << "evaluated=" << r.evaluated << '\n'
       << "actions_seen=" << r.prune.actions_seen << '\n'
       << "actions_pruned=" << r.prune.actions_pruned << '\n'
       << "states_seen=" << r.prune.states_seen << '\n'
       << "states_pruned=" << r.prune.states_pruned << '\n'
       << "inexact_orbit_states=" << r.prune.inexact_orbit_states << '\n';
    if (include_timings)
        os << "orbit_seconds=" << r.prune.orbit_seconds << '\n'
           << "embed_seconds=" << r.prune.embed_seconds << '\n'
           << "wall_seconds=" << r.wall_seconds << '\n';
    return os.str();
}

}  // namespace symplan::search
