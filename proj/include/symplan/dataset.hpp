#pragma once

// Training and validation data from optimal plans: labeled TILGs along the
// plan, sibling records for ranking validation, and subgoal-prefix problems.

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "symplan/pddl.hpp"
#include "symplan/search.hpp"
#include "symplan/tilg.hpp"

namespace symplan::dataset {

struct Provenance {
    std::string problem;
    std::size_t step = 0;
    std::optional<std::size_t> augmented_k;  // set for subgoal-prefix problems
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledGraph {
    tilg::TilgGraph graph;
    std::size_t target = 0;  // h*
    Provenance provenance;
    friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;
};

struct SiblingRecord {
    tilg::TilgGraph optimal_child;
    std::vector<tilg::TilgGraph> siblings;
    Provenance provenance;
    friend bool operator==(const SiblingRecord&, const SiblingRecord&) = default;
};

struct AugmentedProblem {
    std::string base;
    std::size_t k = 0;
    pddl::LiftedProblem problem;
};

namespace detail {

inline void require_valid(const pddl::LiftedProblem& prob, const search::Plan& plan) {
    auto v = search::validate_plan(prob, plan);
    if (!v) throw std::invalid_argument("plan is not a solution of " + prob.name + ": " + v.reason);
}

}  // namespace detail

/// (TILG(s_i), L - i) for every state s_0 .. s_L along the plan.
inline std::vector<LabeledGraph> extract_training_pairs(const pddl::LiftedProblem& prob, const search::Plan& plan,
                                                        std::optional<std::size_t> augmented_k = std::nullopt) {
    detail::require_valid(prob, plan);
    auto states = search::trajectory(prob, plan);
    const std::size_t L = plan.size();
    std::vector<LabeledGraph> out;
    out.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        out.push_back({tilg::build_tilg(prob, states[i]), L - i, {prob.name, i, augmented_k}});
    return out;
}

/// Goal propositions sorted by the step after which each holds continuously
/// to the end of the plan (0 if it holds throughout); ties in canonical order.
inline std::vector<pddl::Proposition> subgoal_order(const pddl::LiftedProblem& prob, const search::Plan& plan) {
    auto states = search::trajectory(prob, plan);
    std::vector<std::pair<std::size_t, pddl::Proposition>> tagged;
    for (const auto& g : prob.goal) {
        bool is_static = std::binary_search(prob.static_props.begin(), prob.static_props.end(), g);
        auto holds = [&](std::size_t i) { return is_static || states[i].contains(g); };
        if (!holds(states.size() - 1))
            throw std::invalid_argument("goal " + pddl::to_string(prob, g) + " is not achieved by the plan");
        std::size_t i = states.size() - 1;
        while (i > 0 && holds(i - 1)) --i;
        tagged.emplace_back(i, g);
    }
    std::sort(tagged.begin(), tagged.end());
    std::vector<pddl::Proposition> out;
    for (auto& [i, g] : tagged) out.push_back(std::move(g));
    return out;
}

/// n - 1 problems whose goals are the first k subgoals, k = 1 .. n - 1.
inline std::vector<AugmentedProblem> augment_subgoal_prefixes(const pddl::LiftedProblem& prob,
                                                              const search::Plan& plan) {
    std::vector<AugmentedProblem> out;
    if (prob.goal.size() < 2) return out;
    auto order = subgoal_order(prob, plan);
    for (std::size_t k = 1; k < order.size(); ++k) {
        std::vector<pddl::Proposition> goal(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        out.push_back({prob.name, k, pddl::with_goal(prob, std::move(goal), prob.name + "-prefix" + std::to_string(k))});
    }
    return out;
}

/// One record per plan step that has at least one sibling: the child reached
/// by the plan action, and the distinct children of the other applicable
/// actions that differ from it.
inline std::vector<SiblingRecord> sibling_validation_set(const pddl::LiftedProblem& prob, const search::Plan& plan) {
    detail::require_valid(prob, plan);
    auto states = search::trajectory(prob, plan);
    std::vector<SiblingRecord> out;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& next = states[i + 1];
        std::vector<pddl::State> others;
        for (const auto& a : pddl::applicable_actions(prob, states[i])) {
            if (a == plan.actions[i]) continue;
            auto child = pddl::apply_unchecked(states[i], a);
            if (child == next || std::find(others.begin(), others.end(), child) != others.end()) continue;
            others.push_back(std::move(child));
        }
        if (others.empty()) continue;
        SiblingRecord r{tilg::build_tilg(prob, next), {}, {prob.name, i, std::nullopt}};
        for (const auto& s : others) r.siblings.push_back(tilg::build_tilg(prob, s));
        out.push_back(std::move(r));
    }
    return out;
}

enum class TiePolicy {
    strict,     // a sibling with an equal value counts as a failure
    non_strict  // the optimal child only needs a value no greater than every sibling
};

/// Fraction of records where the optimal child gets the lowest value.
inline double ranking_accuracy(const std::vector<SiblingRecord>& records,
                               const std::function<double(const tilg::TilgGraph&)>& h,
                               TiePolicy ties = TiePolicy::strict) {
    if (records.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& r : records) {
        double best = h(r.optimal_child);
        bool ok = true;
        for (const auto& s : r.siblings) {
            double v = h(s);
            if (ties == TiePolicy::strict ? v <= best : v < best) {
                ok = false;
                break;
            }
        }
        hits += ok;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

// ---------------------------------------------------------------------------
// Dataset files: JSON lines. The first line is a header
//   {"format":"symplan-dataset","version":1,"kind":"train"|"siblings",
//    "domain":...,"num_types":T,"num_predicates":P,"max_arity":A}
// and each further line is one record. A graph is
//   {"num_types":T,"num_predicates":P,"vertices":[[status,cls,payload...]...],
//    "edges":[[object_vertex,prop_vertex,label]...]}
// where the payload is the object id for object vertices (status 3) and the
// predicate id followed by argument ids for proposition vertices.
// ---------------------------------------------------------------------------

inline constexpr int kDatasetVersion = 1;
inline constexpr const char* kDatasetFormat = "symplan-dataset";

enum class DatasetKind { train, siblings };

inline const char* to_string(DatasetKind k) { return k == DatasetKind::train ? "train" : "siblings"; }

struct Dataset {
    DatasetKind kind = DatasetKind::train;
    std::string domain;
    std::uint32_t num_types = 0;
    std::uint32_t num_predicates = 0;
    std::uint32_t max_arity = 0;
    std::vector<LabeledGraph> train;
    std::vector<SiblingRecord> siblings;

    std::size_t size() const { return kind == DatasetKind::train ? train.size() : siblings.size(); }
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline Dataset make_dataset(DatasetKind kind, const pddl::DomainModel& dom) {
    Dataset d;
    d.kind = kind;
    d.domain = dom.name;
    d.num_types = static_cast<std::uint32_t>(dom.types.size());
    d.num_predicates = static_cast<std::uint32_t>(dom.predicates.size());
    for (const auto& p : dom.predicates) d.max_arity = std::max<std::uint32_t>(d.max_arity, p.arity());
    return d;
}

class DatasetError : public std::runtime_error {
public:
    DatasetError(std::size_t line, const std::string& msg)
        : std::runtime_error("dataset line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

using ordered_json = nlohmann::ordered_json;

inline ordered_json graph_to_json(const tilg::TilgGraph& g) {
    ordered_json vs = ordered_json::array();
    for (const auto& v : g.vertices) {
        ordered_json row = {v.status, v.cls};
        if (v.kind == tilg::VertexKind::object) {
            row.push_back(v.object);
        } else {
            row.push_back(v.proposition.predicate);
            for (auto a : v.proposition.args) row.push_back(a);
        }
        vs.push_back(std::move(row));
    }
    ordered_json es = ordered_json::array();
    for (const auto& e : g.edges) es.push_back({e.object_vertex, e.prop_vertex, e.label});
    return {{"num_types", g.num_types}, {"num_predicates", g.num_predicates}, {"vertices", vs}, {"edges", es}};
}

inline tilg::TilgGraph graph_from_json(const ordered_json& j) {
    tilg::TilgGraph g;
    g.num_types = j.at("num_types").get<std::uint32_t>();
    g.num_predicates = j.at("num_predicates").get<std::uint32_t>();
    for (const auto& row : j.at("vertices")) {
        if (!row.is_array() || row.size() < 3) throw std::invalid_argument("vertex entry needs at least 3 integers");
        tilg::TilgVertex v;
        v.status = row[0].get<std::uint32_t>();
        v.cls = row[1].get<std::uint32_t>();
        if (v.status >= tilg::status::count) throw std::invalid_argument("invalid vertex status");
        if (v.status == tilg::status::object) {
            if (row.size() != 3) throw std::invalid_argument("object vertex entry needs exactly 3 integers");
            v.kind = tilg::VertexKind::object;
            v.object = row[2].get<pddl::ObjectId>();
        } else {
            v.kind = tilg::VertexKind::proposition;
            v.proposition.predicate = row[2].get<pddl::PredicateId>();
            for (std::size_t i = 3; i < row.size(); ++i) v.proposition.args.push_back(row[i].get<pddl::ObjectId>());
        }
        g.vertices.push_back(std::move(v));
    }
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw std::invalid_argument("edge entry needs 3 integers");
        tilg::TilgEdge edge{e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>(), e[2].get<std::uint32_t>()};
        if (edge.object_vertex >= g.size() || edge.prop_vertex >= g.size())
            throw std::invalid_argument("edge endpoint out of range");
        g.edges.push_back(edge);
    }
    if (!tilg::is_bipartite(g)) throw std::invalid_argument("graph is not object/proposition bipartite");
    return g;
}

inline ordered_json provenance_to_json(const Provenance& p) {
    ordered_json j = {{"problem", p.problem}, {"step", p.step}};
    j["augmented_k"] = p.augmented_k ? ordered_json(*p.augmented_k) : ordered_json(nullptr);
    return j;
}

inline Provenance provenance_from_json(const ordered_json& j) {
    Provenance p{j.at("problem").get<std::string>(), j.at("step").get<std::size_t>(), std::nullopt};
    const auto& k = j.at("augmented_k");
    if (!k.is_null()) p.augmented_k = k.get<std::size_t>();
    return p;
}

inline void write_dataset(const Dataset& d, std::ostream& os) {
    ordered_json header = {{"format", kDatasetFormat},     {"version", kDatasetVersion},
                           {"kind", to_string(d.kind)},    {"domain", d.domain},
                           {"num_types", d.num_types},     {"num_predicates", d.num_predicates},
                           {"max_arity", d.max_arity}};
    os << header.dump() << '\n';
    if (d.kind == DatasetKind::train) {
        for (const auto& r : d.train)
            os << ordered_json{{"graph", graph_to_json(r.graph)},
                               {"target", r.target},
                               {"provenance", provenance_to_json(r.provenance)}}
                      .dump()
               << '\n';
    } else {
        for (const auto& r : d.siblings) {
            ordered_json sib = ordered_json::array();
            for (const auto& s : r.siblings) sib.push_back(graph_to_json(s));
            os << ordered_json{{"optimal_child", graph_to_json(r.optimal_child)},
                               {"siblings", sib},
                               {"provenance", provenance_to_json(r.provenance)}}
                      .dump()
               << '\n';
        }
    }
}

inline std::string write_dataset(const Dataset& d) {
    std::ostringstream os;
    write_dataset(d, os);
    return os.str();
}

inline void write_dataset(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_dataset(d, out);
    if (!out) throw std::runtime_error("error writing " + path);
}

inline Dataset read_dataset(std::istream& is) {
    Dataset d;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw DatasetError(1, "missing header");
    ++line_no;
    try {
        auto h = ordered_json::parse(line);
        if (h.at("format").get<std::string>() != kDatasetFormat) throw DatasetError(1, "not a dataset file");
        int version = h.at("version").get<int>();
        if (version != kDatasetVersion)
            throw DatasetError(1, "unsupported version " + std::to_string(version) + " (expected " +
                                      std::to_string(kDatasetVersion) + ")");
        auto kind = h.at("kind").get<std::string>();
        if (kind == "train") d.kind = DatasetKind::train;
        else if (kind == "siblings") d.kind = DatasetKind::siblings;
        else throw DatasetError(1, "unknown dataset kind " + kind);
        d.domain = h.at("domain").get<std::string>();
        d.num_types = h.at("num_types").get<std::uint32_t>();
        d.num_predicates = h.at("num_predicates").get<std::uint32_t>();
        d.max_arity = h.at("max_arity").get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(1, std::string("malformed header: ") + e.what());
    }
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = ordered_json::parse(line);
            if (d.kind == DatasetKind::train) {
                d.train.push_back({graph_from_json(j.at("graph")), j.at("target").get<std::size_t>(),
                                   provenance_from_json(j.at("provenance"))});
            } else {
                SiblingRecord r;
                r.optimal_child = graph_from_json(j.at("optimal_child"));
                for (const auto& s : j.at("siblings")) r.siblings.push_back(graph_from_json(s));
                r.provenance = provenance_from_json(j.at("provenance"));
                d.siblings.push_back(std::move(r));
            }
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError(line_no, e.what());
        } catch (const std::invalid_argument& e) {
            throw DatasetError(line_no, e.what());
        }
    }
    return d;
}

inline Dataset read_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_dataset(in);
}

inline Dataset read_dataset_string(const std::string& text) {
    std::istringstream is(text);
    return read_dataset(is);
}

}  // namespace symplan::dataset
