#pragma once

// Generators for the bundled PDDL fixture corpus. Each generator returns
// domain or problem text; `write_corpus` materializes the shipped set.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace symplan::fixtures {

// Gripper with a static `adjacent` relation so that the robot cannot move
// in place. Parameters: n balls, all starting in rooma, goal in roomb.
inline std::string gripper_domain() {
    return R"((define (domain gripper)
  (:requirements :strips :typing)
  (:types room ball gripper)
  (:predicates (at-robby ?r - room) (at ?b - ball ?r - room) (free ?g - gripper)
               (carry ?b - ball ?g - gripper) (adjacent ?from ?to - room))
  (:action move
    :parameters (?from ?to - room)
    :precondition (and (at-robby ?from) (adjacent ?from ?to))
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g)))))
)";
}

inline std::string gripper_problem(int balls) {
    std::ostringstream os;
    os << "(define (problem gripper-" << balls << ")\n  (:domain gripper)\n  (:objects rooma roomb - room";
    for (int i = 1; i <= balls; ++i) os << " ball" << i;
    if (balls > 0) os << " - ball";
    os << " left right - gripper)\n  (:init (at-robby rooma) (free left) (free right)"
          " (adjacent rooma roomb) (adjacent roomb rooma)";
    for (int i = 1; i <= balls; ++i) os << " (at ball" << i << " rooma)";
    os << ")\n  (:goal (and";
    for (int i = 1; i <= balls; ++i) os << " (at ball" << i << " roomb)";
    os << "))\n)\n";
    return os.str();
}

// Unsolvable: the goal asks for a static fact that is false initially.
inline std::string gripper_unsolvable_problem() {
    return R"((define (problem gripper-unsolvable)
  (:domain gripper)
  (:objects rooma roomb - room ball1 - ball left right - gripper)
  (:init (at-robby rooma) (free left) (free right) (adjacent rooma roomb) (adjacent roomb rooma) (at ball1 rooma))
  (:goal (and (at ball1 roomb) (adjacent rooma rooma)))
)
)";
}

inline std::string blocksworld_domain() {
    return R"((define (domain blocksworld)
  (:requirements :strips :typing)
  (:types block)
  (:predicates (on ?x ?y - block) (ontable ?x - block) (clear ?x - block) (handempty) (holding ?x - block))
  (:action pick-up
    :parameters (?x - block)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty))))
  (:action put-down
    :parameters (?x - block)
    :precondition (and (holding ?x))
    :effect (and (ontable ?x) (clear ?x) (handempty) (not (holding ?x))))
  (:action stack
    :parameters (?x ?y - block)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (on ?x ?y) (clear ?x) (handempty) (not (holding ?x)) (not (clear ?y))))
  (:action unstack
    :parameters (?x ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (on ?x ?y)) (not (clear ?x)) (not (handempty)))))
)";
}

/// Towers are listed bottom to top; blocks are named by the caller.
using Towers = std::vector<std::vector<std::string>>;

inline std::string blocksworld_problem(const std::string& name, const Towers& init, const Towers& goal) {
    std::ostringstream os;
    os << "(define (problem " << name << ")\n  (:domain blocksworld)\n  (:objects";
    for (const auto& t : init)
        for (const auto& b : t) os << ' ' << b;
    os << " - block)\n  (:init (handempty)";
    for (const auto& t : init) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i == 0) os << " (ontable " << t[i] << ')';
            else os << " (on " << t[i] << ' ' << t[i - 1] << ')';
        }
        if (!t.empty()) os << " (clear " << t.back() << ')';
    }
    os << ")\n  (:goal (and";
    for (const auto& t : goal) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i == 0) os << " (ontable " << t[i] << ')';
            else os << " (on " << t[i] << ' ' << t[i - 1] << ')';
        }
    }
    os << "))\n)\n";
    return os.str();
}

// Spanner-like chain: a man walks a one-way corridor of locations, picking up
// single-use spanners, and tightens nuts at the gate (last location).
inline std::string spanner_domain() {
    return R"((define (domain spanner)
  (:requirements :strips :typing)
  (:types location locatable - object man nut spanner - locatable)
  (:predicates (at ?m - locatable ?l - location) (carrying ?m - man ?s - spanner) (useable ?s - spanner)
               (link ?l1 ?l2 - location) (tightened ?n - nut) (loose ?n - nut))
  (:action walk
    :parameters (?start ?end - location ?m - man)
    :precondition (and (at ?m ?start) (link ?start ?end))
    :effect (and (not (at ?m ?start)) (at ?m ?end)))
  (:action pickup_spanner
    :parameters (?l - location ?s - spanner ?m - man)
    :precondition (and (at ?m ?l) (at ?s ?l))
    :effect (and (not (at ?s ?l)) (carrying ?m ?s)))
  (:action tighten_nut
    :parameters (?l - location ?s - spanner ?m - man ?n - nut)
    :precondition (and (at ?m ?l) (at ?n ?l) (carrying ?m ?s) (useable ?s) (loose ?n))
    :effect (and (not (loose ?n)) (not (useable ?s)) (tightened ?n))))
)";
}

/// `spanner_locations[i]` is the corridor index (1-based) of spanner i+1;
/// corridor has `corridor` locations plus shed (start) and gate (end).
inline std::string spanner_problem(const std::string& name, const std::vector<int>& spanner_locations, int nuts,
                                   int corridor) {
    std::ostringstream os;
    auto loc = [&](int i) {
        if (i == 0) return std::string("shed");
        if (i == corridor + 1) return std::string("gate");
        return "location" + std::to_string(i);
    };
    os << "(define (problem " << name << ")\n  (:domain spanner)\n  (:objects bob - man";
    for (std::size_t i = 0; i < spanner_locations.size(); ++i) os << " spanner" << i + 1;
    if (!spanner_locations.empty()) os << " - spanner";
    for (int i = 1; i <= nuts; ++i) os << " nut" << i;
    if (nuts > 0) os << " - nut";
    for (int i = 0; i <= corridor + 1; ++i) os << ' ' << loc(i);
    os << " - location)\n  (:init (at bob shed)";
    for (std::size_t i = 0; i < spanner_locations.size(); ++i)
        os << " (at spanner" << i + 1 << ' ' << loc(spanner_locations[i]) << ") (useable spanner" << i + 1 << ')';
    for (int i = 1; i <= nuts; ++i) os << " (loose nut" << i << ") (at nut" << i << " gate)";
    for (int i = 0; i <= corridor; ++i) os << " (link " << loc(i) << ' ' << loc(i + 1) << ')';
    os << ")\n  (:goal (and";
    for (int i = 1; i <= nuts; ++i) os << " (tightened nut" << i << ')';
    os << "))\n)\n";
    return os.str();
}

// Movie-like: many redundant snack objects, any one of each kind suffices.
inline std::string movie_domain() {
    return R"((define (domain movie)
  (:requirements :strips :typing)
  (:types chips dip pop cheese crackers)
  (:predicates (movie-rewound) (counter-at-two-hours) (counter-at-zero) (have-chips) (have-dip)
               (have-pop) (have-cheese) (have-crackers) (snack-available ?x - object))
  (:action rewind-movie
    :parameters ()
    :precondition (and)
    :effect (and (movie-rewound) (not (counter-at-zero))))
  (:action reset-counter
    :parameters ()
    :precondition (and)
    :effect (and (counter-at-zero)))
  (:action get-chips
    :parameters (?x - chips)
    :precondition (and (snack-available ?x))
    :effect (and (have-chips)))
  (:action get-dip
    :parameters (?x - dip)
    :precondition (and (snack-available ?x))
    :effect (and (have-dip)))
  (:action get-pop
    :parameters (?x - pop)
    :precondition (and (snack-available ?x))
    :effect (and (have-pop)))
  (:action get-cheese
    :parameters (?x - cheese)
    :precondition (and (snack-available ?x))
    :effect (and (have-cheese)))
  (:action get-crackers
    :parameters (?x - crackers)
    :precondition (and (snack-available ?x))
    :effect (and (have-crackers))))
)";
}

/// n objects of each snack kind.
inline std::string movie_problem(int n) {
    static const char* kinds[] = {"chips", "dip", "pop", "cheese", "crackers"};
    std::ostringstream os;
    os << "(define (problem movie-" << n << ")\n  (:domain movie)\n  (:objects";
    for (const char* k : kinds) {
        for (int i = 1; i <= n; ++i) os << ' ' << k << i;
        if (n > 0) os << " - " << k;
    }
    os << ")\n  (:init (counter-at-two-hours)";
    for (const char* k : kinds)
        for (int i = 1; i <= n; ++i) os << " (snack-available " << k << i << ')';
    os << ")\n  (:goal (and (movie-rewound) (counter-at-zero) (have-chips) (have-dip) (have-pop)"
          " (have-cheese) (have-crackers)))\n)\n";
    return os.str();
}

// Logistics-like with trucks only; `in-city` is static.
inline std::string logistics_domain() {
    return R"((define (domain logistics)
  (:requirements :strips :typing)
  (:types truck package - physobj location city)
  (:predicates (in-city ?l - location ?c - city) (at ?o - physobj ?l - location) (in ?p - package ?t - truck))
  (:action load-truck
    :parameters (?p - package ?t - truck ?l - location)
    :precondition (and (at ?t ?l) (at ?p ?l))
    :effect (and (not (at ?p ?l)) (in ?p ?t)))
  (:action unload-truck
    :parameters (?p - package ?t - truck ?l - location)
    :precondition (and (at ?t ?l) (in ?p ?t))
    :effect (and (not (in ?p ?t)) (at ?p ?l)))
  (:action drive-truck
    :parameters (?t - truck ?from ?to - location ?c - city)
    :precondition (and (at ?t ?from) (in-city ?from ?c) (in-city ?to ?c))
    :effect (and (not (at ?t ?from)) (at ?t ?to))))
)";
}

/// One city with `locations` locations, `trucks` trucks at l1, packages
/// from l1 to the last location.
inline std::string logistics_problem(const std::string& name, int locations, int trucks, int packages) {
    std::ostringstream os;
    os << "(define (problem " << name << ")\n  (:domain logistics)\n  (:objects city1 - city";
    for (int i = 1; i <= locations; ++i) os << " l" << i;
    os << " - location";
    for (int i = 1; i <= trucks; ++i) os << " truck" << i;
    os << " - truck";
    for (int i = 1; i <= packages; ++i) os << " pkg" << i;
    if (packages > 0) os << " - package";
    os << ")\n  (:init";
    for (int i = 1; i <= locations; ++i) os << " (in-city l" << i << " city1)";
    for (int i = 1; i <= trucks; ++i) os << " (at truck" << i << " l1)";
    for (int i = 1; i <= packages; ++i) os << " (at pkg" << i << " l1)";
    os << ")\n  (:goal (and";
    for (int i = 1; i <= packages; ++i) os << " (at pkg" << i << " l" << locations << ')';
    os << "))\n)\n";
    return os.str();
}

// Four nodes in two linked pairs. Every node shares one orbit, yet joining
// a node with its partner is not symmetric to joining it with a stranger.
inline std::string pairs_domain() {
    return R"((define (domain pairs)
  (:requirements :strips :typing)
  (:types node)
  (:predicates (ready ?a - node) (linked ?a ?b - node) (joined ?a ?b - node))
  (:action join
    :parameters (?a ?b - node)
    :precondition (and (ready ?a) (ready ?b))
    :effect (and (joined ?a ?b))))
)";
}

inline std::string pairs_problem() {
    return R"((define (problem pairs-4)
  (:domain pairs)
  (:objects p1 p2 p3 p4 - node)
  (:init (ready p1) (ready p2) (ready p3) (ready p4)
         (linked p1 p2) (linked p2 p1) (linked p3 p4) (linked p4 p3))
  (:goal (and (joined p1 p2) (joined p2 p1) (joined p3 p4) (joined p4 p3)))
)
)";
}

struct CorpusEntry {
    std::string domain_file;
    std::string problem_file;
};

/// Writes every fixture under `root`; returns the (domain, problem) list.
inline std::vector<CorpusEntry> write_corpus(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::vector<CorpusEntry> out;
    auto put = [&](const fs::path& rel, const std::string& text) {
        fs::create_directories((root / rel).parent_path());
        std::ofstream(root / rel) << text;
        return rel.generic_string();
    };
    auto d = put("gripper/domain.pddl", gripper_domain());
    for (int n = 1; n <= 8; ++n)
        out.push_back({d, put("gripper/p" + std::to_string(n) + ".pddl", gripper_problem(n))});
    out.push_back({d, put("gripper/unsolvable.pddl", gripper_unsolvable_problem())});

    d = put("blocksworld/domain.pddl", blocksworld_domain());
    const std::vector<std::pair<Towers, Towers>> bw = {
        {{{"a", "b", "c"}}, {{"c", "b", "a"}}},
        {{{"a"}, {"b"}, {"c"}}, {{"a", "b", "c"}}},
        {{{"a", "b"}, {"c"}}, {{"c", "a", "b"}}},
        {{{"c", "a"}, {"b"}}, {{"a", "b", "c"}}},
        {{{"a", "b", "c"}}, {{"a"}, {"b"}, {"c"}}},
        {{{"b", "a", "c"}}, {{"c", "a"}, {"b"}}},
    };
    for (std::size_t i = 0; i < bw.size(); ++i) {
        std::string name = "bw3-" + std::to_string(i + 1);
        out.push_back({d, put("blocksworld/" + name + ".pddl", blocksworld_problem(name, bw[i].first, bw[i].second))});
    }

    d = put("spanner/domain.pddl", spanner_domain());
    struct Sp { std::vector<int> spanners; int nuts; int corridor; };
    const std::vector<Sp> sp = {
        {{1}, 1, 1}, {{1, 1}, 1, 1}, {{1, 1, 1}, 2, 1}, {{1, 2}, 2, 2}, {{1, 1, 2}, 2, 2}, {{2, 2, 2}, 3, 2},
    };
    for (std::size_t i = 0; i < sp.size(); ++i) {
        std::string name = "spanner-" + std::to_string(i + 1);
        out.push_back({d, put("spanner/" + name + ".pddl",
                              spanner_problem(name, sp[i].spanners, sp[i].nuts, sp[i].corridor))});
    }

    d = put("movie/domain.pddl", movie_domain());
    for (int n = 1; n <= 4; ++n)
        out.push_back({d, put("movie/p" + std::to_string(n) + ".pddl", movie_problem(n))});

    d = put("logistics/domain.pddl", logistics_domain());
    const std::vector<std::tuple<int, int, int>> lg = {{2, 1, 1}, {2, 1, 2}, {3, 1, 2}, {3, 2, 2}, {3, 2, 3}};
    for (std::size_t i = 0; i < lg.size(); ++i) {
        std::string name = "logistics-" + std::to_string(i + 1);
        auto [l, t, p] = lg[i];
        out.push_back({d, put("logistics/" + name + ".pddl", logistics_problem(name, l, t, p))});
    }

    d = put("pairs/domain.pddl", pairs_domain());
    out.push_back({d, put("pairs/p1.pddl", pairs_problem())});
    return out;
}

}  // namespace symplan::fixtures
