#pragma once

// Reference implementations used only by tests. They share no code with the
// library beyond its data types.

#include <Eigen/Dense>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "symplan/fixtures.hpp"
#include "symplan/gnn.hpp"
#include "symplan/pddl.hpp"
#include "symplan/symmetry.hpp"
#include "symplan/tilg.hpp"

namespace oracle {

using symplan::symmetry::ColoredGraph;
using symplan::symmetry::Permutation;

// ---------------------------------------------------------------------------
// Graph oracles
// ---------------------------------------------------------------------------

/// labels[u][v]: sorted labels of all edges between u and v.
inline std::vector<std::vector<std::vector<std::uint32_t>>> label_matrix(const ColoredGraph& g) {
    std::vector<std::vector<std::vector<std::uint32_t>>> m(g.size(), std::vector<std::vector<std::uint32_t>>(g.size()));
    for (const auto& e : g.sorted_edges()) {
        m[e.u][e.v].push_back(e.label);
        if (e.u != e.v) m[e.v][e.u].push_back(e.label);
    }
    for (auto& row : m)
        for (auto& cell : row) std::sort(cell.begin(), cell.end());
    return m;
}

/// Enumerates every color- and label-preserving bijection a -> b by
/// backtracking; `visit` returns false to stop.
inline void enumerate_isomorphisms(const ColoredGraph& a, const ColoredGraph& b,
                                   const std::function<bool(const Permutation&)>& visit) {
    if (a.size() != b.size()) return;
    const std::size_t n = a.size();
    auto la = label_matrix(a), lb = label_matrix(b);
    Permutation p(n);
    std::vector<bool> used(n, false);
    bool stop = false;
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        if (stop) return;
        if (k == n) {
            if (!visit(p)) stop = true;
            return;
        }
        for (std::uint32_t t = 0; t < n && !stop; ++t) {
            if (used[t] || a.color(static_cast<std::uint32_t>(k)) != b.color(t)) continue;
            bool ok = la[k][k] == lb[t][t];
            for (std::size_t j = 0; j < k && ok; ++j) ok = la[k][j] == lb[t][p[j]];
            if (!ok) continue;
            used[t] = true;
            p[k] = t;
            go(k + 1);
            used[t] = false;
        }
    };
    go(0);
}

inline bool brute_isomorphic(const ColoredGraph& a, const ColoredGraph& b) {
    if (a.edge_count() != b.edge_count()) return false;
    bool found = false;
    enumerate_isomorphisms(a, b, [&](const Permutation&) {
        found = true;
        return false;
    });
    return found;
}

/// Orbit ids numbered densely by first vertex, from the full automorphism group.
inline std::vector<std::uint32_t> brute_orbits(const ColoredGraph& g) {
    const std::size_t n = g.size();
    std::vector<std::set<std::uint32_t>> images(n);
    enumerate_isomorphisms(g, g, [&](const Permutation& p) {
        for (std::size_t v = 0; v < n; ++v) images[v].insert(p[v]);
        return true;
    });
    std::vector<std::uint32_t> id(n, UINT32_MAX);
    std::uint32_t next = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (id[v] != UINT32_MAX) continue;
        for (auto u : images[v]) id[u] = next;
        ++next;
    }
    return id;
}

inline ColoredGraph random_graph(std::mt19937& rng, std::size_t n, std::uint32_t colors, std::uint32_t labels,
                                 double density) {
    std::uniform_int_distribution<std::uint32_t> col(0, colors - 1), lab(1, labels);
    std::bernoulli_distribution coin(density);
    std::vector<std::uint64_t> c(n);
    for (auto& x : c) x = col(rng);
    ColoredGraph g(c);
    for (std::uint32_t u = 0; u < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v)
            if (coin(rng)) g.add_edge(u, v, lab(rng));
    return g;
}

inline ColoredGraph relabel(const ColoredGraph& g, std::mt19937& rng) {
    Permutation p(g.size());
    for (std::uint32_t i = 0; i < p.size(); ++i) p[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
    return g.permuted(p);
}

/// A mixed suite of 50 graphs on at most 9 vertices: structured symmetric
/// graphs, their randomly recolored variants and sparse/dense random graphs.
inline std::vector<ColoredGraph> orbit_suite(std::uint32_t seed = 7) {
    std::mt19937 rng(seed);
    std::vector<ColoredGraph> out;
    auto cycle = [](std::size_t n, std::uint32_t label) {
        ColoredGraph g(std::vector<std::uint64_t>(n, 0));
        for (std::uint32_t i = 0; i < n; ++i) g.add_edge(i, static_cast<std::uint32_t>((i + 1) % n), label);
        return g;
    };
    for (std::size_t n = 3; n <= 9; ++n) out.push_back(cycle(n, 1));
    {
        ColoredGraph g(std::vector<std::uint64_t>(8, 0));  // cube
        for (std::uint32_t u = 0; u < 8; ++u)
            for (std::uint32_t b = 1; b < 8; b <<= 1)
                if (u < (u ^ b)) g.add_edge(u, u ^ b, 1);
        out.push_back(g);
    }
    {
        ColoredGraph g(std::vector<std::uint64_t>{0, 0, 0, 1, 1, 1});  // K3,3
        for (std::uint32_t u = 0; u < 3; ++u)
            for (std::uint32_t v = 3; v < 6; ++v) g.add_edge(u, v, 1);
        out.push_back(g);
    }
    {
        ColoredGraph g(std::vector<std::uint64_t>(9, 0));  // 3x3 grid
        for (std::uint32_t r = 0; r < 3; ++r)
            for (std::uint32_t c = 0; c < 3; ++c) {
                if (c < 2) g.add_edge(3 * r + c, 3 * r + c + 1, 1);
                if (r < 2) g.add_edge(3 * r + c, 3 * (r + 1) + c, 1);
            }
        out.push_back(g);
    }
    {
        ColoredGraph g(std::vector<std::uint64_t>(9, 0));  // three disjoint triangles
        for (std::uint32_t t = 0; t < 3; ++t)
            for (std::uint32_t i = 0; i < 3; ++i) g.add_edge(3 * t + i, 3 * t + (i + 1) % 3, 1);
        out.push_back(g);
    }
    {
        ColoredGraph g(std::vector<std::uint64_t>{1, 0, 0, 0, 0, 0, 0, 0});  // star, mixed labels
        for (std::uint32_t i = 1; i < 8; ++i) g.add_edge(0, i, 1 + i % 2);
        out.push_back(g);
    }
    {
        ColoredGraph g(std::vector<std::uint64_t>(6, 0));  // directed-looking labeled hexagon
        for (std::uint32_t i = 0; i < 6; ++i) g.add_edge(i, (i + 1) % 6, 1 + i % 2);
        out.push_back(g);
    }
    {
        ColoredGraph g(std::vector<std::uint64_t>(9, 0));  // C6 plus C3: 2-regular, so refinement alone splits nothing
        for (std::uint32_t i = 0; i < 6; ++i) g.add_edge(i, (i + 1) % 6, 1);
        for (std::uint32_t i = 0; i < 3; ++i) g.add_edge(6 + i, 6 + (i + 1) % 3, 1);
        out.push_back(g);
    }
    {
        // Bipartite TILG-like: 4 objects, 4 props with labeled edges.
        ColoredGraph g(std::vector<std::uint64_t>{3, 3, 3, 3, 10, 10, 10, 10});
        for (std::uint32_t i = 0; i < 4; ++i) {
            g.add_edge(i, 4 + i, 1);
            g.add_edge((i + 1) % 4, 4 + i, 2);
        }
        out.push_back(g);
    }
    // recolored variants of structured graphs
    const std::size_t structured = out.size();
    for (std::size_t i = 0; i < structured && out.size() < 25; ++i) {
        auto colors = out[i].colors();
        std::uniform_int_distribution<std::size_t> pick(0, colors.size() - 1);
        colors[pick(rng)] = 5;
        ColoredGraph g(colors);
        for (const auto& e : out[i].sorted_edges()) g.add_edge(e.u, e.v, e.label);
        out.push_back(relabel(g, rng));
    }
    std::uniform_int_distribution<std::size_t> size(2, 9);
    std::uniform_real_distribution<double> dens(0.1, 0.7);
    std::uniform_int_distribution<std::uint32_t> ncol(1, 3), nlab(1, 3);
    while (out.size() < 50) out.push_back(random_graph(rng, size(rng), ncol(rng), nlab(rng), dens(rng)));
    return out;
}

// ---------------------------------------------------------------------------
// Planning oracles
// ---------------------------------------------------------------------------

using namespace symplan;

/// Every type-correct argument tuple, checked literally against the state.
inline std::vector<pddl::GroundAction> brute_applicable(const pddl::LiftedProblem& prob, const pddl::State& s) {
    const auto& dom = prob.dom();
    std::vector<pddl::GroundAction> out;
    auto holds = [&](const pddl::Proposition& p) {
        return std::find(s.begin(), s.end(), p) != s.end() ||
               std::find(prob.static_props.begin(), prob.static_props.end(), p) != prob.static_props.end();
    };
    for (std::uint32_t si = 0; si < dom.schemas.size(); ++si) {
        const auto& schema = dom.schemas[si];
        std::vector<pddl::ObjectId> args(schema.arity(), 0);
        std::function<void(std::size_t)> go = [&](std::size_t k) {
            if (k == args.size()) {
                auto a = pddl::instantiate(prob, si, args);
                if (std::all_of(a.pre.begin(), a.pre.end(), holds)) out.push_back(std::move(a));
                return;
            }
            for (pddl::ObjectId o = 0; o < prob.objects.size(); ++o) {
                if (!dom.is_subtype(prob.objects[o].type, schema.param_types[k])) continue;
                args[k] = o;
                go(k + 1);
            }
        };
        go(0);
    }
    return out;
}

inline pddl::State brute_successor(const pddl::State& s, const pddl::GroundAction& a) {
    std::set<pddl::Proposition> out(s.begin(), s.end());
    for (const auto& p : a.del) out.erase(p);
    for (const auto& p : a.add) out.insert(p);
    return pddl::State(std::vector<pddl::Proposition>(out.begin(), out.end()));
}

struct BfsResult {
    std::optional<std::size_t> length;
    std::size_t reachable = 0;
    bool complete = true;  // false if the state cap was hit
};

/// Breadth-first search over brute-force successors.
inline BfsResult bfs(const pddl::LiftedProblem& prob, std::size_t cap = 100000) {
    BfsResult r;
    std::map<std::vector<pddl::Proposition>, std::size_t> dist;
    std::deque<pddl::State> q;
    auto goal = [&](const pddl::State& s) {
        return std::all_of(prob.goal.begin(), prob.goal.end(), [&](const auto& g) {
            return std::find(s.begin(), s.end(), g) != s.end();
        });
    };
    dist[prob.init.propositions()] = 0;
    q.push_back(prob.init);
    while (!q.empty()) {
        auto s = q.front();
        q.pop_front();
        std::size_t d = dist[s.propositions()];
        if (goal(s) && !r.length) r.length = d;
        for (const auto& a : brute_applicable(prob, s)) {
            auto t = brute_successor(s, a);
            if (dist.count(t.propositions())) continue;
            if (dist.size() >= cap) {
                r.complete = false;
                continue;
            }
            dist[t.propositions()] = d + 1;
            q.push_back(std::move(t));
        }
    }
    r.reachable = dist.size();
    return r;
}

struct LoadedProblem {
    std::string id;
    pddl::LiftedProblem problem;
};

/// Parses every problem of the bundled corpus (written to a temp directory).
inline std::vector<LoadedProblem> corpus() {
    namespace fs = std::filesystem;
    static std::vector<LoadedProblem> cache = [] {
        auto root = fs::temp_directory_path() / "symplan-oracle-corpus";
        auto entries = fixtures::write_corpus(root);
        std::map<std::string, std::shared_ptr<const pddl::DomainModel>> domains;
        std::vector<LoadedProblem> out;
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        for (const auto& e : entries) {
            auto& d = domains[e.domain_file];
            if (!d) d = std::make_shared<const pddl::DomainModel>(pddl::parse_domain(slurp(root / e.domain_file)));
            out.push_back({e.problem_file, pddl::parse_problem(slurp(root / e.problem_file), d)});
        }
        return out;
    }();
    return cache;
}

inline pddl::LiftedProblem load(const std::string& domain_text, const std::string& problem_text) {
    auto d = std::make_shared<const pddl::DomainModel>(pddl::parse_domain(domain_text));
    return pddl::parse_problem(problem_text, d);
}

// ---------------------------------------------------------------------------
// Dense RGCN
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd to_eigen(const gnn::Matrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) e(r, c) = m(r, c);
    return e;
}

/// H' = relu(H Ws^T + sum_l D_l^-1 A_l H Wl^T + 1 b^T); z = 1^T H; y = w.z + c.
inline std::pair<Eigen::VectorXd, double> dense_forward(const gnn::ModelWeights& w, const tilg::TilgGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.size());
    const std::size_t d_in = tilg::status::count + g.num_classes();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d_in));
    for (Eigen::Index v = 0; v < n; ++v) {
        H(v, g.vertices[v].status) = 1.0;
        H(v, tilg::status::count + g.vertices[v].cls) = 1.0;
    }
    std::vector<Eigen::MatrixXd> A(w.meta.max_arity, Eigen::MatrixXd::Zero(n, n));
    for (const auto& e : g.edges) {
        A[e.label - 1](e.object_vertex, e.prop_vertex) += 1.0;
        A[e.label - 1](e.prop_vertex, e.object_vertex) += 1.0;
    }
    for (auto& a : A)
        for (Eigen::Index r = 0; r < n; ++r) {
            double s = a.row(r).sum();
            if (s > 0) a.row(r) /= s;
        }
    for (const auto& L : w.layers) {
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(L.bias.data(), static_cast<Eigen::Index>(L.bias.size()));
        Eigen::MatrixXd out = H * to_eigen(L.self).transpose();
        for (std::size_t l = 0; l < A.size(); ++l) out += A[l] * H * to_eigen(L.relations[l]).transpose();
        out.rowwise() += b.transpose();
        H = out.cwiseMax(0.0);
    }
    Eigen::VectorXd z = H.colwise().sum().transpose();
    if (n == 0) z = Eigen::VectorXd::Zero(w.meta.hidden);
    Eigen::VectorXd hw =
        Eigen::Map<const Eigen::VectorXd>(w.head_weight.data(), static_cast<Eigen::Index>(w.head_weight.size()));
    return {z, hw.dot(z) + w.head_bias};
}

// ---------------------------------------------------------------------------
// Symmetric successor sampling
// ---------------------------------------------------------------------------

struct TripleStats {
    std::size_t triples = 0;
    std::size_t nontrivial = 0;  // sigma moved some argument of the action
    std::size_t image_applicable = 0;
    std::size_t isomorphic = 0;
    std::size_t image_state_equal = 0;  // sigma(s_a) == s_b
};

inline pddl::Proposition map_prop(const pddl::Proposition& p, const Permutation& sigma) {
    pddl::Proposition q{p.predicate, {}};
    for (auto a : p.args) q.args.push_back(sigma[a]);
    return q;
}

/// Samples (state, automorphism, action) triples: a random-walk state s, a
/// random product of orbit generators sigma of TILG(s), and an applicable
/// action a; compares the successors of a and sigma(a).
inline TripleStats sample_triples(const pddl::LiftedProblem& prob, std::mt19937& rng, std::size_t count,
                                  std::size_t max_walk = 12) {
    TripleStats st;
    std::uniform_int_distribution<std::size_t> walk(0, max_walk);
    while (st.triples < count) {
        pddl::State s = prob.init;
        for (std::size_t k = walk(rng); k > 0; --k) {
            auto acts = pddl::applicable_actions(prob, s);
            if (acts.empty()) break;
            s = pddl::apply_unchecked(s, acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)]);
        }
        auto acts = pddl::applicable_actions(prob, s);
        if (acts.empty()) continue;
        auto g = tilg::to_colored_graph(tilg::build_tilg(prob, s));
        auto orbits = symmetry::automorphism_orbits(g, 1'000'000);
        Permutation sigma(g.size());
        for (std::uint32_t v = 0; v < sigma.size(); ++v) sigma[v] = v;
        if (!orbits.generators.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, orbits.generators.size() - 1);
            for (int k = 0; k < 6; ++k) {
                const auto& gen = orbits.generators[pick(rng)];
                Permutation next(sigma.size());
                for (std::size_t v = 0; v < sigma.size(); ++v) next[v] = gen[sigma[v]];
                sigma = std::move(next);
            }
        }
        const auto& a = acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)];
        std::vector<pddl::ObjectId> bargs;
        for (auto o : a.args) bargs.push_back(sigma[o]);
        auto b = pddl::instantiate(prob, a.schema, bargs);
        ++st.triples;
        st.nontrivial += bargs != a.args;
        if (!pddl::is_applicable(prob, s, b)) continue;
        ++st.image_applicable;
        auto sa = brute_successor(s, a), sb = brute_successor(s, b);
        if (symmetry::are_isomorphic(tilg::to_colored_graph(tilg::build_tilg(prob, sa)),
                                     tilg::to_colored_graph(tilg::build_tilg(prob, sb))))
            ++st.isomorphic;
        std::vector<pddl::Proposition> image;
        for (const auto& p : sa) image.push_back(map_prop(p, sigma));
        st.image_state_equal += pddl::State(std::move(image)) == sb;
    }
    return st;
}

/// Pairs fixture: two actions with equal per-argument orbit keys whose
/// successors are not isomorphic. Returns the number of such action pairs.
inline std::size_t relaxation_counterexamples(const pddl::LiftedProblem& prob, const pddl::State& s) {
    auto g = tilg::to_colored_graph(tilg::build_tilg(prob, s));
    auto orbits = symmetry::automorphism_orbits(g, 1'000'000).orbits;
    auto acts = pddl::applicable_actions(prob, s);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < acts.size(); ++i)
        for (std::size_t j = i + 1; j < acts.size(); ++j) {
            if (acts[i].schema != acts[j].schema) continue;
            bool same_key = true;
            for (std::size_t k = 0; k < acts[i].args.size(); ++k)
                same_key = same_key && orbits.orbit_id[acts[i].args[k]] == orbits.orbit_id[acts[j].args[k]];
            if (!same_key) continue;
            auto gi = tilg::to_colored_graph(tilg::build_tilg(prob, brute_successor(s, acts[i])));
            auto gj = tilg::to_colored_graph(tilg::build_tilg(prob, brute_successor(s, acts[j])));
            bad += !symmetry::are_isomorphic(gi, gj);
        }
    return bad;
}

}  // namespace oracle
