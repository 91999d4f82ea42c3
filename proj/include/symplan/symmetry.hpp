#pragma once

// Automorphism orbits and canonical forms of vertex- and edge-colored
// undirected graphs by individualization-refinement.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace symplan::symmetry {

using Vertex = std::uint32_t;
using Permutation = std::vector<Vertex>;
using Coloring = std::vector<std::uint32_t>;

struct Neighbor {
    Vertex vertex;
    std::uint32_t label;
    friend auto operator<=>(const Neighbor&, const Neighbor&) = default;
};

struct Edge {
    Vertex u;
    Vertex v;
    std::uint32_t label;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected multigraph with integer vertex colors and edge labels.
/// Adjacency lists are kept sorted.
class ColoredGraph {
public:
    ColoredGraph() = default;
    explicit ColoredGraph(std::vector<std::uint64_t> colors)
        : colors_(std::move(colors)), adjacency_(colors_.size()) {}

    void add_edge(Vertex u, Vertex v, std::uint32_t label) {
        if (u >= size() || v >= size()) throw std::out_of_range("edge endpoint out of range");
        insert_sorted(adjacency_[u], {v, label});
        if (u != v) insert_sorted(adjacency_[v], {u, label});
        edges_.push_back({std::min(u, v), std::max(u, v), label});
    }

    std::size_t size() const noexcept { return colors_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<std::uint64_t>& colors() const noexcept { return colors_; }
    std::uint64_t color(Vertex v) const { return colors_[v]; }
    const std::vector<Neighbor>& neighbors(Vertex v) const { return adjacency_[v]; }

    std::vector<Edge> sorted_edges() const {
        auto e = edges_;
        std::sort(e.begin(), e.end());
        return e;
    }

    /// Relabels vertex v as perm[v].
    ColoredGraph permuted(const Permutation& perm) const {
        std::vector<std::uint64_t> c(size());
        for (Vertex v = 0; v < size(); ++v) c[perm[v]] = colors_[v];
        ColoredGraph g(std::move(c));
        for (const auto& e : edges_) g.add_edge(perm[e.u], perm[e.v], e.label);
        return g;
    }

private:
    static void insert_sorted(std::vector<Neighbor>& list, Neighbor n) {
        list.insert(std::upper_bound(list.begin(), list.end(), n), n);
    }

    std::vector<std::uint64_t> colors_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// Text format:  `graph <n> <m>`, then n lines `<id> <color>` with ids 0..n-1
// in order, then m lines `<u> <v> <label>` with u <= v in sorted order.
// ---------------------------------------------------------------------------

inline void write_graph_text(std::ostream& os, const ColoredGraph& g) {
    os << "graph " << g.size() << ' ' << g.edge_count() << '\n';
    for (Vertex v = 0; v < g.size(); ++v) os << v << ' ' << g.color(v) << '\n';
    for (const auto& e : g.sorted_edges()) os << e.u << ' ' << e.v << ' ' << e.label << '\n';
}

inline std::string to_graph_text(const ColoredGraph& g) {
    std::ostringstream os;
    write_graph_text(os, g);
    return os.str();
}

inline ColoredGraph read_graph_text(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> std::istringstream {
        if (!std::getline(is, line))
            throw std::runtime_error("graph text: unexpected end of input after line " + std::to_string(line_no));
        ++line_no;
        return std::istringstream(line);
    };
    auto bad = [&]() { return std::runtime_error("graph text: malformed line " + std::to_string(line_no)); };
    std::string tag;
    std::size_t n = 0, m = 0;
    {
        auto ls = next();
        if (!(ls >> tag >> n >> m) || tag != "graph") throw bad();
    }
    std::vector<std::uint64_t> colors(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto ls = next();
        std::size_t id;
        if (!(ls >> id >> colors[i]) || id != i) throw bad();
    }
    ColoredGraph g(std::move(colors));
    for (std::size_t i = 0; i < m; ++i) {
        auto ls = next();
        std::size_t u, v;
        std::uint32_t label;
        if (!(ls >> u >> v >> label) || u >= n || v >= n) throw bad();
        g.add_edge(static_cast<Vertex>(u), static_cast<Vertex>(v), label);
    }
    return g;
}

inline ColoredGraph from_graph_text(const std::string& text) {
    std::istringstream is(text);
    return read_graph_text(is);
}

// ---------------------------------------------------------------------------
// Color refinement
// ---------------------------------------------------------------------------

struct RefinedColoring {
    Coloring cells;               // dense cell labels, canonically numbered
    std::uint32_t num_cells = 0;
    std::uint64_t trace = 0;      // isomorphism-invariant summary of the refinement
    bool discrete() const { return num_cells == cells.size(); }
};

namespace detail {

inline std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    return h ^ x;
}

/// Replaces arbitrary comparable values by their dense rank.
template <typename T>
std::uint32_t dense_rank(const std::vector<T>& values, Coloring& out) {
    std::vector<std::uint32_t> order(values.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    out.assign(values.size(), 0);
    std::uint32_t rank = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && values[order[i - 1]] < values[order[i]]) ++rank;
        out[order[i]] = rank;
    }
    return values.empty() ? 0 : rank + 1;
}

}  // namespace detail

/// Coarsest equitable refinement of `initial`: vertices end in the same cell
/// iff they agree on their cell and on the multiset of (neighbor cell, edge
/// label). Cell numbering depends only on signatures, so it commutes with
/// graph isomorphisms. `max_rounds` = 0 runs to stability.
inline RefinedColoring refine(const ColoredGraph& g, const Coloring& initial, std::size_t max_rounds = 0) {
    const std::size_t n = g.size();
    RefinedColoring r;
    r.num_cells = detail::dense_rank(initial, r.cells);
    r.trace = detail::mix(n, r.num_cells);
    std::vector<std::uint64_t> flat;
    std::vector<std::size_t> offset(n + 1);
    std::vector<std::uint32_t> order(n);
    for (std::size_t round = 0; max_rounds == 0 || round < max_rounds; ++round) {
        flat.clear();
        for (Vertex v = 0; v < n; ++v) {
            offset[v] = flat.size();
            flat.push_back(r.cells[v]);
            std::size_t start = flat.size();
            for (const auto& nb : g.neighbors(v))
                flat.push_back((static_cast<std::uint64_t>(r.cells[nb.vertex]) << 32) | nb.label);
            std::sort(flat.begin() + static_cast<long>(start), flat.end());
        }
        offset[n] = flat.size();
        auto sig_less = [&](std::uint32_t a, std::uint32_t b) {
            return std::lexicographical_compare(flat.begin() + static_cast<long>(offset[a]),
                                                flat.begin() + static_cast<long>(offset[a + 1]),
                                                flat.begin() + static_cast<long>(offset[b]),
                                                flat.begin() + static_cast<long>(offset[b + 1]));
        };
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), sig_less);
        Coloring next(n);
        std::uint32_t rank = 0;
        std::uint64_t trace = r.trace;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && sig_less(order[i - 1], order[i])) {
                ++rank;
            }
            if (i == 0 || sig_less(order[i - 1], order[i])) {
                for (std::size_t k = offset[order[i]]; k < offset[order[i] + 1]; ++k)
                    trace = detail::mix(trace, flat[k]);
            }
            next[order[i]] = rank;
        }
        std::uint32_t count = n == 0 ? 0 : rank + 1;
        bool stable = count == r.num_cells;
        r.cells = std::move(next);
        r.trace = detail::mix(trace, count);
        r.num_cells = count;
        if (stable) break;
    }
    return r;
}

inline Coloring initial_coloring(const ColoredGraph& g) {
    Coloring c;
    detail::dense_rank(g.colors(), c);
    return c;
}

/// Stable partition of the graph's own vertex colors.
inline RefinedColoring color_refinement(const ColoredGraph& g) { return refine(g, initial_coloring(g)); }

/// Hash-based refinement whose colors are comparable across graphs.
inline std::vector<std::uint64_t> refine_hashed(const ColoredGraph& g, std::size_t rounds) {
    std::vector<std::uint64_t> c = g.colors();
    std::vector<std::uint64_t> sig;
    for (std::size_t round = 0; round < rounds; ++round) {
        std::vector<std::uint64_t> next(g.size());
        for (Vertex v = 0; v < g.size(); ++v) {
            sig.clear();
            for (const auto& nb : g.neighbors(v)) sig.push_back(detail::mix(c[nb.vertex], nb.label));
            std::sort(sig.begin(), sig.end());
            std::uint64_t h = detail::mix(0x51afd7ed558ccd00ULL, c[v]);
            for (auto s : sig) h = detail::mix(h, s);
            next[v] = h;
        }
        c = std::move(next);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Automorphisms
// ---------------------------------------------------------------------------

inline bool is_automorphism(const ColoredGraph& g, const Permutation& perm) {
    const std::size_t n = g.size();
    if (perm.size() != n) return false;
    std::vector<bool> hit(n, false);
    for (Vertex v = 0; v < n; ++v) {
        if (perm[v] >= n || hit[perm[v]]) return false;
        hit[perm[v]] = true;
    }
    std::vector<Neighbor> mapped;
    for (Vertex v = 0; v < n; ++v) {
        if (g.color(perm[v]) != g.color(v)) return false;
        const auto& adj = g.neighbors(v);
        mapped.clear();
        for (const auto& nb : adj) mapped.push_back({perm[nb.vertex], nb.label});
        std::sort(mapped.begin(), mapped.end());
        if (mapped != g.neighbors(perm[v])) return false;
    }
    return true;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
    Vertex find(Vertex x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(Vertex a, Vertex b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
        return true;
    }
    bool same(Vertex a, Vertex b) { return find(a) == find(b); }
    void add_permutation(const Permutation& p) {
        for (Vertex v = 0; v < p.size(); ++v) unite(v, p[v]);
    }

private:
    std::vector<Vertex> parent_;
};

struct OrbitPartition {
    std::vector<std::uint32_t> orbit_id;  // dense, numbered by first vertex
    std::uint32_t num_orbits = 0;
    bool same_orbit(Vertex a, Vertex b) const { return orbit_id[a] == orbit_id[b]; }
};

struct OrbitResult {
    OrbitPartition orbits;
    bool exact = true;
    std::vector<Permutation> generators;
    std::size_t nodes = 0;
};

inline constexpr std::size_t kDefaultOrbitBudget = 10'000;

namespace detail {

inline Coloring individualize(const Coloring& cells, Vertex v) {
    Coloring c(cells.size());
    for (Vertex u = 0; u < cells.size(); ++u) c[u] = 2 * cells[u] + (u == v ? 0 : 1);
    return c;
}

/// First smallest non-singleton cell (by cell label); members ascending.
inline std::vector<Vertex> target_cell(const RefinedColoring& r) {
    std::vector<std::uint32_t> size(r.num_cells, 0);
    for (auto c : r.cells) ++size[c];
    std::uint32_t best = r.num_cells;
    for (std::uint32_t c = 0; c < r.num_cells; ++c)
        if (size[c] > 1 && (best == r.num_cells || size[c] < size[best])) best = c;
    std::vector<Vertex> members;
    for (Vertex v = 0; v < r.cells.size(); ++v)
        if (r.cells[v] == best) members.push_back(v);
    return members;
}

inline OrbitPartition orbits_from(UnionFind& uf, std::size_t n) {
    OrbitPartition p;
    p.orbit_id.assign(n, 0);
    std::vector<std::uint32_t> id_of_root(n, UINT32_MAX);
    for (Vertex v = 0; v < n; ++v) {
        Vertex r = uf.find(v);
        if (id_of_root[r] == UINT32_MAX) id_of_root[r] = p.num_orbits++;
        p.orbit_id[v] = id_of_root[r];
    }
    return p;
}

struct BudgetExceeded {};

class OrbitSearch {
public:
    OrbitSearch(const ColoredGraph& g, std::size_t budget) : g_(g), budget_(budget) {}

    OrbitResult run() {
        OrbitResult result;
        const std::size_t n = g_.size();
        UnionFind uf(n);
        try {
            RefinedColoring node = refine(g_, initial_coloring(g_));
            count();
            while (!node.discrete()) {
                Level lvl{node, target_cell(node), 0};
                lvl.chosen = lvl.cell.front();
                path_.push_back(lvl);
                node = refine(g_, individualize(node.cells, lvl.chosen));
                count();
            }
            leaf_ = node;
            for (std::size_t i = path_.size(); i-- > 0;) {
                const Level& lvl = path_[i];
                for (Vertex w : lvl.cell) {
                    if (w == lvl.chosen || uf.same(w, lvl.chosen)) continue;
                    if (auto gen = search(individualize(lvl.node.cells, w), i + 1)) {
                        uf.add_permutation(*gen);
                        result.generators.push_back(std::move(*gen));
                    }
                }
            }
        } catch (const BudgetExceeded&) {
            result.exact = false;
        }
        result.orbits = orbits_from(uf, n);
        result.nodes = nodes_;
        return result;
    }

private:
    struct Level {
        RefinedColoring node;
        std::vector<Vertex> cell;
        Vertex chosen;
    };

    void count() {
        if (++nodes_ > budget_) throw BudgetExceeded{};
    }

    const RefinedColoring& reference(std::size_t depth) const {
        return depth < path_.size() ? path_[depth].node : leaf_;
    }

    // Looks for a leaf below `cells` whose labeling maps the first leaf
    // onto it by an automorphism.
    std::optional<Permutation> search(const Coloring& cells, std::size_t depth) {
        count();
        RefinedColoring node = refine(g_, cells);
        const RefinedColoring& ref = reference(depth);
        if (node.num_cells != ref.num_cells || node.trace != ref.trace) return std::nullopt;
        if (node.discrete()) {
            if (depth != path_.size()) return std::nullopt;
            std::vector<Vertex> at_label(node.cells.size());
            for (Vertex v = 0; v < node.cells.size(); ++v) at_label[node.cells[v]] = v;
            Permutation gamma(node.cells.size());
            for (Vertex v = 0; v < gamma.size(); ++v) gamma[v] = at_label[leaf_.cells[v]];
            if (is_automorphism(g_, gamma)) return gamma;
            return std::nullopt;
        }
        for (Vertex x : target_cell(node))
            if (auto found = search(individualize(node.cells, x), depth + 1)) return found;
        return std::nullopt;
    }

    const ColoredGraph& g_;
    std::size_t budget_;
    std::size_t nodes_ = 0;
    std::vector<Level> path_;
    RefinedColoring leaf_;
};

}  // namespace detail

/// Orbits of the automorphism group. If the node budget is hit the result
/// is a sub-partition of the true orbits (every merge is backed by a verified
/// automorphism) and `exact` is false.
inline OrbitResult automorphism_orbits(const ColoredGraph& g, std::size_t budget = kDefaultOrbitBudget) {
    if (budget == 0) throw std::invalid_argument("orbit budget must be positive");
    return detail::OrbitSearch(g, budget).run();
}

// ---------------------------------------------------------------------------
// Canonical form and isomorphism
// ---------------------------------------------------------------------------

struct CanonicalForm {
    Permutation labeling;                  // vertex -> canonical position
    std::vector<std::uint64_t> certificate;
    bool exact = true;
};

namespace detail {

inline std::vector<std::uint64_t> certificate(const ColoredGraph& g, const Coloring& lab) {
    const std::size_t n = g.size();
    std::vector<std::uint64_t> cert;
    cert.reserve(1 + n + 3 * g.edge_count());
    cert.push_back(n);
    std::vector<std::uint64_t> by_pos(n);
    for (Vertex v = 0; v < n; ++v) by_pos[lab[v]] = g.color(v);
    cert.insert(cert.end(), by_pos.begin(), by_pos.end());
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> es;
    for (const auto& e : g.sorted_edges()) {
        auto a = lab[e.u], b = lab[e.v];
        es.emplace_back(std::min(a, b), std::max(a, b), e.label);
    }
    std::sort(es.begin(), es.end());
    for (auto [a, b, l] : es) {
        cert.push_back(a);
        cert.push_back(b);
        cert.push_back(l);
    }
    return cert;
}

class CanonicalSearch {
public:
    CanonicalSearch(const ColoredGraph& g, std::vector<Permutation> gens, std::size_t budget)
        : g_(g), gens_(std::move(gens)), budget_(budget) {}

    CanonicalForm run() {
        CanonicalForm out;
        std::vector<Vertex> prefix;
        try {
            dfs(initial_coloring(g_), prefix);
        } catch (const BudgetExceeded&) {
            out.exact = false;
        }
        out.labeling = best_lab_;
        out.certificate = best_;
        return out;
    }

private:
    void dfs(const Coloring& cells, std::vector<Vertex>& prefix) {
        if (++nodes_ > budget_) throw BudgetExceeded{};
        RefinedColoring node = refine(g_, cells);
        if (node.discrete()) {
            auto cert = certificate(g_, node.cells);
            if (!have_best_ || cert < best_) {
                best_ = std::move(cert);
                best_lab_ = node.cells;
                have_best_ = true;
            }
            return;
        }
        UnionFind uf(g_.size());
        for (const auto& p : gens_) {
            bool fixes = std::all_of(prefix.begin(), prefix.end(), [&](Vertex v) { return p[v] == v; });
            if (fixes) uf.add_permutation(p);
        }
        std::vector<Vertex> explored;
        for (Vertex x : target_cell(node)) {
            if (std::any_of(explored.begin(), explored.end(), [&](Vertex y) { return uf.same(x, y); })) continue;
            explored.push_back(x);
            prefix.push_back(x);
            dfs(individualize(node.cells, x), prefix);
            prefix.pop_back();
        }
    }

    const ColoredGraph& g_;
    std::vector<Permutation> gens_;
    std::size_t budget_;
    std::size_t nodes_ = 0;
    bool have_best_ = false;
    std::vector<std::uint64_t> best_;
    Coloring best_lab_;
};

}  // namespace detail

inline constexpr std::size_t kDefaultCanonicalBudget = 1'000'000;

/// Best-leaf canonical form; equal certificates iff isomorphic (when exact).
inline CanonicalForm canonical_form(const ColoredGraph& g, std::size_t budget = kDefaultCanonicalBudget) {
    OrbitResult orbits = automorphism_orbits(g, budget);
    CanonicalForm f = detail::CanonicalSearch(g, std::move(orbits.generators), budget).run();
    f.exact = f.exact && orbits.exact;
    if (g.size() == 0) f.certificate = {0};
    return f;
}

inline bool are_isomorphic(const ColoredGraph& a, const ColoredGraph& b,
                           std::size_t budget = kDefaultCanonicalBudget) {
    if (a.size() != b.size() || a.edge_count() != b.edge_count()) return false;
    auto ca = a.colors(), cb = b.colors();
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    if (ca != cb) return false;
    auto ea = a.sorted_edges(), eb = b.sorted_edges();
    std::vector<std::uint32_t> la, lb;
    for (const auto& e : ea) la.push_back(e.label);
    for (const auto& e : eb) lb.push_back(e.label);
    std::sort(la.begin(), la.end());
    std::sort(lb.begin(), lb.end());
    if (la != lb) return false;
    if (color_refinement(a).trace != color_refinement(b).trace) return false;
    CanonicalForm fa = canonical_form(a, budget);
    CanonicalForm fb = canonical_form(b, budget);
    if (!fa.exact || !fb.exact) throw std::runtime_error("canonical form search exceeded its budget");
    return fa.certificate == fb.certificate;
}

}  // namespace symplan::symmetry
