#pragma once

// Typed instance learning graph of a planning state: objects and
// propositions as vertices, (status, class) vertex features, edges labeled
// with the 1-based argument position of the object in the proposition.

#include <algorithm>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "symplan/pddl.hpp"
#include "symplan/symmetry.hpp"

namespace symplan::tilg {

enum class VertexKind : std::uint8_t { object, proposition };

namespace status {
inline constexpr std::uint32_t non_goal = 0;
inline constexpr std::uint32_t unachieved_goal = 1;
inline constexpr std::uint32_t achieved_goal = 2;
inline constexpr std::uint32_t object = 3;
inline constexpr std::uint32_t count = 4;
}  // namespace status

struct TilgVertex {
    VertexKind kind = VertexKind::object;
    std::uint32_t status = status::object;
    std::uint32_t cls = 0;              // type index, or |T| + predicate index
    pddl::ObjectId object = 0;          // valid for object vertices
    pddl::Proposition proposition;      // valid for proposition vertices
    friend bool operator==(const TilgVertex&, const TilgVertex&) = default;
};

struct TilgEdge {
    std::uint32_t object_vertex = 0;
    std::uint32_t prop_vertex = 0;
    std::uint32_t label = 0;  // 1-based argument position
    friend auto operator<=>(const TilgEdge&, const TilgEdge&) = default;
};

struct TilgGraph {
    std::vector<TilgVertex> vertices;
    std::vector<TilgEdge> edges;
    std::uint32_t num_types = 0;
    std::uint32_t num_predicates = 0;

    std::size_t size() const { return vertices.size(); }
    std::uint32_t num_classes() const { return num_types + num_predicates; }
    std::uint32_t max_label() const {
        std::uint32_t m = 0;
        for (const auto& e : edges) m = std::max(m, e.label);
        return m;
    }
    friend bool operator==(const TilgGraph&, const TilgGraph&) = default;
};

/// Vertices: objects in id order, then every proposition that is true in
/// the state, static, or a goal, in canonical order.
inline TilgGraph build_tilg(const pddl::LiftedProblem& prob, const pddl::State& state) {
    const auto& dom = prob.dom();
    TilgGraph g;
    g.num_types = static_cast<std::uint32_t>(dom.types.size());
    g.num_predicates = static_cast<std::uint32_t>(dom.predicates.size());

    std::vector<pddl::Proposition> props(state.begin(), state.end());
    props.insert(props.end(), prob.static_props.begin(), prob.static_props.end());
    props.insert(props.end(), prob.goal.begin(), prob.goal.end());
    std::sort(props.begin(), props.end());
    props.erase(std::unique(props.begin(), props.end()), props.end());

    g.vertices.reserve(prob.objects.size() + props.size());
    for (pddl::ObjectId o = 0; o < prob.objects.size(); ++o)
        g.vertices.push_back({VertexKind::object, status::object, prob.objects[o].type, o, {}});

    for (auto& p : props) {
        bool in_goal = std::binary_search(prob.goal.begin(), prob.goal.end(), p);
        bool holds = state.contains(p) ||
                     std::binary_search(prob.static_props.begin(), prob.static_props.end(), p);
        std::uint32_t st = !in_goal ? status::non_goal : holds ? status::achieved_goal : status::unachieved_goal;
        auto v = static_cast<std::uint32_t>(g.vertices.size());
        for (std::size_t i = 0; i < p.args.size(); ++i)
            g.edges.push_back({p.args[i], v, static_cast<std::uint32_t>(i + 1)});
        g.vertices.push_back({VertexKind::proposition, st, g.num_types + p.predicate, 0, std::move(p)});
    }
    return g;
}

/// Returns the vertex-relabeled copy: vertex v moves to position perm[v].
inline TilgGraph permute_vertices(const TilgGraph& g, const std::vector<std::uint32_t>& perm) {
    TilgGraph out;
    out.num_types = g.num_types;
    out.num_predicates = g.num_predicates;
    out.vertices.resize(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) out.vertices[perm[v]] = g.vertices[v];
    for (const auto& e : g.edges) out.edges.push_back({perm[e.object_vertex], perm[e.prop_vertex], e.label});
    return out;
}

/// Checks the bipartite object/proposition structure.
inline bool is_bipartite(const TilgGraph& g) {
    for (const auto& e : g.edges) {
        if (e.object_vertex >= g.size() || e.prop_vertex >= g.size()) return false;
        if (g.vertices[e.object_vertex].kind != VertexKind::object) return false;
        if (g.vertices[e.prop_vertex].kind != VertexKind::proposition) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Integer color packing: color = sum_i 10^beta_i * F_i where beta_1 = 0 and
// beta_i accumulates the decimal digit widths ceil(log10 M_n) of earlier
// features. Each F_i must satisfy F_i < M_i and F_i < 10^width_i.
// ---------------------------------------------------------------------------

class ColorEncodingError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct ColorEncodingSpec {
    std::vector<std::uint64_t> maxima;   // exclusive upper bounds M_i
    std::vector<std::uint32_t> widths;   // ceil(log10 M_i)
    std::vector<std::uint32_t> beta;     // digit offsets

    static ColorEncodingSpec make(std::vector<std::uint64_t> maxima) {
        ColorEncodingSpec s;
        std::uint32_t offset = 0;
        for (auto m : maxima) {
            if (m == 0) throw std::invalid_argument("feature maximum must be positive");
            std::uint32_t w = 0;
            for (std::uint64_t p = 1; p < m; p *= 10) ++w;  // smallest w with 10^w >= m
            s.beta.push_back(offset);
            s.widths.push_back(w);
            offset += w;
        }
        if (offset > 19) throw std::invalid_argument("packed color exceeds 64 bits");
        s.maxima = std::move(maxima);
        return s;
    }

    std::size_t feature_count() const { return maxima.size(); }
};

inline std::uint64_t pow10(std::uint32_t e) {
    std::uint64_t p = 1;
    while (e--) p *= 10;
    return p;
}

inline std::uint64_t encode_features(const ColorEncodingSpec& spec, std::span<const std::uint64_t> features) {
    if (features.size() != spec.feature_count()) throw std::invalid_argument("feature count mismatch");
    std::uint64_t color = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i] >= spec.maxima[i] || features[i] >= pow10(spec.widths[i]))
            throw ColorEncodingError("feature " + std::to_string(i + 1) + " value " + std::to_string(features[i]) +
                                     " out of range");
        color += pow10(spec.beta[i]) * features[i];
    }
    return color;
}

/// Feature order is (status, class).
inline ColorEncodingSpec default_color_spec(const TilgGraph& g) {
    return ColorEncodingSpec::make({status::count, std::max<std::uint64_t>(1, g.num_classes())});
}

inline std::vector<std::uint64_t> encode_vertex_colors(const TilgGraph& g, const ColorEncodingSpec& spec) {
    std::vector<std::uint64_t> colors;
    colors.reserve(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        const std::uint64_t f[2] = {g.vertices[v].status, g.vertices[v].cls};
        try {
            colors.push_back(encode_features(spec, f));
        } catch (const ColorEncodingError& e) {
            throw ColorEncodingError("vertex " + std::to_string(v) + ": " + e.what());
        }
    }
    return colors;
}

inline std::vector<std::uint64_t> encode_vertex_colors(const TilgGraph& g) {
    return encode_vertex_colors(g, default_color_spec(g));
}

inline symmetry::ColoredGraph to_colored_graph(const TilgGraph& g) {
    symmetry::ColoredGraph cg(encode_vertex_colors(g));
    for (const auto& e : g.edges) cg.add_edge(e.object_vertex, e.prop_vertex, e.label);
    return cg;
}

/// Stable little-endian serialization: u32 vertex count, u32 edge count,
/// u64 color per vertex, then (u32 object vertex, u32 proposition vertex,
/// u32 label) per edge in sorted order.
inline std::vector<std::uint8_t> canonical_bytes(const TilgGraph& g) {
    std::vector<std::uint8_t> out;
    auto put = [&](std::uint64_t x, int bytes) {
        for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    };
    put(g.size(), 4);
    put(g.edges.size(), 4);
    for (auto c : encode_vertex_colors(g)) put(c, 8);
    auto edges = g.edges;
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) {
        put(e.object_vertex, 4);
        put(e.prop_vertex, 4);
        put(e.label, 4);
    }
    return out;
}

inline std::string to_debug_text(const TilgGraph& g) { return symmetry::to_graph_text(to_colored_graph(g)); }

}  // namespace symplan::tilg
