#pragma once

// Permutation-invariant graph encoders over TILGs: an RGCN forward pass on
// loadable weights, and a training-free Weisfeiler-Lehman embedding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "symplan/pddl.hpp"
#include "symplan/symmetry.hpp"
#include "symplan/tilg.hpp"

namespace symplan::gnn {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Rows: 4 one-hot status bits, then one-hot class over types and predicates.
inline Matrix featurize(const tilg::TilgGraph& g) {
    const std::size_t d_in = tilg::status::count + g.num_classes();
    Matrix x(g.size(), d_in);
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& vx = g.vertices[v];
        if (vx.status >= tilg::status::count) throw ModelError("vertex " + std::to_string(v) + " has invalid status");
        if (vx.cls >= g.num_classes())
            throw ModelError("vertex " + std::to_string(v) + " class index " + std::to_string(vx.cls) + " out of range");
        x(v, vx.status) = 1.0;
        x(v, tilg::status::count + vx.cls) = 1.0;
    }
    return x;
}

struct ModelMetadata {
    int format_version = 1;
    std::string domain;
    std::uint32_t num_types = 0;
    std::uint32_t num_predicates = 0;
    std::uint32_t d_in = 0;
    std::uint32_t max_arity = 0;
    std::uint32_t hidden = 64;
    std::string normalization = "mean";
    std::string activation = "relu";
    std::string pooling = "add";
};

struct RgcnLayer {
    Matrix self;                   // out x in
    std::vector<Matrix> relations; // relation r = edge label r+1, each out x in
    std::vector<double> bias;      // out
};

struct ModelWeights {
    ModelMetadata meta;
    std::vector<RgcnLayer> layers;
    std::vector<double> head_weight;  // hidden
    double head_bias = 0.0;

    std::size_t num_layers() const { return layers.size(); }

    void validate() const {
        if (meta.format_version != 1) throw ModelError("unsupported weight format version " + std::to_string(meta.format_version));
        if (meta.normalization != "mean" || meta.activation != "relu" || meta.pooling != "add")
            throw ModelError("unsupported layer conventions in weight metadata");
        if (meta.d_in != tilg::status::count + meta.num_types + meta.num_predicates)
            throw ModelError("metadata d_in does not match 4 + types + predicates");
        if (layers.empty()) throw ModelError("model has no layers");
        std::size_t in = meta.d_in;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& L = layers[l];
            auto where = "layer " + std::to_string(l);
            if (L.self.rows != meta.hidden || L.self.cols != in || L.self.data.size() != L.self.rows * L.self.cols)
                throw ModelError(where + ": self matrix has wrong shape");
            if (L.relations.size() != meta.max_arity) throw ModelError(where + ": relation count differs from max_arity");
            for (const auto& R : L.relations)
                if (R.rows != meta.hidden || R.cols != in || R.data.size() != R.rows * R.cols)
                    throw ModelError(where + ": relation matrix has wrong shape");
            if (L.bias.size() != meta.hidden) throw ModelError(where + ": bias has wrong length");
            auto finite = [](const std::vector<double>& v) {
                return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
            };
            if (!finite(L.self.data) || !finite(L.bias) ||
                !std::all_of(L.relations.begin(), L.relations.end(), [&](const Matrix& m) { return finite(m.data); }))
                throw ModelError(where + ": non-finite weight");
            in = meta.hidden;
        }
        if (head_weight.size() != meta.hidden) throw ModelError("head: weight has wrong length");
        if (!std::isfinite(head_bias) ||
            !std::all_of(head_weight.begin(), head_weight.end(), [](double x) { return std::isfinite(x); }))
            throw ModelError("head: non-finite weight");
    }

    /// Refuses weights trained for a different domain signature.
    void check_compatible(const pddl::LiftedProblem& prob) const {
        const auto& dom = prob.dom();
        if (meta.domain != dom.name)
            throw ModelError("weights are for domain '" + meta.domain + "', problem uses '" + dom.name + "'");
        if (meta.num_types != dom.types.size() || meta.num_predicates != dom.predicates.size())
            throw ModelError("weight metadata does not match the domain's types/predicates");
        std::size_t arity = 0;
        for (const auto& p : dom.predicates) arity = std::max(arity, p.arity());
        if (meta.max_arity < arity) throw ModelError("weights support fewer relations than the domain's max arity");
    }
};

// ---------------------------------------------------------------------------
// Weight file (JSON)
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw ModelError("matrix data length does not match its shape");
    return m;
}

inline nlohmann::json to_json(const ModelWeights& w) {
    nlohmann::json meta = {{"domain", w.meta.domain},       {"num_types", w.meta.num_types},
                           {"num_predicates", w.meta.num_predicates}, {"d_in", w.meta.d_in},
                           {"max_arity", w.meta.max_arity}, {"hidden", w.meta.hidden},
                           {"num_layers", w.layers.size()}, {"normalization", w.meta.normalization},
                           {"activation", w.meta.activation}, {"pooling", w.meta.pooling}};
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& L : w.layers) {
        nlohmann::json rel = nlohmann::json::array();
        for (const auto& R : L.relations) rel.push_back(to_json(R));
        layers.push_back({{"self", to_json(L.self)}, {"relations", rel}, {"bias", L.bias}});
    }
    return {{"format_version", w.meta.format_version},
            {"metadata", meta},
            {"layers", layers},
            {"head", {{"weight", w.head_weight}, {"bias", w.head_bias}}}};
}

inline ModelWeights weights_from_json(const nlohmann::json& j) {
    ModelWeights w;
    try {
        w.meta.format_version = j.at("format_version").get<int>();
        if (w.meta.format_version != 1)
            throw ModelError("unsupported weight format version " + std::to_string(w.meta.format_version));
        const auto& m = j.at("metadata");
        w.meta.domain = m.at("domain").get<std::string>();
        w.meta.num_types = m.at("num_types").get<std::uint32_t>();
        w.meta.num_predicates = m.at("num_predicates").get<std::uint32_t>();
        w.meta.d_in = m.at("d_in").get<std::uint32_t>();
        w.meta.max_arity = m.at("max_arity").get<std::uint32_t>();
        w.meta.hidden = m.at("hidden").get<std::uint32_t>();
        w.meta.normalization = m.value("normalization", "mean");
        w.meta.activation = m.value("activation", "relu");
        w.meta.pooling = m.value("pooling", "add");
        for (const auto& L : j.at("layers")) {
            RgcnLayer layer;
            layer.self = matrix_from_json(L.at("self"));
            for (const auto& R : L.at("relations")) layer.relations.push_back(matrix_from_json(R));
            layer.bias = L.at("bias").get<std::vector<double>>();
            w.layers.push_back(std::move(layer));
        }
        if (m.contains("num_layers") && m.at("num_layers").get<std::size_t>() != w.layers.size())
            throw ModelError("metadata num_layers does not match the layer list");
        w.head_weight = j.at("head").at("weight").get<std::vector<double>>();
        w.head_bias = j.at("head").at("bias").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed weight file: ") + e.what());
    }
    w.validate();
    return w;
}

inline ModelWeights load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open weight file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("weight file " + path + " is not valid JSON: " + e.what());
    }
    return weights_from_json(j);
}

inline void save_weights(const ModelWeights& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write weight file " + path);
    out << to_json(w).dump(1) << '\n';
}

/// Per-domain RGCN depth; deeper models for domains whose relevant
/// information is far apart in the graph.
inline std::size_t default_layer_count(const std::string& domain) {
    if (domain == "sokoban") return 7;
    if (domain == "spanner" || domain == "logistics" || domain == "tyreworld") return 4;
    return 3;
}

inline ModelMetadata metadata_for(const pddl::DomainModel& dom, std::uint32_t hidden = 64) {
    ModelMetadata m;
    m.domain = dom.name;
    m.num_types = static_cast<std::uint32_t>(dom.types.size());
    m.num_predicates = static_cast<std::uint32_t>(dom.predicates.size());
    m.d_in = tilg::status::count + m.num_types + m.num_predicates;
    for (const auto& p : dom.predicates) m.max_arity = std::max<std::uint32_t>(m.max_arity, p.arity());
    m.hidden = hidden;
    return m;
}

/// Scaled-normal initialization, deterministic for a given seed.
inline ModelWeights random_weights(const ModelMetadata& meta, std::size_t layers, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModelWeights w;
    w.meta = meta;
    std::size_t in = meta.d_in;
    auto fill = [&](Matrix& m, std::size_t rows, std::size_t cols) {
        m = Matrix(rows, cols);
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
        for (auto& x : m.data) x = dist(rng);
    };
    for (std::size_t l = 0; l < layers; ++l) {
        RgcnLayer L;
        fill(L.self, meta.hidden, in);
        L.relations.resize(meta.max_arity);
        for (auto& R : L.relations) fill(R, meta.hidden, in);
        L.bias.assign(meta.hidden, 0.0);
        w.layers.push_back(std::move(L));
        in = meta.hidden;
    }
    std::normal_distribution<double> head(0.0, 1.0 / std::sqrt(static_cast<double>(meta.hidden)));
    for (std::size_t i = 0; i < meta.hidden; ++i) w.head_weight.push_back(head(rng));
    w.validate();
    return w;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

struct ForwardResult {
    std::vector<double> embedding;  // pooled output of the last RGCN layer
    double heuristic = 0.0;
};

namespace detail {

// Sums rows in lexicographic order of their values. The order depends only
// on the multiset of rows, so results are bitwise permutation invariant.
inline void sum_rows_sorted(const Matrix& h, std::vector<std::uint32_t>& rows, std::vector<double>& acc) {
    std::sort(rows.begin(), rows.end(), [&](auto a, auto b) {
        auto ra = h.row(a), rb = h.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    acc.assign(h.cols, 0.0);
    for (auto r : rows) {
        auto x = h.row(r);
        for (std::size_t k = 0; k < h.cols; ++k) acc[k] += x[k];
    }
}

inline void gemv_add(const Matrix& w, std::span<const double> x, std::span<double> out) {
    for (std::size_t r = 0; r < w.rows; ++r) {
        double s = 0.0;
        const double* wr = w.data.data() + r * w.cols;
        for (std::size_t c = 0; c < w.cols; ++c) s += wr[c] * x[c];
        out[r] += s;
    }
}

}  // namespace detail

/// h'(v) = relu(W_self h(v) + sum_l mean_{u in N_l(v)} W_l h(u) + b) per
/// layer, then sum pooling over vertices and a linear head.
inline ForwardResult forward(const ModelWeights& w, const tilg::TilgGraph& g) {
    Matrix h = featurize(g);
    if (h.cols != w.meta.d_in)
        throw ModelError("layer 0: input width " + std::to_string(h.cols) + " does not match d_in " +
                         std::to_string(w.meta.d_in));
    const std::size_t n = g.size();
    const std::size_t arity = w.meta.max_arity;
    // neighbors[v][label-1]
    std::vector<std::vector<std::vector<std::uint32_t>>> nb(n, std::vector<std::vector<std::uint32_t>>(arity));
    for (const auto& e : g.edges) {
        if (e.label == 0 || e.label > arity)
            throw ModelError("edge label " + std::to_string(e.label) + " exceeds the model's relation count");
        nb[e.object_vertex][e.label - 1].push_back(e.prop_vertex);
        nb[e.prop_vertex][e.label - 1].push_back(e.object_vertex);
    }
    std::vector<std::uint32_t> rows;
    std::vector<double> agg;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& L = w.layers[l];
        if (L.self.cols != h.cols) throw ModelError("layer " + std::to_string(l) + ": input width mismatch");
        Matrix out(n, L.self.rows);
        for (std::size_t v = 0; v < n; ++v) {
            auto o = out.row(v);
            std::copy(L.bias.begin(), L.bias.end(), o.begin());
            detail::gemv_add(L.self, h.row(v), o);
            for (std::size_t r = 0; r < arity; ++r) {
                if (nb[v][r].empty()) continue;
                rows = nb[v][r];
                detail::sum_rows_sorted(h, rows, agg);
                const double k = static_cast<double>(rows.size());
                for (auto& x : agg) x /= k;
                detail::gemv_add(L.relations[r], agg, o);
            }
            for (auto& x : o) x = std::max(0.0, x);
        }
        h = std::move(out);
    }
    ForwardResult res;
    rows.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) rows[v] = v;
    detail::sum_rows_sorted(h, rows, res.embedding);
    if (n == 0) res.embedding.assign(w.meta.hidden, 0.0);
    double y = w.head_bias;
    for (std::size_t k = 0; k < res.embedding.size(); ++k) y += w.head_weight[k] * res.embedding[k];
    res.heuristic = y;
    return res;
}

// ---------------------------------------------------------------------------
// WL embedding
// ---------------------------------------------------------------------------

inline constexpr std::size_t kWlEmbeddingSize = 64;
inline constexpr std::size_t kDefaultWlRounds = 4;

/// Fixed-length integer vector: [vertex count, edge count, hash of the
/// sorted final color multiset, then bucket counts of final colors].
inline std::vector<std::int64_t> wl_embedding(const tilg::TilgGraph& g, std::size_t rounds = kDefaultWlRounds) {
    if (rounds == 0) throw std::invalid_argument("wl_embedding needs at least one round");
    auto colors = symmetry::refine_hashed(tilg::to_colored_graph(g), rounds);
    std::sort(colors.begin(), colors.end());
    std::vector<std::int64_t> out(kWlEmbeddingSize, 0);
    out[0] = static_cast<std::int64_t>(g.size());
    out[1] = static_cast<std::int64_t>(g.edges.size());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto c : colors) h = symmetry::detail::mix(h, c);
    out[2] = static_cast<std::int64_t>(h);
    constexpr std::size_t buckets = kWlEmbeddingSize - 3;
    for (auto c : colors) ++out[3 + c % buckets];
    return out;
}

}  // namespace symplan::gnn
