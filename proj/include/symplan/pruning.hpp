#pragma once

// Orbit-keyed action pruning and digest-keyed state pruning.

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iomanip>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "symplan/pddl.hpp"
#include "symplan/symmetry.hpp"
#include "symplan/tilg.hpp"

namespace symplan::pruning {

struct PruneStats {
    std::size_t actions_seen = 0;
    std::size_t actions_pruned = 0;
    std::size_t states_seen = 0;
    std::size_t states_pruned = 0;
    std::size_t inexact_orbit_states = 0;
    double orbit_seconds = 0;
    double embed_seconds = 0;
};

struct ActionOrbitKey {
    std::uint32_t schema = 0;
    std::vector<std::uint32_t> orbit_ids;
    friend auto operator<=>(const ActionOrbitKey&, const ActionOrbitKey&) = default;
    friend bool operator==(const ActionOrbitKey&, const ActionOrbitKey&) = default;
};

struct ActionOrbitKeyHash {
    std::size_t operator()(const ActionOrbitKey& k) const noexcept {
        std::size_t h = k.schema * 0x9e3779b97f4a7c15ULL;
        for (auto o : k.orbit_ids) h = (h ^ o) * 0x100000001b3ULL;
        return h;
    }
};

/// Object vertices come first in a TILG, so an object's vertex is its id.
inline ActionOrbitKey orbit_key(const pddl::GroundAction& a, const symmetry::OrbitPartition& orbits) {
    ActionOrbitKey k{a.schema, {}};
    k.orbit_ids.reserve(a.args.size());
    for (auto o : a.args) k.orbit_ids.push_back(orbits.orbit_id[o]);
    return k;
}

/// Keeps the first action of each distinct orbit key, in input order.
/// `actions` must be the applicable actions of `state`.
inline std::vector<pddl::GroundAction> prune_actions(const pddl::LiftedProblem& prob, const pddl::State& state,
                                                     std::vector<pddl::GroundAction> actions,
                                                     std::size_t budget = symmetry::kDefaultOrbitBudget,
                                                     PruneStats* stats = nullptr) {
    auto t0 = std::chrono::steady_clock::now();
    auto graph = tilg::to_colored_graph(tilg::build_tilg(prob, state));
    auto orbits = symmetry::automorphism_orbits(graph, budget);
    std::unordered_set<ActionOrbitKey, ActionOrbitKeyHash> seen;
    std::vector<pddl::GroundAction> kept;
    const std::size_t total = actions.size();
    for (auto& a : actions)
        if (seen.insert(orbit_key(a, orbits.orbits)).second) kept.push_back(std::move(a));
    if (stats) {
        stats->actions_seen += total;
        stats->actions_pruned += total - kept.size();
        if (!orbits.exact) ++stats->inexact_orbit_states;
        stats->orbit_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return kept;
}

// ---------------------------------------------------------------------------
// State keys
// ---------------------------------------------------------------------------

struct StateKey {
    std::array<std::uint8_t, 16> digest{};
    friend auto operator<=>(const StateKey&, const StateKey&) = default;
    friend bool operator==(const StateKey&, const StateKey&) = default;

    std::string hex() const {
        std::ostringstream os;
        for (auto b : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
        return os.str();
    }
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const noexcept {
        std::size_t h;
        std::memcpy(&h, k.digest.data(), sizeof h);
        return h;
    }
};

/// 128-bit digest over a byte string.
using DigestFn = std::function<std::array<std::uint8_t, 16>(std::span<const std::uint8_t>)>;

inline std::array<std::uint8_t, 16> md5(std::span<const std::uint8_t> bytes) {
    std::array<std::uint8_t, 16> out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_md5(), nullptr) != 1 || len != 16)
        throw std::runtime_error("MD5 digest failed");
    return out;
}

inline constexpr int kDefaultKeyScale = 3;

inline StateKey key_from_integers(std::span<const std::int64_t> values, const DigestFn& digest = md5) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(values.size() * 8);
    for (auto v : values)
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    return StateKey{digest(bytes)};
}

/// Rounds each component to `scale` decimal places, packs the integers as
/// little-endian int64 and digests them.
inline StateKey make_state_key(std::span<const double> embedding, int scale = kDefaultKeyScale,
                               const DigestFn& digest = md5) {
    const double factor = std::pow(10.0, scale);
    std::vector<std::int64_t> q;
    q.reserve(embedding.size());
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        double x = embedding[i];
        if (!std::isfinite(x)) throw std::domain_error("embedding component " + std::to_string(i) + " is not finite");
        q.push_back(std::llround(x * factor));
    }
    return key_from_integers(q, digest);
}

/// Set of seen state keys, owned by a single search loop.
class StateRegistry {
public:
    /// True if `key` was seen before (prune); otherwise records it.
    bool check_and_register(const StateKey& key) { return !keys_.insert(key).second; }
    std::size_t size() const { return keys_.size(); }
    bool contains(const StateKey& key) const { return keys_.count(key) > 0; }

private:
    std::unordered_set<StateKey, StateKeyHash> keys_;
};

}  // namespace symplan::pruning
