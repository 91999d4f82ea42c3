// One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.
#include <chrono>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "symplan/cli.hpp"

using namespace symplan;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

template <class F>
void criterion(const char* name, F&& body) {
    try {
        std::string detail;
        bool ok = body(detail);
        report(name, ok, detail);
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool in_family(const std::string& id, std::initializer_list<const char*> families) {
    for (const char* f : families)
        if (id.rfind(f, 0) == 0) return true;
    return false;
}

}  // namespace

int main() {
    const auto& corpus = oracle::corpus();

    criterion("orbits-exact", [](std::string& d) {
        auto t0 = std::chrono::steady_clock::now();
        auto suite = oracle::orbit_suite();
        std::size_t match = 0;
        for (const auto& g : suite) {
            auto r = symmetry::automorphism_orbits(g);
            auto expect = oracle::brute_orbits(g);
            bool same = r.exact;
            for (std::uint32_t u = 0; u < g.size() && same; ++u)
                for (std::uint32_t v = 0; v < g.size() && same; ++v)
                    same = r.orbits.same_orbit(u, v) == (expect[u] == expect[v]);
            match += same;
        }
        double secs = seconds_since(t0);
        d = std::to_string(match) + "/" + std::to_string(suite.size()) + " graphs match brute force in " +
            std::to_string(secs) + " s";
        return suite.size() == 50 && match == suite.size() && secs < 10.0;
    });

    criterion("symmetric-successors", [&](std::string& d) {
        std::mt19937 rng(2024);
        oracle::TripleStats total;
        std::vector<const oracle::LoadedProblem*> pool;
        for (const auto& lp : corpus)
            if (in_family(lp.id, {"gripper/p", "blocksworld/", "spanner/"})) pool.push_back(&lp);
        const std::size_t per = (1000 + pool.size() - 1) / pool.size();
        for (const auto* lp : pool) {
            auto st = oracle::sample_triples(lp->problem, rng, per);
            total.triples += st.triples;
            total.nontrivial += st.nontrivial;
            total.image_applicable += st.image_applicable;
            total.isomorphic += st.isomorphic;
            total.image_state_equal += st.image_state_equal;
        }
        auto pairs = oracle::load(fixtures::pairs_domain(), fixtures::pairs_problem());
        auto counter = oracle::relaxation_counterexamples(pairs, pairs.init);
        d = std::to_string(total.isomorphic) + "/" + std::to_string(total.triples) + " isomorphic (" +
            std::to_string(total.nontrivial) + " nontrivial), pairs counterexamples=" + std::to_string(counter);
        return total.triples >= 1000 && total.nontrivial > 0 && total.image_applicable == total.triples &&
               total.isomorphic == total.triples && total.image_state_equal == total.triples && counter > 0;
    });

    criterion("pick-pruning", [](std::string& d) {
        bool ok = true;
        for (int b : {2, 4, 8}) {
            auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(b));
            auto kept = pruning::prune_actions(prob, prob.init, pddl::applicable_actions(prob, prob.init));
            std::size_t picks = 0;
            for (const auto& a : kept) picks += prob.dom().schemas[a.schema].name == "pick";
            d += "b=" + std::to_string(b) + ":" + std::to_string(picks) + " ";
            ok = ok && picks == 1;
        }
        return ok;
    });

    criterion("gripper6-ablation", [](std::string& d) {
        auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(6));
        std::size_t exp[4];
        bool valid = true;
        const bool flags[4][2] = {{false, false}, {true, false}, {false, true}, {true, true}};
        for (int i = 0; i < 4; ++i) {
            search::GoalCountEvaluator eval(prob);
            search::SearchConfig cfg;
            cfg.action_pruning = flags[i][0];
            cfg.state_pruning = flags[i][1];
            auto r = search::gbfs(prob, eval, cfg);
            valid = valid && r.outcome == search::Outcome::solved && search::validate_plan(prob, *r.plan);
            exp[i] = r.expansions;
        }
        d = "expansions none=" + std::to_string(exp[0]) + " action=" + std::to_string(exp[1]) +
            " state=" + std::to_string(exp[2]) + " both=" + std::to_string(exp[3]);
        return valid && 2 * exp[3] <= exp[0];
    });

    criterion("permutation-invariance", [&](std::string& d) {
        std::mt19937 rng(99);
        std::size_t graphs = 0, mismatches = 0;
        std::map<const pddl::DomainModel*, gnn::ModelWeights> models;
        for (const auto& lp : corpus) {
            const auto& dom = lp.problem.dom();
            auto it = models.find(&dom);
            if (it == models.end())
                it = models.emplace(&dom, gnn::random_weights(gnn::metadata_for(dom, 16), 3, 11)).first;
            auto g = tilg::build_tilg(lp.problem, lp.problem.init);
            auto ref = pruning::make_state_key(gnn::forward(it->second, g).embedding);
            std::vector<std::uint32_t> perm(g.size());
            std::iota(perm.begin(), perm.end(), 0u);
            for (int k = 0; k < 100; ++k) {
                std::shuffle(perm.begin(), perm.end(), rng);
                auto key = pruning::make_state_key(gnn::forward(it->second, tilg::permute_vertices(g, perm)).embedding);
                mismatches += !(key == ref);
            }
            ++graphs;
        }
        d = std::to_string(graphs) + " graphs x 100 relabelings, mismatches=" + std::to_string(mismatches);
        return graphs > 0 && mismatches == 0;
    });

    criterion("forward-oracle", [&](std::string& d) {
        std::size_t cases = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < corpus.size() && cases < 20; ++i) {
            const auto& lp = corpus[i];
            auto w = gnn::random_weights(gnn::metadata_for(lp.problem.dom(), 8), 1 + cases % 4, 100 + cases);
            auto g = tilg::build_tilg(lp.problem, lp.problem.init);
            auto fast = gnn::forward(w, g);
            auto [z, h] = oracle::dense_forward(w, g);
            worst = std::max(worst, std::abs(fast.heuristic - h) / std::max(1.0, std::abs(h)));
            for (std::size_t c = 0; c < fast.embedding.size(); ++c)
                worst = std::max(worst, std::abs(fast.embedding[c] - z(static_cast<Eigen::Index>(c))) /
                                            std::max(1.0, std::abs(z(static_cast<Eigen::Index>(c)))));
            ++cases;
        }
        d = std::to_string(cases) + " cases, max relative error " + std::to_string(worst);
        return cases == 20 && worst <= 1e-10;
    });

    criterion("astar-optimal", [&](std::string& d) {
        std::size_t checked = 0, agree = 0;
        for (const auto& lp : corpus) {
            auto ref = oracle::bfs(lp.problem);
            if (!ref.complete) continue;
            search::HMaxEvaluator eval(lp.problem);
            auto r = search::astar_optimal(lp.problem, eval);
            bool ok = ref.length ? (r.outcome == search::Outcome::solved && r.plan->size() == *ref.length &&
                                    search::validate_plan(lp.problem, *r.plan))
                                 : r.outcome == search::Outcome::exhausted;
            ++checked;
            agree += ok;
            if (!ok) d += lp.id + " ";
        }
        d += std::to_string(agree) + "/" + std::to_string(checked) + " match breadth-first lengths";
        return checked >= 25 && agree == checked;
    });

    criterion("subgoal-augmentation", [&](std::string& d) {
        std::size_t bases = 0, prefixes = 0;
        bool ok = true;
        for (const auto& lp : corpus) {
            if (!in_family(lp.id, {"gripper/p", "blocksworld/", "spanner/", "logistics/"})) continue;
            search::HMaxEvaluator eval(lp.problem);
            auto base = search::astar_optimal(lp.problem, eval);
            if (base.outcome != search::Outcome::solved) continue;
            auto aug = dataset::augment_subgoal_prefixes(lp.problem, *base.plan);
            std::size_t n = lp.problem.goal.size();
            ok = ok && aug.size() == (n >= 2 ? n - 1 : 0);
            std::size_t prev = 0;
            for (const auto& a : aug) {
                search::HMaxEvaluator e(a.problem);
                auto r = search::astar_optimal(a.problem, e);
                bool solved = r.outcome == search::Outcome::solved && search::validate_plan(a.problem, *r.plan);
                ok = ok && solved && r.plan->size() >= prev && r.plan->size() <= base.plan->size();
                prev = r.plan->size();
                ++prefixes;
            }
            ++bases;
        }
        d = std::to_string(prefixes) + " prefix problems from " + std::to_string(bases) + " bases";
        return ok && prefixes > 0;
    });

    criterion("plans-validate", [&](std::string& d) {
        std::size_t plans = 0, valid = 0;
        std::vector<pddl::LiftedProblem> problems;
        for (const auto& lp : corpus) problems.push_back(lp.problem);
        for (const auto& prob : problems) {
            for (bool ap : {false, true})
                for (bool sp : {false, true}) {
                    search::GoalCountEvaluator eval(prob);
                    search::SearchConfig cfg;
                    cfg.action_pruning = ap;
                    cfg.state_pruning = sp;
                    auto r = search::gbfs(prob, eval, cfg);
                    if (r.outcome != search::Outcome::solved) continue;
                    ++plans;
                    auto text = search::write_plan(prob, *r.plan);
                    valid += static_cast<bool>(search::validate_plan(prob, search::parse_plan(prob, text)));
                }
        }
        d = std::to_string(valid) + "/" + std::to_string(plans) + " emitted plans validate after round trip";
        return plans > 0 && valid == plans;
    });

    std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
