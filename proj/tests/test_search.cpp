#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "symplan/fixtures.hpp"
#include "symplan/search.hpp"

using namespace symplan;

namespace {

// Records every evaluated state.
class Recording : public search::Evaluator {
public:
    explicit Recording(const pddl::LiftedProblem& prob) : inner_(prob) {}
    search::Evaluation evaluate(const pddl::State& s, bool want_key) override {
        seen.push_back(s.propositions());
        return inner_.evaluate(s, want_key);
    }
    std::string name() const override { return "recording"; }
    std::vector<std::vector<pddl::Proposition>> seen;

private:
    search::GoalCountEvaluator inner_;
};

search::Plan plan_of(const pddl::LiftedProblem& prob, const std::vector<std::string>& lines) {
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    return search::parse_plan(prob, text);
}

}  // namespace

TEST(Search, TrivialProblem) {
    auto base = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(2));
    auto prob = pddl::with_goal(base, {base.init.propositions().front()}, "trivial");
    search::GoalCountEvaluator h(prob);
    auto r = search::gbfs(prob, h);
    EXPECT_EQ(r.outcome, search::Outcome::solved);
    ASSERT_TRUE(r.plan);
    EXPECT_EQ(r.plan->size(), 0u);
    EXPECT_EQ(r.expansions, 0u);
    search::BlindEvaluator b(prob);
    EXPECT_EQ(search::astar_optimal(prob, b).plan->size(), 0u);
}

TEST(Search, GripperTwoBallsGoalCount) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(2));
    search::GoalCountEvaluator h(prob);
    auto r = search::gbfs(prob, h);
    ASSERT_EQ(r.outcome, search::Outcome::solved);
    EXPECT_TRUE(search::validate_plan(prob, *r.plan));
    EXPECT_GT(r.expansions, 0u);
    EXPECT_GE(r.plan->size(), *oracle::bfs(prob).length);
    EXPECT_EQ(*oracle::bfs(prob).length, 5u);
}

TEST(Search, UnsolvableIsExhausted) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_unsolvable_problem());
    auto bfs = oracle::bfs(prob);
    ASSERT_TRUE(bfs.complete);
    EXPECT_FALSE(bfs.length);
    for (bool prune : {false, true}) {
        search::GoalCountEvaluator h(prob);
        auto r = search::gbfs(prob, h, {prune, prune});
        EXPECT_EQ(r.outcome, search::Outcome::exhausted);
        EXPECT_FALSE(r.plan);
    }
    search::HMaxEvaluator hm(prob);
    EXPECT_EQ(hm.evaluate(prob.init, false).h, search::kInfinity);
    EXPECT_EQ(search::astar_optimal(prob, hm).outcome, search::Outcome::exhausted);
}

TEST(Search, ResourceLimit) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(4));
    search::GoalCountEvaluator h(prob);
    search::SearchConfig cfg;
    cfg.limits.max_expansions = 2;
    auto r = search::gbfs(prob, h, cfg);
    EXPECT_EQ(r.outcome, search::Outcome::resource_limit);
    EXPECT_FALSE(r.plan);
    EXPECT_EQ(r.expansions, 2u);
    search::BlindEvaluator b(prob);
    EXPECT_EQ(search::astar_optimal(prob, b, {3, 300}).outcome, search::Outcome::resource_limit);
}

TEST(Search, AStarMatchesBreadthFirstOracle) {
    std::size_t checked = 0;
    for (const auto& lp : oracle::corpus()) {
        auto bfs = oracle::bfs(lp.problem);
        if (!bfs.complete) continue;
        search::BlindEvaluator blind(lp.problem);
        search::HMaxEvaluator hmax(lp.problem);
        auto a = search::astar_optimal(lp.problem, blind);
        auto b = search::astar_optimal(lp.problem, hmax);
        ASSERT_EQ(static_cast<bool>(a.plan), static_cast<bool>(bfs.length)) << lp.id;
        if (!bfs.length) continue;
        EXPECT_EQ(a.plan->size(), *bfs.length) << lp.id;
        EXPECT_EQ(b.plan->size(), *bfs.length) << lp.id;
        EXPECT_TRUE(search::validate_plan(lp.problem, *b.plan)) << lp.id;
        ++checked;
    }
    EXPECT_GE(checked, 25u);
}

TEST(Search, GripperOneOptimalPlan) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(1));
    search::HMaxEvaluator h(prob);
    auto r = search::astar_optimal(prob, h);
    ASSERT_TRUE(r.plan);
    ASSERT_EQ(r.plan->size(), 3u);
    EXPECT_EQ(prob.dom().schemas[r.plan->actions[0].schema].name, "pick");
    EXPECT_EQ(prob.dom().schemas[r.plan->actions[1].schema].name, "move");
    EXPECT_EQ(prob.dom().schemas[r.plan->actions[2].schema].name, "drop");
}

TEST(Search, Heuristics) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(2));
    EXPECT_EQ(search::goal_count(prob, prob.init), 2.0);
    search::BlindEvaluator b(prob);
    auto plan = search::astar_optimal(prob, b).plan;
    auto last = search::trajectory(prob, *plan).back();
    EXPECT_EQ(search::goal_count(prob, last), 0.0);
    EXPECT_EQ(search::h_max(prob, last), 0.0);
    // pick and move appear at level 1, drop at level 2
    auto one = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(1));
    EXPECT_EQ(search::h_max(one, one.init), 2.0);
}

TEST(Search, HMaxIsAdmissible) {
    std::mt19937 rng(5);
    for (const auto& lp : oracle::corpus()) {
        pddl::State s = lp.problem.init;
        for (int k = 0; k < 4; ++k) {
            auto bfs = oracle::bfs(pddl::with_init(lp.problem, s), 20000);
            double h = search::h_max(lp.problem, s);
            if (bfs.complete && bfs.length) EXPECT_LE(h, static_cast<double>(*bfs.length)) << lp.id;
            auto acts = pddl::applicable_actions(lp.problem, s);
            if (acts.empty()) break;
            s = pddl::apply(lp.problem, s, acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)]);
        }
    }
}

TEST(Search, NoStateEvaluatedTwiceWithoutPruning) {
    for (const auto& lp : oracle::corpus()) {
        Recording h(lp.problem);
        search::gbfs(lp.problem, h);
        std::set<std::vector<pddl::Proposition>> unique(h.seen.begin(), h.seen.end());
        EXPECT_EQ(unique.size(), h.seen.size()) << lp.id;
    }
}

TEST(Search, PruningOnFixtures) {
    for (const auto& lp : oracle::corpus()) {
        auto run = [&](bool action, bool state) {
            search::GoalCountEvaluator h(lp.problem);
            auto r = search::gbfs(lp.problem, h, {action, state});
            if (r.plan) EXPECT_TRUE(search::validate_plan(lp.problem, *r.plan)) << lp.id;
            return r;
        };
        auto none = run(false, false), state = run(false, true), action = run(true, false);
        EXPECT_LE(state.expansions, none.expansions) << lp.id;
        if (lp.id.rfind("gripper/p", 0) == 0) {
            ASSERT_TRUE(action.plan) << lp.id;
            EXPECT_EQ(action.plan->size(), none.plan->size()) << lp.id;
            EXPECT_EQ(run(true, true).plan->size(), none.plan->size()) << lp.id;
        }
    }
}

TEST(Search, StatePruningHelpsOnGripperFour) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(4));
    search::GoalCountEvaluator h1(prob), h2(prob);
    auto none = search::gbfs(prob, h1, {false, false});
    auto state = search::gbfs(prob, h2, {false, true});
    EXPECT_LT(state.expansions, none.expansions);
    EXPECT_GT(state.prune.states_pruned, 0u);
}

TEST(Search, ModelHeuristicSolves) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(2));
    auto w = gnn::random_weights(gnn::metadata_for(prob.dom(), 16), 3, 1);
    search::ModelEvaluator h(prob, w);
    auto r = search::gbfs(prob, h, {true, true});
    ASSERT_EQ(r.outcome, search::Outcome::solved);
    EXPECT_TRUE(search::validate_plan(prob, *r.plan));
    auto other = oracle::load(fixtures::spanner_domain(), fixtures::spanner_problem("s", {1}, 1, 1));
    EXPECT_THROW(search::ModelEvaluator(other, w), gnn::ModelError);
}

TEST(Search, ValidatePlanReasons) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(1));
    auto good = plan_of(prob, {"(pick ball1 rooma left)", "(move rooma roomb)", "(drop ball1 roomb left)"});
    EXPECT_TRUE(search::validate_plan(prob, good));
    auto bad = plan_of(prob, {"(pick ball1 rooma left)", "(drop ball1 roomb left)", "(move rooma roomb)"});
    auto v = search::validate_plan(prob, bad);
    EXPECT_FALSE(v);
    EXPECT_EQ(v.failed_step, 2u);
    EXPECT_NE(v.reason.find("step 2"), std::string::npos);
    auto short_plan = plan_of(prob, {"(pick ball1 rooma left)", "(move rooma roomb)"});
    v = search::validate_plan(prob, short_plan);
    EXPECT_FALSE(v);
    EXPECT_EQ(v.reason, "goal unsatisfied");
}

TEST(Search, PlanTextRoundTrip) {
    auto prob = oracle::load(fixtures::logistics_domain(), fixtures::logistics_problem("l", 3, 2, 2));
    search::HMaxEvaluator h(prob);
    auto plan = *search::astar_optimal(prob, h).plan;
    auto text = search::write_plan(prob, plan);
    EXPECT_NE(text.find("; cost = " + std::to_string(plan.size()) + " (unit cost)"), std::string::npos);
    auto back = search::parse_plan(prob, text);
    EXPECT_EQ(back.actions, plan.actions);
    EXPECT_EQ(search::write_plan(prob, back), text);
}

TEST(Search, PlanParseErrors) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(1));
    EXPECT_THROW(plan_of(prob, {"(fly ball1)"}), search::PlanParseError);
    EXPECT_THROW(plan_of(prob, {"(pick ball9 rooma left)"}), search::PlanParseError);
    EXPECT_THROW(plan_of(prob, {"(pick ball1 rooma)"}), search::PlanParseError);
    EXPECT_THROW(plan_of(prob, {"(pick rooma rooma left)"}), search::PlanParseError);
    EXPECT_THROW(plan_of(prob, {"pick ball1 rooma left"}), search::PlanParseError);
    EXPECT_EQ(plan_of(prob, {"; comment only", "", "(PICK Ball1 rooma left) ; trailing"}).size(), 1u);
}

TEST(Search, ReportsAreDeterministic) {
    auto prob = oracle::load(fixtures::gripper_domain(), fixtures::gripper_problem(3));
    search::GoalCountEvaluator h1(prob), h2(prob);
    auto a = search::gbfs(prob, h1, {true, true});
    auto b = search::gbfs(prob, h2, {true, true});
    EXPECT_EQ(search::report_to_json(prob, a).dump(), search::report_to_json(prob, b).dump());
    EXPECT_EQ(search::report_to_text(prob, a), search::report_to_text(prob, b));
    EXPECT_TRUE(search::report_to_json(prob, a, true).contains("wall_seconds"));
    EXPECT_FALSE(search::report_to_json(prob, a).contains("wall_seconds"));
}
