#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stormlet/engines.hpp"
#include "stormlet/exceptions.hpp"
#include "stormlet/model_ops.hpp"
#include "stormlet/orchard.hpp"
#include "stormlet/properties.hpp"

using namespace stormlet;

namespace {

ExplicitModel simplifiedOrchard() {
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 2;
    config.ravenDistance = 2;
    return orchardModel(config);
}

ExplicitModel fullOrchard(bool pickedLabels = false) {
    OrchardConfig config;
    config.allPickedLabels = pickedLabels;
    return orchardModel(config);
}

double initialValue(ExplicitModel const& model, CheckResult const& result) {
    return result.values[model.firstInitialState()];
}

constexpr double kSimplifiedWin = 0.5711805425946498;
constexpr double kFullWin = 0.6313572986959962;

} // namespace

TEST_CASE("prob01 on the full orchard") {
    ExplicitModel model = fullOrchard();
    BitVector all(model.numStates(), true);
    BitVector goal = model.labels.at("PlayersWon");

    QualitativeSets sets = prob01Max(model, all, goal);
    // absorbing non-goal states can never reach the goal
    CHECK(model.labels.at("RavenWon").isSubsetOf(sets.prob0));
    CHECK(goal.isSubsetOf(sets.prob1));
    CHECK((sets.prob0 & sets.prob1).count() == 0);

    // the game ends almost surely under every policy
    BitVector ended = goal | model.labels.at("RavenWon");
    QualitativeSets minSets = prob01Min(model, all, ended);
    CHECK(minSets.prob1.full());
}

TEST_CASE("prob01 trivial goal sets") {
    ExplicitModel model = simplifiedOrchard();
    BitVector all(model.numStates(), true);
    BitVector none(model.numStates(), false);

    QualitativeSets everything = prob01Max(model, all, all);
    CHECK(everything.prob1.full());
    CHECK(everything.prob0.empty());

    QualitativeSets nothing = prob01Max(model, all, none);
    CHECK(nothing.prob0.full());

    QualitativeSets minAll = prob01Min(model, all, all);
    CHECK(minAll.prob1.full());
}

TEST_CASE("prob01 min equals max on a dtmc") {
    ExplicitModel mdp = oracles::randomMdp(11, 40, 4);
    Scheduler zeros;
    zeros.choices.assign(mdp.numStates(), 0);
    ExplicitModel chain = applyScheduler(mdp, zeros);
    BitVector all(chain.numStates(), true);
    BitVector goal = chain.labels.at("goal");
    QualitativeSets maxSets = prob01Max(chain, all, goal);
    QualitativeSets minSets = prob01Min(chain, all, goal);
    CHECK(maxSets.prob0 == minSets.prob0);
    CHECK(maxSets.prob1 == minSets.prob1);
}

TEST_CASE("simplified orchard maximal win probability") {
    ExplicitModel model = simplifiedOrchard();
    Environment env;
    env.precision = 1e-9;
    auto result = checkReachability(model, model.labels.at("PlayersWon"), Direction::Max, env);
    CHECK(std::abs(initialValue(model, result) - kSimplifiedWin) < 1e-6);
}

TEST_CASE("tiny orchard win probability matches play enumeration") {
    OrchardConfig config;
    config.fruitTypes = {"APPLE"};
    config.fruitsPerTree = 1;
    config.ravenDistance = 1;
    ExplicitModel model = orchardModel(config);
    auto result = checkReachability(model, model.labels.at("PlayersWon"), Direction::Max);
    CHECK(std::abs(initialValue(model, result) - oracles::enumerateTinyOrchardWin()) < 1e-9);
}

TEST_CASE("full orchard win probability for every method") {
    ExplicitModel model = fullOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    for (Method method : {Method::ValueIteration, Method::GaussSeidel, Method::PolicyIteration,
                          Method::OptimisticValueIteration}) {
        Environment env;
        env.method = method;
        auto result = checkReachability(model, goal, Direction::Max, env);
        CHECK_MESSAGE(std::abs(initialValue(model, result) - kFullWin) < 1e-5, toString(method));
    }
}

TEST_CASE("method cross-agreement within 10 epsilon") {
    ExplicitModel model = simplifiedOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    Environment env;
    std::vector<double> values;
    for (Method method : {Method::ValueIteration, Method::GaussSeidel, Method::PolicyIteration,
                          Method::OptimisticValueIteration}) {
        env.method = method;
        values.push_back(initialValue(model, checkReachability(model, goal, Direction::Max, env)));
    }
    for (double value : values) {
        CHECK(std::abs(value - values.front()) <= 10 * env.precision);
    }
}

TEST_CASE("value iteration is monotone from below") {
    ExplicitModel model = simplifiedOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    std::vector<double> values(model.numStates(), 0.0);
    std::vector<double> previous = values;
    for (int iteration = 0; iteration < 30; ++iteration) {
        values = oracles::referenceBellman(model, goal, values, true);
        for (std::size_t s = 0; s < values.size(); ++s) {
            CHECK(values[s] >= previous[s] - 1e-15);
        }
        previous = values;
    }
}

TEST_CASE("ovi reports a certified enclosure") {
    ExplicitModel model = fullOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    auto bounds = checkReachabilityBounds(model, goal, Direction::Max);
    std::size_t initial = model.firstInitialState();
    CHECK(bounds[initial].lower <= kFullWin);
    CHECK(bounds[initial].upper >= kFullWin);
    for (std::size_t s = 0; s < bounds.size(); ++s) {
        CHECK(bounds[s].upper - bounds[s].lower <= 1e-6 * std::max(1.0, bounds[s].lower) + 1e-12);
    }
    // the upper bounds are inductive: one Bellman step cannot increase them
    std::vector<double> upper(bounds.size());
    for (std::size_t s = 0; s < bounds.size(); ++s) {
        upper[s] = bounds[s].upper;
    }
    auto stepped = oracles::referenceBellman(model, goal, upper, true);
    BitVector all(model.numStates(), true);
    QualitativeSets sets = prob01Max(model, all, goal);
    for (std::size_t s = 0; s < bounds.size(); ++s) {
        if (!sets.prob0.get(s) && !sets.prob1.get(s)) {
            CHECK(stepped[s] <= upper[s] + 1e-12);
        }
    }
}

TEST_CASE("ovi with loose precision still brackets the value") {
    ExplicitModel model = simplifiedOrchard();
    Environment env;
    env.precision = 0.1;
    auto bounds = checkReachabilityBounds(model, model.labels.at("PlayersWon"), Direction::Max, env);
    std::size_t initial = model.firstInitialState();
    CHECK(bounds[initial].lower <= kSimplifiedWin);
    CHECK(bounds[initial].upper >= kSimplifiedWin);
    CHECK(bounds[initial].upper - bounds[initial].lower <= 0.1 + 1e-12);
    // iterating from below cannot overshoot the exact value
    CHECK(bounds[initial].lower <= kSimplifiedWin + 1e-12);
}

TEST_CASE("reachability of the full goal set is one everywhere") {
    ExplicitModel model = simplifiedOrchard();
    BitVector all(model.numStates(), true);
    auto bounds = checkReachabilityBounds(model, all, Direction::Max);
    for (auto const& interval : bounds) {
        CHECK(interval.lower == 1.0);
        CHECK(interval.upper == 1.0);
    }
}

TEST_CASE("full orchard expected rounds") {
    ExplicitModel model = fullOrchard();
    BitVector ended = model.labels.at("PlayersWon") | model.labels.at("RavenWon");
    auto rmax = checkTotalReward(model, "rounds", ended, Direction::Max);
    auto rmin = checkTotalReward(model, "rounds", ended, Direction::Min);
    CHECK(std::abs(initialValue(model, rmax) - 22.339089182046724) < 1e-4);
    CHECK(std::abs(initialValue(model, rmin) - 20.882789624542582) < 1e-4);
    CHECK(initialValue(model, rmax) >= initialValue(model, rmin));
}

TEST_CASE("total reward is zero on goal states") {
    ExplicitModel model = simplifiedOrchard();
    BitVector goal(model.numStates(), false);
    goal.set(model.firstInitialState());
    auto result = checkTotalReward(model, "rounds", goal, Direction::Max);
    CHECK(initialValue(model, result) == 0.0);
}

TEST_CASE("total reward is infinite when the goal can be missed") {
    ExplicitModel model = fullOrchard();
    BitVector goal = model.labels.at("PlayersWon"); // RavenWon traps miss it
    auto result = checkTotalReward(model, "rounds", goal, Direction::Max);
    CHECK(std::isinf(initialValue(model, result)));
}

TEST_CASE("reward scaling scales reward values linearly") {
    ExplicitModel model = simplifiedOrchard();
    BitVector ended = model.labels.at("PlayersWon") | model.labels.at("RavenWon");
    double base = initialValue(model, checkTotalReward(model, "rounds", ended, Direction::Max));
    ExplicitModel scaled = model;
    for (auto& value : *scaled.rewards.at("rounds").choiceRewards) {
        value *= 3.0;
    }
    double tripled = initialValue(scaled, checkTotalReward(scaled, "rounds", ended, Direction::Max));
    CHECK(std::abs(tripled - 3.0 * base) <= 3.0 * 1e-5);
}

TEST_CASE("reward methods agree on the simplified orchard") {
    ExplicitModel model = simplifiedOrchard();
    BitVector ended = model.labels.at("PlayersWon") | model.labels.at("RavenWon");
    Environment env;
    std::vector<double> values;
    for (Method method : {Method::ValueIteration, Method::GaussSeidel, Method::PolicyIteration,
                          Method::OptimisticValueIteration}) {
        env.method = method;
        for (Direction direction : {Direction::Max, Direction::Min}) {
            auto result = checkTotalReward(model, "rounds", ended, direction, env);
            values.push_back(initialValue(model, result));
        }
    }
    for (std::size_t i = 2; i < values.size(); i += 2) {
        CHECK(std::abs(values[i] - values[0]) <= 1e-4);
        CHECK(std::abs(values[i + 1] - values[1]) <= 1e-4);
    }
}

TEST_CASE("extracted scheduler achieves the optimum") {
    ExplicitModel model = fullOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    auto result = checkReachability(model, goal, Direction::Max, Environment(), true);
    REQUIRE(result.scheduler.has_value());
    ExplicitModel induced = applyScheduler(model, *result.scheduler);
    auto recheck = solveDtmcReachability(induced, goal);
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        CHECK(std::abs(recheck.values[s] - result.values[s]) <= 1e-5);
    }
}

TEST_CASE("extracted minimizing scheduler achieves the minimum") {
    ExplicitModel model = simplifiedOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    Environment env;
    env.precision = 1e-10;
    auto result = checkReachability(model, goal, Direction::Min, env, true);
    REQUIRE(result.scheduler.has_value());
    ExplicitModel induced = applyScheduler(model, *result.scheduler);
    auto recheck = solveDtmcReachability(induced, goal);
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        CHECK(std::abs(recheck.values[s] - result.values[s]) <= 1e-6);
    }
}

TEST_CASE("duality: max dominates min pointwise") {
    ExplicitModel model = fullOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    auto pmax = checkReachability(model, goal, Direction::Max);
    auto pmin = checkReachability(model, goal, Direction::Min);
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        CHECK(pmax.values[s] >= pmin.values[s] - 1e-9);
    }
}

TEST_CASE("cherry-collection value on the full orchard") {
    ExplicitModel model = fullOrchard(true);
    BitVector cherries = model.labels.at("allCherriesPicked");
    auto optimal = checkReachability(model, cherries, Direction::Max);
    CHECK(std::abs(initialValue(model, optimal) - 0.9120560407842777) < 1e-5);

    // the winning-optimal policy collects all cherries less reliably
    auto winResult = checkReachability(model, model.labels.at("PlayersWon"), Direction::Max, Environment(), true);
    ExplicitModel induced = applyScheduler(model, *winResult.scheduler);
    auto fixed = solveDtmcReachability(induced, cherries);
    CHECK(initialValue(model, fixed) <= 0.9120560407842777 + 1e-5);
}

TEST_CASE("bounded reachability on tiny games matches brute force") {
    for (int budget = 0; budget <= 6; ++budget) {
        OrchardConfig config;
        config.fruitTypes = {"APPLE", "CHERRY"};
        config.fruitsPerTree = 1;
        config.ravenDistance = 2;
        ExplicitModel model = orchardModel(config);
        auto result =
            checkBoundedReachability(model, "rounds", budget, model.labels.at("PlayersWon"), Direction::Max);
        double expected = oracles::bruteForceBoundedWin(2, 1, 2, budget);
        CHECK(std::abs(initialValue(model, result) - expected) < 1e-6);
    }
}

TEST_CASE("bounded reachability needs sixteen rounds on the full game") {
    ExplicitModel model = fullOrchard();
    auto result = checkBoundedReachability(model, "rounds", 15, model.labels.at("PlayersWon"), Direction::Max);
    CHECK(initialValue(model, result) == 0.0);
}

TEST_CASE("bounded reachability is monotone and approaches the unbounded value") {
    ExplicitModel model = simplifiedOrchard();
    BitVector goal = model.labels.at("PlayersWon");
    double previous = -1.0;
    double last = 0.0;
    for (int budget : {0, 1, 2, 3, 4, 6, 8, 12, 16, 24, 40}) {
        auto result = checkBoundedReachability(model, "rounds", budget, goal, Direction::Max);
        double value = initialValue(model, result);
        CHECK(value >= previous - 1e-9);
        previous = value;
        last = value;
    }
    CHECK(std::abs(last - kSimplifiedWin) < 1e-3);
}

TEST_CASE("bounded reachability with budget zero on a goal state") {
    ExplicitModel model = simplifiedOrchard();
    BitVector goal(model.numStates(), false);
    goal.set(model.firstInitialState());
    auto result = checkBoundedReachability(model, "rounds", 0, goal, Direction::Max);
    CHECK(initialValue(model, result) == 1.0);
}

TEST_CASE("bounded reachability rejects fractional rewards") {
    ExplicitModel model = simplifiedOrchard();
    ExplicitModel broken = model;
    (*broken.rewards.at("rounds").choiceRewards)[0] = 0.5;
    // ensure some row actually carries the fractional reward
    for (std::size_t row = 0; row < broken.numChoices(); ++row) {
        if ((*broken.rewards.at("rounds").choiceRewards)[row] == 1.0) {
            (*broken.rewards.at("rounds").choiceRewards)[row] = 0.5;
            break;
        }
    }
    CHECK_THROWS_AS(
        checkBoundedReachability(broken, "rounds", 3, broken.labels.at("PlayersWon"), Direction::Max),
        UnsupportedError);
}

TEST_CASE("dtmc solvers agree: direct vs gauss-seidel") {
    for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        ExplicitModel mdp = oracles::randomMdp(seed, 50, 5);
        Scheduler zeros;
        zeros.choices.assign(mdp.numStates(), 0);
        ExplicitModel chain = applyScheduler(mdp, zeros);
        BitVector goal = chain.labels.at("goal");
        auto direct = solveDtmcReachability(chain, goal);

        // force the iterative path by a copy with a tiny direct-solve limit:
        // instead, compare against plain value iteration on the chain
        Environment env;
        env.precision = 1e-12;
        auto iterative = checkReachability(chain, goal, Direction::Max, env);
        for (std::size_t s = 0; s < chain.numStates(); ++s) {
            CHECK(std::abs(direct.values[s] - iterative.values[s]) < 1e-8);
        }
    }
}

TEST_CASE("two-state chain reaches the goal surely") {
    ExplicitModel chain = oracles::twoStateChain();
    auto result = solveDtmcReachability(chain, chain.labels.at("goal"));
    CHECK(result.values[0] == doctest::Approx(1.0));
}

TEST_CASE("direct dtmc check agrees with scheduler-restricted iteration") {
    ExplicitModel model = simplifiedOrchard();
    Scheduler zeros;
    zeros.choices.assign(model.numStates(), 0);
    ExplicitModel induced = applyScheduler(model, zeros);
    BitVector goal = induced.labels.at("PlayersWon");
    auto direct = solveDtmcReachability(induced, goal);
    Environment env;
    env.precision = 1e-12;
    auto restricted = checkReachability(induced, goal, Direction::Max, env);
    for (std::size_t s = 0; s < induced.numStates(); ++s) {
        CHECK(std::abs(direct.values[s] - restricted.values[s]) < 1e-9);
    }
}

TEST_CASE("nonconvergence raises after the iteration cap") {
    ExplicitModel model = fullOrchard();
    Environment env;
    env.maxIterations = 3;
    CHECK_THROWS_AS(checkReachability(model, model.labels.at("PlayersWon"), Direction::Max, env),
                    ConvergenceError);
}
