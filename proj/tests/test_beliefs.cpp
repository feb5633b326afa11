#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stormlet/beliefs.hpp"
#include "stormlet/exceptions.hpp"
#include "stormlet/orchard.hpp"

using namespace stormlet;

namespace {

ExplicitModel basePomdp(bool full) {
    OrchardConfig config;
    if (!full) {
        config.fruitTypes = {"APPLE", "CHERRY"};
        config.fruitsPerTree = 2;
        config.ravenDistance = 2;
    }
    config.variant = OrchardVariant::Pomdp;
    return orchardModel(config);
}

} // namespace

TEST_CASE("nextRound from the initial point belief yields six point beliefs") {
    ExplicitModel pomdp = basePomdp(true);
    Belief initial = pointBelief(static_cast<uint32_t>(pomdp.firstInitialState()));
    auto successors = beliefSuccessors(pomdp, initial, 0);
    REQUIRE(successors.size() == 6);
    for (auto const& [probability, belief] : successors) {
        CHECK(probability == rationalFromDouble(1.0 / 6.0));
        CHECK(belief.isPoint());
        CHECK(belief.support.front().second == 1);
    }
}

TEST_CASE("beliefs stay exactly normalized") {
    ExplicitModel pomdp = basePomdp(false);
    Belief belief = pointBelief(static_cast<uint32_t>(pomdp.firstInitialState()));
    // walk a few levels deep, accumulating every successor
    std::vector<Belief> frontier{belief};
    for (int depth = 0; depth < 5; ++depth) {
        std::vector<Belief> next;
        for (auto const& current : frontier) {
            std::size_t actions = pomdp.matrix.rowGroupSize(current.support.front().first);
            for (std::size_t action = 0; action < actions; ++action) {
                for (auto const& [probability, successor] :
                     beliefSuccessors(pomdp, current, static_cast<uint32_t>(action))) {
                    (void)probability;
                    Rational total(0);
                    for (auto const& [state, weight] : successor.support) {
                        (void)state;
                        CHECK(weight > 0);
                        total += weight;
                    }
                    CHECK(total == 1);
                    uint32_t observation = (*pomdp.observations)[successor.support.front().first];
                    for (auto const& [state, weight] : successor.support) {
                        (void)weight;
                        CHECK((*pomdp.observations)[state] == observation);
                    }
                    next.push_back(successor);
                }
            }
        }
        frontier = std::move(next);
        if (frontier.size() > 64) {
            frontier.resize(64);
        }
    }
}

TEST_CASE("disabled actions are rejected") {
    ExplicitModel pomdp = basePomdp(false);
    Belief initial = pointBelief(static_cast<uint32_t>(pomdp.firstInitialState()));
    CHECK_THROWS_AS(beliefSuccessors(pomdp, initial, 5), ModelError);
}

TEST_CASE("base orchard pomdp solves tight and matches the mdp") {
    ExplicitModel pomdp = basePomdp(true);
    auto result = checkPomdpReachability(pomdp, "PlayersWon");
    CHECK(result.converged);
    CHECK(result.maxSupportSize == 1); // fully inferable game: point beliefs only
    CHECK(result.upperBound - result.lowerBound <= 1e-4);
    CHECK(std::abs(result.lowerBound - 0.6313572986959962) < 1e-4);
    CHECK(std::abs(result.upperBound - 0.6313572986959962) < 1e-4);

    auto observable = fullyObservableValue(pomdp, pomdp.label("PlayersWon"), Direction::Max);
    CHECK(std::abs(observable.values[pomdp.firstInitialState()] - 0.6313572986959962) < 1e-5);
    CHECK(result.upperBound <= observable.values[pomdp.firstInitialState()] + 1e-6);
}

TEST_CASE("uninformative single-observation pomdp equals its chain value") {
    // two states share one observation and a single action; the belief MDP
    // collapses to the underlying chain
    ExplicitModel pomdp;
    pomdp.kind = ModelKind::Pomdp;
    pomdp.matrix.newRowGroup();
    pomdp.matrix.newRow();
    pomdp.matrix.pushEntry(MatrixEntry::point(0, 0.5));
    pomdp.matrix.pushEntry(MatrixEntry::point(1, 0.5));
    pomdp.matrix.newRowGroup();
    pomdp.matrix.newRow();
    pomdp.matrix.pushEntry(MatrixEntry::point(1, 1.0));
    pomdp.initialStates = BitVector(2);
    pomdp.initialStates.set(0);
    BitVector goal(2);
    goal.set(1);
    pomdp.labels.emplace("goal", goal);
    pomdp.observations = std::vector<uint32_t>{0, 1};
    pomdp.choiceLabels = std::vector<std::string>{"step", "step"};

    auto result = checkPomdpReachability(pomdp, "goal");
    CHECK(result.converged);
    CHECK(std::abs(result.lowerBound - 1.0) < 1e-6);
    CHECK(std::abs(result.upperBound - 1.0) < 1e-6);
}

TEST_CASE("steal phase produces the hand-enumerated belief") {
    // T=2, N=2, k=1: stealing one fruit from full trees leaves (1,2) or
    // (2,1) with probability 1/2 each, indistinguishable by observation
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 2;
    config.ravenDistance = 2;
    config.variant = OrchardVariant::PomdpSteal;
    config.stealCount = 1;
    ExplicitModel pomdp = orchardModel(config);

    Belief initial = pointBelief(static_cast<uint32_t>(pomdp.firstInitialState()));
    auto successors = beliefSuccessors(pomdp, initial, 0);
    REQUIRE(successors.size() == 1);
    CHECK(successors[0].first == 1);
    Belief const& posterior = successors[0].second;
    REQUIRE(posterior.support.size() == 2);
    CHECK(posterior.support[0].second == Rational(1, 2));
    CHECK(posterior.support[1].second == Rational(1, 2));

    // with one fruit per tree the steal empties a tree, which is observable:
    // the posterior splits into two point beliefs instead
    OrchardConfig observableConfig = config;
    observableConfig.fruitsPerTree = 1;
    ExplicitModel observablePomdp = orchardModel(observableConfig);
    Belief observableInitial = pointBelief(static_cast<uint32_t>(observablePomdp.firstInitialState()));
    auto observableSuccessors = beliefSuccessors(observablePomdp, observableInitial, 0);
    REQUIRE(observableSuccessors.size() == 2);
    for (auto const& [probability, belief] : observableSuccessors) {
        CHECK(probability == Rational(1, 2));
        CHECK(belief.isPoint());
    }
}

TEST_CASE("steal variant ordering properties") {
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 2;
    config.ravenDistance = 2;

    OrchardConfig stealConfig = config;
    stealConfig.variant = OrchardVariant::PomdpSteal;
    stealConfig.stealCount = 2;
    ExplicitModel steal = orchardModel(stealConfig);

    OrchardConfig baseConfig = config;
    baseConfig.variant = OrchardVariant::Pomdp;
    ExplicitModel base = orchardModel(baseConfig);

    double stealMdp = fullyObservableValue(steal, steal.label("PlayersWon"), Direction::Max)
                          .values[steal.firstInitialState()];
    double baseMdp =
        fullyObservableValue(base, base.label("PlayersWon"), Direction::Max).values[base.firstInitialState()];
    auto stealBounds = checkPomdpReachability(steal, "PlayersWon");

    // stealing makes the game easier for the fully-informed player, and
    // partial observation can only hurt
    CHECK(stealMdp >= baseMdp - 1e-6);
    CHECK(stealBounds.upperBound <= stealMdp + 1e-6);
    CHECK(stealBounds.lowerBound <= stealBounds.upperBound + 1e-12);
}

TEST_CASE("goal labels must be observation-consistent") {
    ExplicitModel pomdp = basePomdp(false);
    // a label that cuts through an observation class
    BitVector arbitrary(pomdp.numStates());
    arbitrary.set(0);
    pomdp.labels.emplace("arbitrary", arbitrary);
    bool consistent = true;
    uint32_t observationOfZero = (*pomdp.observations)[0];
    for (std::size_t s = 1; s < pomdp.numStates(); ++s) {
        if ((*pomdp.observations)[s] == observationOfZero) {
            consistent = false;
        }
    }
    if (!consistent) {
        CHECK_THROWS_AS(checkPomdpReachability(pomdp, "arbitrary"), UnsupportedError);
    }
}

TEST_CASE("belief cap yields valid loose bounds") {
    ExplicitModel pomdp = basePomdp(false);
    auto clipped = checkPomdpReachability(pomdp, "PlayersWon", Environment(), 5);
    auto tight = checkPomdpReachability(pomdp, "PlayersWon");
    CHECK(clipped.frontierBeliefs > 0);
    CHECK(clipped.lowerBound <= tight.lowerBound + 1e-9);
    CHECK(clipped.upperBound >= tight.upperBound - 1e-9);
}
