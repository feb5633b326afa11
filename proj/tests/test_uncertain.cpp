#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stormlet/engines.hpp"
#include "stormlet/exceptions.hpp"
#include "stormlet/model_ops.hpp"
#include "stormlet/orchard.hpp"
#include "stormlet/uncertain.hpp"

using namespace stormlet;

namespace {

ExplicitModel intervalOrchard(double epsilon, bool full) {
    OrchardConfig config;
    if (!full) {
        config.fruitTypes = {"APPLE", "CHERRY"};
        config.fruitsPerTree = 2;
        config.ravenDistance = 2;
    }
    config.variant = OrchardVariant::Interval;
    config.intervalEpsilon = epsilon;
    return orchardModel(config);
}

/// Brute-force extremum over the transportation polytope by vertex
/// enumeration: at most one coordinate sits strictly between its bounds.
double vertexEnumerationExtremum(std::vector<Interval> const& intervals, std::vector<double> const& values,
                                 bool maximize) {
    std::size_t n = intervals.size();
    double best = maximize ? -1e300 : 1e300;
    for (std::size_t fractional = 0; fractional < n; ++fractional) {
        for (uint64_t mask = 0; mask < (uint64_t(1) << (n - 1)); ++mask) {
            double sum = 0.0;
            double expectation = 0.0;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == fractional) {
                    continue;
                }
                double value = (mask >> bit) & 1 ? intervals[i].upper : intervals[i].lower;
                sum += value;
                expectation += value * values[i];
                ++bit;
            }
            double rest = 1.0 - sum;
            if (rest < intervals[fractional].lower - 1e-12 || rest > intervals[fractional].upper + 1e-12) {
                continue;
            }
            expectation += rest * values[fractional];
            best = maximize ? std::max(best, expectation) : std::min(best, expectation);
        }
    }
    return best;
}

} // namespace

TEST_CASE("inner extremum on hand cases") {
    {
        auto [value, witness] = innerExtremum({{0, 1}, {0, 1}}, {1.0, 0.0}, Direction::Max);
        CHECK(value == doctest::Approx(1.0));
        CHECK(witness[0] == doctest::Approx(1.0));
        CHECK(witness[1] == doctest::Approx(0.0));
    }
    {
        auto [value, witness] = innerExtremum({{0.25, 0.75}, {0.25, 0.75}}, {1.0, 0.0}, Direction::Min);
        CHECK(value == doctest::Approx(0.25));
        CHECK(witness[0] == doctest::Approx(0.25));
        CHECK(witness[1] == doctest::Approx(0.75));
    }
    CHECK_THROWS_AS(innerExtremum({{0.6, 0.7}, {0.6, 0.7}}, {1.0, 0.0}, Direction::Max), ModelError);
}

TEST_CASE("inner extremum matches vertex enumeration on random rows") {
    std::mt19937_64 rng(424242);
    auto uniform = [&]() { return static_cast<double>(rng() % 10000) / 10000.0; };
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 2 + rng() % 5;
        std::vector<Interval> intervals(n);
        double lowerSum;
        double upperSum;
        do {
            lowerSum = 0.0;
            upperSum = 0.0;
            for (auto& interval : intervals) {
                double a = uniform();
                double b = uniform();
                interval.lower = std::min(a, b) / static_cast<double>(n);
                interval.upper = std::max(a, b);
                lowerSum += interval.lower;
                upperSum += interval.upper;
            }
        } while (lowerSum > 1.0 || upperSum < 1.0);
        std::vector<double> values(n);
        for (auto& value : values) {
            value = uniform();
        }
        for (Direction sense : {Direction::Max, Direction::Min}) {
            auto [extremum, witness] = innerExtremum(intervals, values, sense);
            double reference = vertexEnumerationExtremum(intervals, values, sense == Direction::Max);
            CHECK(std::abs(extremum - reference) < 1e-9);
            // witness feasibility
            double sum = 0.0;
            double expectation = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(witness[i] >= intervals[i].lower - 1e-12);
                CHECK(witness[i] <= intervals[i].upper + 1e-12);
                sum += witness[i];
                expectation += witness[i] * values[i];
            }
            CHECK(sum == doctest::Approx(1.0));
            CHECK(std::abs(expectation - extremum) < 1e-12);
        }
    }
}

TEST_CASE("interval orchard cooperative and robust values") {
    ExplicitModel model = intervalOrchard(1.0 / 36.0, true);
    BitVector goal = model.labels.at("PlayersWon");
    auto cooperative =
        checkIntervalReachability(model, goal, Direction::Max, UncertaintyMode::Cooperative);
    auto robust = checkIntervalReachability(model, goal, Direction::Max, UncertaintyMode::Robust);
    std::size_t initial = model.firstInitialState();
    CHECK(std::abs(cooperative.values[initial] - 0.7961) < 1e-4);
    CHECK(std::abs(robust.values[initial] - 0.4315) < 1e-4);

    // robust <= point <= cooperative pointwise
    OrchardConfig pointConfig;
    ExplicitModel pointModel = orchardModel(pointConfig);
    auto point = checkReachability(pointModel, pointModel.labels.at("PlayersWon"), Direction::Max);
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        CHECK(robust.values[s] <= point.values[s] + 1e-6);
        CHECK(point.values[s] <= cooperative.values[s] + 1e-6);
    }
}

TEST_CASE("degenerate intervals equal the point model") {
    ExplicitModel interval = intervalOrchard(0.0, false);
    OrchardConfig pointConfig;
    pointConfig.fruitTypes = {"APPLE", "CHERRY"};
    pointConfig.fruitsPerTree = 2;
    pointConfig.ravenDistance = 2;
    ExplicitModel point = orchardModel(pointConfig);
    BitVector goal = interval.labels.at("PlayersWon");
    auto pointResult = checkReachability(point, point.labels.at("PlayersWon"), Direction::Max);
    for (UncertaintyMode mode : {UncertaintyMode::Cooperative, UncertaintyMode::Robust}) {
        auto result = checkIntervalReachability(interval, goal, Direction::Max, mode);
        for (std::size_t s = 0; s < interval.numStates(); ++s) {
            CHECK(std::abs(result.values[s] - pointResult.values[s]) < 1e-6);
        }
    }
}

TEST_CASE("parametric orchard instantiates to the simplified game") {
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 2;
    config.ravenDistance = 2;
    ParametricModel parametric = orchardParametric(config);

    std::map<std::string, Rational> quarter;
    quarter["p"] = Rational(1, 4);
    quarter["q"] = Rational(1, 4);
    ExplicitModel instance = instantiate(parametric, quarter);
    CHECK(validate(instance).empty());
    auto result = checkReachability(instance, instance.labels.at("PlayersWon"), Direction::Max);
    CHECK(std::abs(result.values[instance.firstInitialState()] - 0.5711805425946498) < 1e-6);

    std::map<std::string, Rational> zero;
    zero["p"] = Rational(0);
    zero["q"] = Rational(0);
    ExplicitModel hopeless = instantiate(parametric, zero);
    auto zeroResult = checkReachability(hopeless, hopeless.labels.at("PlayersWon"), Direction::Max);
    CHECK(zeroResult.values[hopeless.firstInitialState()] == doctest::Approx(0.0));

    std::map<std::string, Rational> noRaven;
    noRaven["p"] = Rational(3, 10);
    noRaven["q"] = Rational(2, 5);
    ExplicitModel sure = instantiate(parametric, noRaven);
    auto oneResult = checkReachability(sure, sure.labels.at("PlayersWon"), Direction::Max);
    CHECK(std::abs(oneResult.values[sure.firstInitialState()] - 1.0) < 1e-6);
}

TEST_CASE("instantiation rejects out-of-range probabilities") {
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 1;
    config.ravenDistance = 1;
    ParametricModel parametric = orchardParametric(config);
    std::map<std::string, Rational> bad;
    bad["p"] = Rational(3, 4);
    bad["q"] = Rational(1, 4); // raven probability would be -5/4
    CHECK_THROWS_AS(instantiate(parametric, bad), ModelError);
}

TEST_CASE("parametric variant needs exactly two fruit types") {
    OrchardConfig config;
    config.fruitTypes = orchardFruitNames(4);
    CHECK_THROWS_AS(orchardParametric(config), UnsupportedError);
}

TEST_CASE("grid sampling is monotone in the basket probability") {
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 2;
    config.ravenDistance = 2;
    ParametricModel parametric = orchardParametric(config);
    BitVector goal = parametric.labels.at("PlayersWon");

    std::vector<Rational> axis;
    for (int i = 1; i <= 9; i += 2) {
        axis.emplace_back(i, 20); // 0.05 .. 0.45
    }
    auto rows = sampleGrid(parametric, goal, Direction::Max, {axis, axis});
    REQUIRE(rows.size() == axis.size() * axis.size());
    for (std::size_t p = 0; p < axis.size(); ++p) {
        double previous = -1.0;
        for (std::size_t q = 0; q < axis.size(); ++q) {
            auto const& row = rows[p * axis.size() + q];
            // grid corners where 1 - 2p - q goes negative are flagged invalid
            bool feasible = Rational(1) - 2 * row.point[0] - row.point[1] >= 0;
            CHECK(row.valid == feasible);
            if (!row.valid) {
                continue;
            }
            CHECK(row.value >= previous - 1e-9);
            previous = row.value;
        }
    }
    std::string csv = gridCsv(parametric, rows);
    CHECK(csv.rfind("p,q,value\n", 0) == 0);
}

TEST_CASE("single-point grid equals instantiate plus check") {
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 2;
    config.ravenDistance = 2;
    ParametricModel parametric = orchardParametric(config);
    BitVector goal = parametric.labels.at("PlayersWon");
    auto rows = sampleGrid(parametric, goal, Direction::Max, {{Rational(1, 4)}, {Rational(1, 4)}});
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].valid);
    CHECK(std::abs(rows[0].value - 0.5711805425946498) < 1e-6);
}
