// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stormlet/beliefs.hpp"
#include "stormlet/bisimulation.hpp"
#include "stormlet/engines.hpp"
#include "stormlet/lp.hpp"
#include "stormlet/model_json.hpp"
#include "stormlet/model_ops.hpp"
#include "stormlet/orchard.hpp"
#include "stormlet/prism.hpp"
#include "stormlet/properties.hpp"
#include "stormlet/simulate.hpp"
#include "stormlet/uncertain.hpp"

using namespace stormlet;

namespace {

constexpr double kSimplifiedWin = 0.5711805425946498;
constexpr double kFullWin = 0.6313572986959962;
constexpr double kRmaxRounds = 22.339089182046724;
constexpr double kRminRounds = 20.882789624542582;
constexpr double kCherryOptimal = 0.9120560407842777;

struct Harness {
    int failures = 0;

    void run(std::string const& name, std::function<void(std::vector<std::string>&)> body) {
        std::vector<std::string> notes;
        bool ok = true;
        std::string message;
        try {
            body(notes);
        } catch (std::exception const& error) {
            ok = false;
            message = error.what();
        }
        if (ok) {
            std::cout << "[PASS] " << name;
        } else {
            std::cout << "[FAIL] " << name;
            ++failures;
        }
        for (auto const& note : notes) {
            std::cout << " | " << note;
        }
        if (!message.empty()) {
            std::cout << " | " << message;
        }
        std::cout << std::endl;
    }
};

void require(bool condition, std::string const& message) {
    if (!condition) {
        throw std::runtime_error(message);
    }
}

void requireClose(double actual, double expected, double tolerance, std::string const& what) {
    if (!(std::abs(actual - expected) <= tolerance)) {
        std::ostringstream out;
        out << what << ": got " << formatDouble(actual) << ", expected " << formatDouble(expected) << " +- "
            << formatDouble(tolerance);
        throw std::runtime_error(out.str());
    }
}

OrchardConfig simplifiedConfig() {
    OrchardConfig config;
    config.fruitTypes = {"APPLE", "CHERRY"};
    config.fruitsPerTree = 2;
    config.ravenDistance = 2;
    return config;
}

ExplicitModel const& simplifiedOrchard() {
    static ExplicitModel model = [] {
        OrchardConfig config = simplifiedConfig();
        config.diagnosticLabels = true;
        return orchardModel(config);
    }();
    return model;
}

ExplicitModel const& fullOrchard() {
    static ExplicitModel model = [] {
        OrchardConfig config;
        config.allPickedLabels = true;
        return orchardModel(config);
    }();
    return model;
}

ExplicitModel const& prismOrchard() {
    static ExplicitModel model = [] {
        PrismProgram program = parsePrism(readTextFile(std::string(STORMLET_SOURCE_DIR) + "/models/orchard.pm"));
        std::map<std::string, Rational> bindings;
        bindings["NUM_FRUIT"] = 4;
        bindings["DISTANCE_RAVEN"] = 5;
        return buildFromPrism(instantiateConstants(program, bindings));
    }();
    return model;
}

double initialValue(ExplicitModel const& model, CheckResult const& result) {
    return result.values[model.firstInitialState()];
}

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

/// Optimal bounded win probability directly on the game rules.
double bruteForceBoundedWin(int types, int perTree, int distance, int budget);

/// Seeded 30-state random MDP with exact row sums.
ExplicitModel randomMdp(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::size_t const numStates = 30;
    auto randomInt = [&](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
    };
    ExplicitModel model;
    model.kind = ModelKind::Mdp;
    BitVector goal(numStates);
    for (int i = 0; i < 3; ++i) {
        goal.set(randomInt(0, numStates - 1));
    }
    for (std::size_t s = 0; s < numStates; ++s) {
        model.matrix.newRowGroup();
        if (goal.get(s)) {
            model.matrix.newRow();
            model.matrix.pushEntry(MatrixEntry::point(static_cast<uint32_t>(s), 1.0));
            continue;
        }
        std::size_t numChoices = randomInt(1, 3);
        for (std::size_t c = 0; c < numChoices; ++c) {
            model.matrix.newRow();
            std::map<uint32_t, double> weights;
            std::size_t numSuccessors = randomInt(1, 4);
            for (std::size_t k = 0; k < numSuccessors; ++k) {
                weights[static_cast<uint32_t>(randomInt(0, numStates - 1))] +=
                    1.0 + static_cast<double>(rng() % 1000);
            }
            double total = 0.0;
            for (auto const& [column, weight] : weights) {
                total += weight;
            }
            double emitted = 0.0;
            std::size_t index = 0;
            for (auto const& [column, weight] : weights) {
                double p = index + 1 == weights.size() ? 1.0 - emitted : weight / total;
                model.matrix.pushEntry(MatrixEntry::point(column, p));
                emitted += p;
                ++index;
            }
        }
    }
    model.initialStates = BitVector(numStates);
    model.initialStates.set(0);
    model.labels.emplace("goal", goal);
    return model;
}

} // namespace

int main() {
    Harness harness;

    harness.run("criterion 1: state-space golden numbers", [](std::vector<std::string>& notes) {
        ModelCounts simple = counts(simplifiedOrchard());
        require(simple.states == 90, "simplified states != 90");
        require(simple.distinctChoiceLabels == 7, "simplified choice labels != 7");
        require(simple.distinctLabels == 33, "simplified labels != 33");
        ModelCounts full = counts(fullOrchard());
        require(full.states == 22469, "full states != 22469");
        ModelCounts prism = counts(prismOrchard());
        require(prism.states == 22469, "prism states != 22469");
        require(prism.transitions == 44954, "prism transitions != 44954");
        notes.push_back("simplified 90/7/33, full 22469, prism 22469/44954");
    });

    harness.run("criterion 2: reachability values and methods", [](std::vector<std::string>& notes) {
        Environment tight;
        tight.precision = 1e-9;
        OrchardConfig plainSimple = simplifiedConfig();
        ExplicitModel simple = orchardModel(plainSimple);
        double simplified =
            initialValue(simple, checkReachability(simple, simple.label("PlayersWon"), Direction::Max, tight));
        requireClose(simplified, kSimplifiedWin, 1e-6, "simplified Pmax win");

        ExplicitModel const& full = fullOrchard();
        BitVector goal = full.label("PlayersWon");
        for (Method method : {Method::ValueIteration, Method::GaussSeidel, Method::PolicyIteration,
                              Method::OptimisticValueIteration}) {
            Environment env;
            env.method = method;
            double value = initialValue(full, checkReachability(full, goal, Direction::Max, env));
            requireClose(value, 0.631357, 1e-5, "full Pmax win via " + toString(method));
        }
        auto bounds = checkReachabilityBounds(full, goal, Direction::Max);
        std::size_t initial = full.firstInitialState();
        require(bounds[initial].lower <= kFullWin && kFullWin <= bounds[initial].upper,
                "ovi interval misses the value");
        require(bounds[initial].upper - bounds[initial].lower <= 1e-6, "ovi interval too wide");
        notes.push_back("ovi interval [" + formatDouble(bounds[initial].lower, 10) + ", " +
                        formatDouble(bounds[initial].upper, 10) + "]");
    });

    harness.run("criterion 3: expected total rounds", [](std::vector<std::string>& notes) {
        ExplicitModel const& full = fullOrchard();
        BitVector ended = full.label("PlayersWon") | full.label("RavenWon");
        double rmax = initialValue(full, checkTotalReward(full, "rounds", ended, Direction::Max));
        double rmin = initialValue(full, checkTotalReward(full, "rounds", ended, Direction::Min));
        requireClose(rmax, kRmaxRounds, 1e-4, "Rmax rounds");
        requireClose(rmin, kRminRounds, 1e-4, "Rmin rounds");
        notes.push_back("rounds in [" + formatDouble(rmin, 8) + ", " + formatDouble(rmax, 8) + "]");
    });

    harness.run("criterion 4: reward-bounded reachability", [](std::vector<std::string>& notes) {
        ExplicitModel const& full = fullOrchard();
        BitVector goal = full.label("PlayersWon");
        double atFifteen = initialValue(full, checkBoundedReachability(full, "rounds", 15, goal, Direction::Max));
        require(atFifteen == 0.0, "k=15 must be exactly zero");
        double previous = -1.0;
        double atBudget = 0.0;
        for (int budget : {15, 16, 18, 20, 24, 32, 48, 80, 120}) {
            atBudget = initialValue(full, checkBoundedReachability(full, "rounds", budget, goal, Direction::Max));
            require(atBudget >= previous - 1e-9, "bounded value must be nondecreasing in k");
            previous = atBudget;
        }
        requireClose(atBudget, 0.631357, 1e-3, "k=120 approaches the unbounded value");
        // brute-force verification of the zero region on tiny configurations
        for (int budget = 0; budget <= 5; ++budget) {
            OrchardConfig tiny;
            tiny.fruitTypes = {"APPLE", "CHERRY"};
            tiny.fruitsPerTree = 1;
            tiny.ravenDistance = 2;
            ExplicitModel model = orchardModel(tiny);
            double checked =
                initialValue(model, checkBoundedReachability(model, "rounds", budget, model.label("PlayersWon"),
                                                             Direction::Max));
            requireClose(checked, bruteForceBoundedWin(2, 1, 2, budget), 1e-9,
                         "tiny bounded value at k=" + std::to_string(budget));
        }
        notes.push_back("k=120 value " + formatDouble(atBudget, 8));
    });

    harness.run("criterion 5: policy extraction and induced analysis", [](std::vector<std::string>& notes) {
        ExplicitModel const& full = fullOrchard();
        BitVector win = full.label("PlayersWon");
        auto result = checkReachability(full, win, Direction::Max, Environment(), true);
        ExplicitModel induced = applyScheduler(full, *result.scheduler);
        auto recheck = solveDtmcReachability(induced, win);
        for (std::size_t s = 0; s < full.numStates(); ++s) {
            require(std::abs(recheck.values[s] - result.values[s]) <= 1e-5,
                    "induced chain misses the optimum at state " + std::to_string(s));
        }
        BitVector cherries = full.label("allCherriesPicked");
        double optimal = initialValue(full, checkReachability(full, cherries, Direction::Max));
        requireClose(optimal, kCherryOptimal, 1e-5, "Pmax allCherriesPicked");
        double fixed = initialValue(induced, solveDtmcReachability(induced, cherries));
        require(fixed <= kCherryOptimal + 1e-5, "induced cherry value above the optimum");
        notes.push_back("induced cherry value " + formatDouble(fixed, 8) + " (tie-breaking dependent)");
    });

    harness.run("criterion 6: interval mdp", [](std::vector<std::string>& notes) {
        OrchardConfig config;
        config.variant = OrchardVariant::Interval;
        config.intervalEpsilon = 1.0 / 36.0;
        ExplicitModel interval = orchardModel(config);
        BitVector goal = interval.label("PlayersWon");
        auto cooperative = checkIntervalReachability(interval, goal, Direction::Max, UncertaintyMode::Cooperative);
        auto robust = checkIntervalReachability(interval, goal, Direction::Max, UncertaintyMode::Robust);
        std::size_t initial = interval.firstInitialState();
        requireClose(cooperative.values[initial], 0.7961, 1e-4, "cooperative value");
        requireClose(robust.values[initial], 0.4315, 1e-4, "robust value");

        OrchardConfig pointConfig;
        ExplicitModel point = orchardModel(pointConfig);
        auto pointResult = checkReachability(point, point.label("PlayersWon"), Direction::Max);
        for (std::size_t s = 0; s < interval.numStates(); ++s) {
            require(robust.values[s] <= pointResult.values[s] + 1e-6, "robust above point");
            require(pointResult.values[s] <= cooperative.values[s] + 1e-6, "point above cooperative");
        }

        std::mt19937_64 rng(20240601);
        auto uniform = [&]() { return static_cast<double>(rng() % 10000) / 10000.0; };
        for (int trial = 0; trial < 1000; ++trial) {
            std::size_t n = 2 + rng() % 5;
            std::vector<Interval> intervals(n);
            double lowerSum;
            double upperSum;
            do {
                lowerSum = upperSum = 0.0;
                for (auto& iv : intervals) {
                    double a = uniform();
                    double b = uniform();
                    iv.lower = std::min(a, b) / static_cast<double>(n);
                    iv.upper = std::max(a, b);
                    lowerSum += iv.lower;
                    upperSum += iv.upper;
                }
            } while (lowerSum > 1.0 || upperSum < 1.0);
            std::vector<double> values(n);
            for (auto& value : values) {
                value = uniform();
            }
            for (Direction sense : {Direction::Max, Direction::Min}) {
                auto [extremum, witness] = innerExtremum(intervals, values, sense);
                (void)witness;
                double reference = vertexEnumerationExtremum(intervals, values, sense == Direction::Max);
                require(std::abs(extremum - reference) < 1e-9, "inner extremum mismatch");
            }
        }
        notes.push_back("cooperative " + formatDouble(cooperative.values[initial], 6) + ", robust " +
                        formatDouble(robust.values[initial], 6));
    });

    harness.run("criterion 7: parametric instantiation", [](std::vector<std::string>& notes) {
        OrchardConfig config = simplifiedConfig();
        ParametricModel parametric = orchardParametric(config);
        auto evaluateAt = [&](Rational p, Rational q) {
            std::map<std::string, Rational> valuation;
            valuation["p"] = p;
            valuation["q"] = q;
            ExplicitModel instance = instantiate(parametric, valuation);
            Environment env;
            env.precision = 1e-9;
            return initialValue(instance,
                                checkReachability(instance, instance.label("PlayersWon"), Direction::Max, env));
        };
        requireClose(evaluateAt(Rational(1, 4), Rational(1, 4)), kSimplifiedWin, 1e-6, "p=q=1/4");
        require(evaluateAt(Rational(0), Rational(0)) == 0.0, "p=q=0 must be zero");
        requireClose(evaluateAt(Rational(3, 10), Rational(2, 5)), 1.0, 1e-6, "1-2p-q=0");
        notes.push_back("endpoints 0 and 1 reproduced");
    });

    harness.run("criterion 8: pomdp belief analysis", [](std::vector<std::string>& notes) {
        OrchardConfig config;
        config.variant = OrchardVariant::Pomdp;
        ExplicitModel pomdp = orchardModel(config);
        auto bounds = checkPomdpReachability(pomdp, "PlayersWon");
        require(bounds.converged, "base pomdp bounds did not close");
        require(bounds.upperBound - bounds.lowerBound <= 1e-4, "base pomdp gap above 1e-4");
        requireClose(bounds.lowerBound, 0.631357, 1e-4, "pomdp lower bound");
        requireClose(bounds.upperBound, 0.631357, 1e-4, "pomdp upper bound");
        require(bounds.maxSupportSize == 1, "base-game beliefs must stay point beliefs");
        std::size_t observations = counts(pomdp).observationCount;
        notes.push_back("observations " + std::to_string(observations) + " (reference build: 546)");

        // steal-variant ordering properties on the simplified game
        OrchardConfig stealConfig = simplifiedConfig();
        stealConfig.variant = OrchardVariant::PomdpSteal;
        stealConfig.stealCount = 2;
        ExplicitModel steal = orchardModel(stealConfig);
        OrchardConfig baseConfig = simplifiedConfig();
        baseConfig.variant = OrchardVariant::Pomdp;
        ExplicitModel base = orchardModel(baseConfig);
        double stealMdp =
            fullyObservableValue(steal, steal.label("PlayersWon"), Direction::Max).values[steal.firstInitialState()];
        double baseMdp =
            fullyObservableValue(base, base.label("PlayersWon"), Direction::Max).values[base.firstInitialState()];
        auto stealBounds = checkPomdpReachability(steal, "PlayersWon");
        require(stealBounds.upperBound <= stealMdp + 1e-6, "steal pomdp above its mdp value");
        require(stealMdp >= baseMdp - 1e-6, "stealing must not hurt the informed player");
        notes.push_back("steal mdp " + formatDouble(stealMdp, 6) + " vs base mdp " + formatDouble(baseMdp, 6));
    });

    harness.run("criterion 9: bisimulation quotient", [](std::vector<std::string>& notes) {
        ExplicitModel const& model = prismOrchard();
        BisimulationOptions options;
        options.preservedLabels = {"PlayersWon", "RavenWon"};
        auto [quotient, partition] = bisimulationQuotient(model, options);
        (void)partition;
        require(quotient.numStates() <= model.numStates() / 10, "less than 90% reduction");
        Environment env;
        env.precision = 1e-9;
        for (std::string prop : {"Pmax=? [F \"PlayersWon\"]", "Pmin=? [F \"PlayersWon\"]",
                                 "R{\"rounds\"}max=? [F \"PlayersWon\" | \"RavenWon\"]",
                                 "R{\"rounds\"}min=? [F \"PlayersWon\" | \"RavenWon\"]"}) {
            PropertyAst ast = parseProperty(prop);
            double original = evaluateProperty(model, ast, env).result.values[model.firstInitialState()];
            double reduced = evaluateProperty(quotient, ast, env).result.values[quotient.firstInitialState()];
            require(std::abs(original - reduced) < 1e-6, "quotient changed " + prop);
        }
        notes.push_back("quotient " + std::to_string(quotient.numStates()) + " states, " +
                        std::to_string(quotient.numTransitions()) + " transitions (reference build: 956/2446)");
    });

    harness.run("criterion 10: lp encoding and solver", [](std::vector<std::string>& notes) {
        OrchardConfig config = simplifiedConfig();
        ExplicitModel simple = orchardModel(config);
        BitVector goal = simple.label("PlayersWon");
        auto lpValues = solveLp(encodeReachabilityLp(simple, goal));
        Environment env;
        env.precision = 1e-10;
        auto viValues = checkReachability(simple, goal, Direction::Max, env).values;
        for (std::size_t s = 0; s < simple.numStates(); ++s) {
            require(std::abs(lpValues[s] - viValues[s]) < 1e-6, "lp != vi at state " + std::to_string(s));
        }

        // golden export
        ExplicitModel chain;
        chain.kind = ModelKind::Dtmc;
        chain.matrix.newRowGroup();
        chain.matrix.newRow();
        chain.matrix.pushEntry(MatrixEntry::point(0, 0.5));
        chain.matrix.pushEntry(MatrixEntry::point(1, 0.5));
        chain.matrix.newRowGroup();
        chain.matrix.newRow();
        chain.matrix.pushEntry(MatrixEntry::point(1, 1.0));
        chain.initialStates = BitVector(2);
        chain.initialStates.set(0);
        BitVector chainGoal(2);
        chainGoal.set(1);
        std::string expected = "Minimize\n obj: x0 + x1\nSubject To\n c0: 0.5 x0 - 0.5 x1 >= 0\n c1: x1 = 1\n"
                               "Bounds\n 0 <= x0 <= 1\n 0 <= x1 <= 1\nEnd\n";
        require(exportLp(encodeReachabilityLp(chain, chainGoal)) == expected, "lp export not byte-stable");

        for (uint64_t seed = 1; seed <= 100; ++seed) {
            ExplicitModel random = randomMdp(seed);
            BitVector randomGoal = random.label("goal");
            auto lp = solveLp(encodeReachabilityLp(random, randomGoal));
            Environment tight;
            tight.precision = 1e-11;
            auto vi = checkReachability(random, randomGoal, Direction::Max, tight).values;
            for (std::size_t s = 0; s < random.numStates(); ++s) {
                require(std::abs(lp[s] - vi[s]) < 1e-6, "random lp mismatch at seed " + std::to_string(seed));
            }
        }
        notes.push_back("100 random 30-state mdps solved");
    });

    harness.run("criterion 11: cross-model oracle", [](std::vector<std::string>& notes) {
        ExplicitModel const& bird = fullOrchard();
        ExplicitModel const& prism = prismOrchard();
        Environment env;
        env.precision = 1e-9;
        for (std::string prop : {"Pmax=? [F \"PlayersWon\"]", "Pmin=? [F \"PlayersWon\"]",
                                 "R{\"rounds\"}max=? [F \"PlayersWon\" | \"RavenWon\"]",
                                 "R{\"rounds\"}min=? [F \"PlayersWon\" | \"RavenWon\"]"}) {
            PropertyAst ast = parseProperty(prop);
            double birdValue = evaluateProperty(bird, ast, env).result.values[bird.firstInitialState()];
            double prismValue = evaluateProperty(prism, ast, env).result.values[prism.firstInitialState()];
            require(std::abs(birdValue - prismValue) < 1e-6, "models disagree on " + prop);
        }
        notes.push_back("bird and prism builds agree on all four queries");
    });

    harness.run("criterion 12: property suites", [](std::vector<std::string>& notes) {
        // value iteration monotone from below
        OrchardConfig config = simplifiedConfig();
        ExplicitModel simple = orchardModel(config);
        BitVector goal = simple.label("PlayersWon");
        std::vector<double> values(simple.numStates(), 0.0);
        std::vector<double> previous = values;
        for (int iteration = 0; iteration < 50; ++iteration) {
            std::vector<double> next(values.size(), 0.0);
            for (std::size_t s = 0; s < simple.numStates(); ++s) {
                if (goal.get(s)) {
                    next[s] = 1.0;
                    continue;
                }
                double best = 0.0;
                for (uint64_t row = simple.matrix.rowGroupBegin(s); row < simple.matrix.rowGroupEnd(s); ++row) {
                    double q = 0.0;
                    for (auto const& entry : simple.matrix.row(row)) {
                        q += entry.lower * values[entry.column];
                    }
                    best = std::max(best, q);
                }
                next[s] = best;
            }
            values = next;
            for (std::size_t s = 0; s < values.size(); ++s) {
                require(values[s] >= previous[s] - 1e-15, "vi iterate decreased");
            }
            previous = values;
        }

        // row-sum validation catches a broken model
        ExplicitModel broken;
        broken.kind = ModelKind::Dtmc;
        broken.matrix.newRowGroup();
        broken.matrix.newRow();
        broken.matrix.pushEntry(MatrixEntry::point(0, 0.9));
        broken.initialStates = BitVector(1);
        broken.initialStates.set(0);
        require(validate(broken).size() == 1, "row-sum violation not flagged");

        // serialization round trip
        ExplicitModel reloaded = readModelJson(writeModelJson(simple));
        require(counts(reloaded).transitions == counts(simple).transitions, "round trip changed the model");

        // simulator determinism and monte-carlo agreement
        ExplicitModel const& full = fullOrchard();
        auto winResult = checkReachability(full, full.label("PlayersWon"), Direction::Max, Environment(), true);
        SimulationOptions simOptions;
        simOptions.seed = 1;
        simOptions.runs = 10000;
        auto traces = simulate(full, &*winResult.scheduler, simOptions);
        auto tracesAgain = simulate(full, &*winResult.scheduler, simOptions);
        require(traces.size() == tracesAgain.size(), "trace count changed");
        for (std::size_t run = 0; run < traces.size(); ++run) {
            require(traces[run].steps.size() == tracesAgain[run].steps.size(), "trace length changed");
            require(traces[run].steps.back().state == tracesAgain[run].steps.back().state,
                    "trace end state changed");
        }
        std::size_t wins = 0;
        for (auto const& trace : traces) {
            if (full.label("PlayersWon").get(trace.steps.back().state)) {
                ++wins;
            }
        }
        double frequency = static_cast<double>(wins) / static_cast<double>(traces.size());
        requireClose(frequency, kFullWin, 0.02, "monte-carlo frequency");
        notes.push_back("empirical win frequency " + formatDouble(frequency, 6));
    });

    std::cout << (harness.failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(harness.failures))
              << std::endl;
    return harness.failures == 0 ? 0 : 1;
}

namespace {

double bruteForceBoundedWin(int types, int perTree, int distance, int budget) {
    struct State {
        std::vector<int> counts;
        int raven;
        int dice;
        bool operator<(State const& other) const {
            return std::tie(counts, raven, dice) < std::tie(other.counts, other.raven, other.dice);
        }
    };
    std::map<std::pair<State, int>, double> memo;
    std::function<double(State const&, int)> value = [&](State const& state, int remaining) -> double {
        bool allEmpty = true;
        for (int c : state.counts) {
            if (c > 0) {
                allEmpty = false;
            }
        }
        if (allEmpty) {
            return 1.0;
        }
        if (state.raven == 0) {
            return 0.0;
        }
        auto key = std::make_pair(state, remaining);
        auto it = memo.find(key);
        if (it != memo.end()) {
            return it->second;
        }
        double result = 0.0;
        if (state.dice == -1) {
            if (remaining > 0) {
                double sum = 0.0;
                for (int outcome = 0; outcome <= types + 1; ++outcome) {
                    State next = state;
                    next.dice = outcome;
                    sum += value(next, remaining - 1);
                }
                result = sum / static_cast<double>(types + 2);
            }
        } else if (state.dice < types) {
            State next = state;
            if (next.counts[state.dice] > 0) {
                --next.counts[state.dice];
            }
            next.dice = -1;
            result = value(next, remaining);
        } else if (state.dice == types) {
            for (int f = 0; f < types; ++f) {
                if (state.counts[f] > 0) {
                    State next = state;
                    --next.counts[f];
                    next.dice = -1;
                    result = std::max(result, value(next, remaining));
                }
            }
        } else {
            State next = state;
            --next.raven;
            next.dice = -1;
            result = value(next, remaining);
        }
        memo.emplace(key, result);
        return result;
    };
    State initial;
    initial.counts.assign(static_cast<std::size_t>(types), perTree);
    initial.raven = distance;
    initial.dice = -1;
    return value(initial, budget);
}

} // namespace
