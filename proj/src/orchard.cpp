#include "stormlet/orchard.hpp"

#include <deque>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "stormlet/exceptions.hpp"
#include "stormlet/explore.hpp"

namespace stormlet {

namespace {

enum class GameState { NotEnded, PlayersWon, RavenWon };

struct OrchardState {
    std::vector<uint8_t> counts;
    int raven = 0;
    int dice = -1; // -1: not thrown; 0..T-1: fruit; T: basket; T+1: raven
    int steals = 0; // remaining hidden pre-game steal steps

    bool operator==(OrchardState const& other) const = default;
};

struct OrchardStateHash {
    std::size_t operator()(OrchardState const& state) const {
        std::size_t h = 0xcbf29ce484222325ull;
        auto mix = [&h](std::size_t v) { h = (h ^ v) * 0x100000001b3ull; };
        for (uint8_t c : state.counts) {
            mix(c);
        }
        mix(static_cast<std::size_t>(state.raven + 1));
        mix(static_cast<std::size_t>(state.dice + 2));
        mix(static_cast<std::size_t>(state.steals));
        return h;
    }
};

GameState gameStateOf(OrchardState const& state) {
    bool allEmpty = true;
    for (uint8_t c : state.counts) {
        if (c > 0) {
            allEmpty = false;
            break;
        }
    }
    if (allEmpty) {
        return GameState::PlayersWon;
    }
    if (state.raven == 0) {
        return GameState::RavenWon;
    }
    return GameState::NotEnded;
}

std::string pluralOf(std::string const& fruit) {
    if (fruit == "APPLE") {
        return "Apples";
    }
    if (fruit == "PEAR") {
        return "Pears";
    }
    if (fruit == "CHERRY") {
        return "Cherries";
    }
    if (fruit == "PLUM") {
        return "Plums";
    }
    std::string lowered = fruit;
    for (std::size_t i = 1; i < lowered.size(); ++i) {
        lowered[i] = static_cast<char>(::tolower(lowered[i]));
    }
    return lowered + "s";
}

void checkConfig(OrchardConfig const& config) {
    if (config.fruitTypes.empty()) {
        throw ModelError("orchard config: need at least one fruit type");
    }
    if (config.fruitsPerTree < 1 || config.ravenDistance < 1) {
        throw ModelError("orchard config: fruits per tree and raven distance must be positive");
    }
    if (config.variant == OrchardVariant::Interval) {
        double fair = 1.0 / (static_cast<double>(config.fruitTypes.size()) + 2.0);
        if (fair - config.intervalEpsilon < 0.0) {
            throw ModelError("orchard config: interval epsilon yields a negative lower endpoint");
        }
    }
    if (config.variant == OrchardVariant::PomdpSteal) {
        int totalFruit = static_cast<int>(config.fruitTypes.size()) * config.fruitsPerTree;
        if (config.stealCount < 0 || config.stealCount >= totalFruit) {
            throw ModelError("orchard config: steal count must lie in [0, total fruit)");
        }
    }
}

struct OrchardRules {
    OrchardConfig config;
    int numTypes;
    double fairDiceProb;

    explicit OrchardRules(OrchardConfig const& c)
        : config(c), numTypes(static_cast<int>(c.fruitTypes.size())),
          fairDiceProb(1.0 / (static_cast<double>(c.fruitTypes.size()) + 2.0)) {}

    OrchardState initialState() const {
        OrchardState state;
        state.counts.assign(static_cast<std::size_t>(numTypes), static_cast<uint8_t>(config.fruitsPerTree));
        state.raven = config.ravenDistance;
        state.dice = -1;
        state.steals = config.variant == OrchardVariant::PomdpSteal ? config.stealCount : 0;
        return state;
    }

    std::vector<std::string> availableActions(OrchardState const& state) const {
        if (state.steals > 0) {
            return {"steal"};
        }
        if (gameStateOf(state) != GameState::NotEnded) {
            return {"gameEnded"};
        }
        if (state.dice < 0) {
            return {"nextRound"};
        }
        if (state.dice < numTypes) {
            return {"pick" + config.fruitTypes[static_cast<std::size_t>(state.dice)]};
        }
        if (state.dice == numTypes) {
            std::vector<std::string> actions;
            for (int f = 0; f < numTypes; ++f) {
                if (state.counts[static_cast<std::size_t>(f)] > 0) {
                    actions.push_back("choose" + config.fruitTypes[static_cast<std::size_t>(f)]);
                }
            }
            return actions;
        }
        return {"moveRaven"};
    }

    std::vector<TransitionTarget<OrchardState>> delta(OrchardState const& state, std::string const& action) const {
        using Target = TransitionTarget<OrchardState>;
        std::vector<Target> targets;
        if (state.steals > 0) {
            std::vector<int> nonEmpty;
            for (int f = 0; f < numTypes; ++f) {
                if (state.counts[static_cast<std::size_t>(f)] > 0) {
                    nonEmpty.push_back(f);
                }
            }
            double p = 1.0 / static_cast<double>(nonEmpty.size());
            for (int f : nonEmpty) {
                OrchardState next = state;
                --next.counts[static_cast<std::size_t>(f)];
                --next.steals;
                targets.push_back(Target::point(p, std::move(next)));
            }
            return targets;
        }
        if (gameStateOf(state) != GameState::NotEnded) {
            targets.push_back(Target::point(1.0, state));
            return targets;
        }
        if (state.dice < 0) {
            bool widen = config.variant == OrchardVariant::Interval;
            double eps = config.intervalEpsilon;
            auto outcome = [&](int dice) {
                OrchardState next = state;
                next.dice = dice;
                if (widen) {
                    targets.push_back(Target::bounded(fairDiceProb - eps, fairDiceProb + eps, std::move(next)));
                } else {
                    targets.push_back(Target::point(fairDiceProb, std::move(next)));
                }
            };
            for (int f = 0; f < numTypes; ++f) {
                outcome(f);
            }
            outcome(numTypes);     // basket
            outcome(numTypes + 1); // raven
            return targets;
        }
        OrchardState next = state;
        if (state.dice < numTypes) {
            // pick the thrown fruit if any is left
            auto& count = next.counts[static_cast<std::size_t>(state.dice)];
            if (count > 0) {
                --count;
            }
        } else if (state.dice == numTypes) {
            std::string fruit = action.substr(std::string("choose").size());
            for (int f = 0; f < numTypes; ++f) {
                if (config.fruitTypes[static_cast<std::size_t>(f)] == fruit) {
                    --next.counts[static_cast<std::size_t>(f)];
                    break;
                }
            }
        } else {
            --next.raven;
        }
        next.dice = -1;
        targets.push_back(Target::point(1.0, std::move(next)));
        return targets;
    }

    std::vector<std::string> labelsOf(OrchardState const& state) const {
        std::vector<std::string> labels;
        if (state.steals > 0) {
            return labels;
        }
        GameState game = gameStateOf(state);
        if (config.diagnosticLabels) {
            if (state.dice < 0) {
                std::ostringstream text;
                for (int f = 0; f < numTypes; ++f) {
                    text << static_cast<int>(state.counts[static_cast<std::size_t>(f)]) << "-"
                         << config.fruitTypes[static_cast<std::size_t>(f)] << ", ";
                }
                text << state.raven << "+RAVEN";
                labels.push_back(text.str());
            } else if (state.dice < numTypes) {
                labels.push_back("thrown:" + config.fruitTypes[static_cast<std::size_t>(state.dice)]);
            } else if (state.dice == numTypes) {
                labels.push_back("thrown:BASKET");
            } else {
                labels.push_back("thrown:RAVEN");
            }
        }
        if (game == GameState::PlayersWon) {
            labels.push_back("PlayersWon");
        } else if (game == GameState::RavenWon) {
            labels.push_back("RavenWon");
        }
        if (config.allPickedLabels && state.raven > 0) {
            for (int f = 0; f < numTypes; ++f) {
                if (state.counts[static_cast<std::size_t>(f)] == 0) {
                    labels.push_back("all" + pluralOf(config.fruitTypes[static_cast<std::size_t>(f)]) + "Picked");
                }
            }
        }
        return labels;
    }

    std::map<std::string, double> rewardsOf(OrchardState const& state, std::string const& action) const {
        (void)action;
        if (state.steals == 0 && gameStateOf(state) == GameState::NotEnded && state.dice < 0) {
            return {{"rounds", 1.0}};
        }
        return {};
    }
};

} // namespace

std::vector<std::string> orchardFruitNames(int count) {
    static std::vector<std::string> const standard = {"APPLE", "CHERRY", "PEAR", "PLUM"};
    std::vector<std::string> names;
    for (int i = 0; i < count; ++i) {
        if (i < static_cast<int>(standard.size())) {
            names.push_back(standard[static_cast<std::size_t>(i)]);
        } else {
            names.push_back("FRUIT" + std::to_string(i + 1));
        }
    }
    return names;
}

ExplicitModel orchardModel(OrchardConfig const& config) {
    checkConfig(config);
    if (config.variant == OrchardVariant::Parametric) {
        throw ModelError("orchard config: parametric variant is built via orchardParametric");
    }
    auto rules = std::make_shared<OrchardRules>(config);

    ExplorationSpec<OrchardState> spec;
    spec.initialState = rules->initialState();
    spec.availableActions = [rules](OrchardState const& s) { return rules->availableActions(s); };
    spec.delta = [rules](OrchardState const& s, std::string const& a) { return rules->delta(s, a); };
    spec.labelsOf = [rules](OrchardState const& s) { return rules->labelsOf(s); };
    spec.rewardsOf = [rules](OrchardState const& s, std::string const& a) { return rules->rewardsOf(s, a); };
    spec.maxSize = config.maxSize;

    bool pomdp = config.variant == OrchardVariant::Pomdp || config.variant == OrchardVariant::PomdpSteal;
    if (pomdp) {
        spec.kind = ModelKind::Pomdp;
        // Observation: which trees are empty, the dice outcome, and the raven
        // distance. All hidden steal states share one observation.
        auto table = std::make_shared<std::map<std::vector<int>, uint32_t>>();
        spec.observationOf = [rules, table](OrchardState const& state) {
            std::vector<int> key;
            if (state.steals > 0) {
                key = {-1};
            } else {
                for (uint8_t c : state.counts) {
                    key.push_back(c == 0 ? 1 : 0);
                }
                key.push_back(state.dice);
                key.push_back(state.raven);
            }
            auto [it, inserted] = table->emplace(std::move(key), static_cast<uint32_t>(table->size()));
            return it->second;
        };
    } else if (config.variant == OrchardVariant::Interval) {
        spec.kind = ModelKind::Imdp;
    } else {
        spec.kind = ModelKind::Mdp;
    }

    return explore<OrchardState, OrchardStateHash>(spec);
}

ParametricModel orchardParametric(OrchardConfig const& config) {
    checkConfig(config);
    if (config.fruitTypes.size() != 2) {
        throw UnsupportedError("parametric orchard requires exactly 2 fruit types, got " +
                               std::to_string(config.fruitTypes.size()));
    }
    OrchardRules rules(config);

    ParametricModel model;
    model.parameters = {"p", "q"};
    ParamExpr p = ParamExpr::parameter(0);
    ParamExpr q = ParamExpr::parameter(1);
    ParamExpr ravenProb = ParamExpr::sub(
        ParamExpr::sub(ParamExpr::constant(Rational(1)), ParamExpr::mul(ParamExpr::constant(Rational(2)), p)), q);
    ParamExpr one = ParamExpr::constant(Rational(1));

    std::vector<OrchardState> states;
    std::unordered_map<OrchardState, uint32_t, OrchardStateHash> indexOf;
    auto discover = [&](OrchardState const& state) -> uint32_t {
        auto it = indexOf.find(state);
        if (it != indexOf.end()) {
            return it->second;
        }
        uint32_t index = static_cast<uint32_t>(states.size());
        states.push_back(state);
        indexOf.emplace(state, index);
        return index;
    };
    discover(rules.initialState());

    std::vector<std::string> choiceLabels;
    std::map<std::string, std::vector<std::size_t>> labelStates;
    std::vector<std::pair<std::size_t, double>> roundRewards;

    for (std::size_t current = 0; current < states.size(); ++current) {
        OrchardState state = states[current];
        model.newRowGroup();
        for (auto const& label : rules.labelsOf(state)) {
            labelStates[label].push_back(current);
        }
        for (auto const& action : rules.availableActions(state)) {
            std::size_t rowIndex = model.numChoices();
            model.newRow();
            choiceLabels.push_back(action);
            for (auto const& [name, value] : rules.rewardsOf(state, action)) {
                (void)name;
                roundRewards.emplace_back(rowIndex, value);
            }
            if (state.dice < 0 && gameStateOf(state) == GameState::NotEnded) {
                // dice throw: fruit outcomes p each, basket q, raven 1-2p-q
                std::map<uint32_t, ParamExpr> entries;
                for (int outcome = 0; outcome <= rules.numTypes + 1; ++outcome) {
                    OrchardState next = state;
                    next.dice = outcome;
                    ParamExpr expr = outcome < rules.numTypes ? p : (outcome == rules.numTypes ? q : ravenProb);
                    entries.emplace(discover(next), std::move(expr));
                }
                for (auto& [column, expr] : entries) {
                    model.pushEntry(ParametricEntry{column, std::move(expr)});
                }
            } else {
                auto targets = rules.delta(state, action);
                std::map<uint32_t, ParamExpr> entries;
                for (auto const& target : targets) {
                    entries.emplace(discover(target.state), ParamExpr::constant(rationalFromDouble(target.lower)));
                }
                for (auto& [column, expr] : entries) {
                    model.pushEntry(ParametricEntry{column, std::move(expr)});
                }
            }
        }
    }

    std::size_t numStates = states.size();
    model.initialStates = BitVector(numStates);
    model.initialStates.set(0);
    model.choiceLabels = std::move(choiceLabels);
    labelStates["init"].push_back(0);
    for (auto const& [name, indices] : labelStates) {
        BitVector bits(numStates);
        for (std::size_t s : indices) {
            bits.set(s);
        }
        model.labels.emplace(name, std::move(bits));
    }
    RewardStructure rounds;
    rounds.choiceRewards = std::vector<double>(model.numChoices(), 0.0);
    for (auto const& [row, value] : roundRewards) {
        (*rounds.choiceRewards)[row] = value;
    }
    model.rewards.emplace("rounds", std::move(rounds));
    return model;
}

} // namespace stormlet
