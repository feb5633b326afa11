#include "stormlet/model_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "stormlet/exceptions.hpp"

namespace stormlet {

namespace {

std::string stateRowContext(std::size_t state, std::size_t localRow) {
    std::ostringstream out;
    out << "state " << state << " row " << localRow;
    return out.str();
}

} // namespace

std::vector<std::string> validate(ExplicitModel const& model) {
    std::vector<std::string> violations;
    auto flag = [&](std::string const& message) { violations.push_back(message); };

    std::size_t numStates = model.numStates();
    std::size_t numRows = model.numChoices();

    if (model.initialStates.size() != numStates) {
        flag("initial-state vector has wrong length");
    } else if (numStates > 0 && model.initialStates.empty()) {
        flag("model has no initial state");
    }

    for (std::size_t state = 0; state < numStates; ++state) {
        std::size_t groupSize = model.matrix.rowGroupSize(state);
        if (groupSize == 0) {
            flag("state " + std::to_string(state) + ": no choice");
            continue;
        }
        if (model.kind == ModelKind::Dtmc && groupSize != 1) {
            flag("state " + std::to_string(state) + ": dtmc state with " + std::to_string(groupSize) + " choices");
        }
        for (uint64_t rowIndex = model.matrix.rowGroupBegin(state); rowIndex < model.matrix.rowGroupEnd(state);
             ++rowIndex) {
            std::size_t localRow = static_cast<std::size_t>(rowIndex - model.matrix.rowGroupBegin(state));
            auto entries = model.matrix.row(rowIndex);
            std::string where = stateRowContext(state, localRow);
            if (entries.empty()) {
                flag(where + ": empty distribution");
                continue;
            }
            double lowerSum = 0.0;
            double upperSum = 0.0;
            bool hasInterval = false;
            int64_t lastColumn = -1;
            bool rowOk = true;
            for (auto const& entry : entries) {
                if (entry.column >= numStates) {
                    flag(where + ": column " + std::to_string(entry.column) + " out of range");
                    rowOk = false;
                }
                if (static_cast<int64_t>(entry.column) <= lastColumn) {
                    flag(where + ": columns not strictly increasing");
                    rowOk = false;
                }
                lastColumn = entry.column;
                if (entry.interval) {
                    hasInterval = true;
                    if (model.kind != ModelKind::Imdp) {
                        flag(where + ": interval entry in point-valued model");
                        rowOk = false;
                    }
                    if (!(entry.lower >= 0.0 && entry.lower <= entry.upper && entry.upper <= 1.0)) {
                        flag(where + ": interval bounds violate 0 <= lo <= hi <= 1");
                        rowOk = false;
                    }
                } else {
                    if (!(entry.lower > 0.0)) {
                        flag(where + ": nonpositive probability");
                        rowOk = false;
                    }
                    if (entry.lower > 1.0 + kRowSumTolerance) {
                        flag(where + ": probability above 1");
                        rowOk = false;
                    }
                }
                lowerSum += entry.lower;
                upperSum += entry.upper;
            }
            if (!rowOk) {
                continue;
            }
            if (hasInterval) {
                if (lowerSum > 1.0 + kRowSumTolerance || upperSum < 1.0 - kRowSumTolerance) {
                    std::ostringstream out;
                    out << where << ": interval realizability violated (sum of lower bounds " << lowerSum
                        << ", sum of upper bounds " << upperSum << ")";
                    flag(out.str());
                }
            } else {
                if (std::abs(lowerSum - 1.0) > kRowSumTolerance) {
                    std::ostringstream out;
                    out << where << ": row sum " << lowerSum << " not 1";
                    flag(out.str());
                }
            }
        }
    }

    for (auto const& [name, states] : model.labels) {
        if (states.size() != numStates) {
            flag("label \"" + name + "\": bit vector has wrong length");
        }
    }

    for (auto const& [name, structure] : model.rewards) {
        if (structure.stateRewards && structure.stateRewards->size() != numStates) {
            flag("reward \"" + name + "\": state vector has wrong length");
        }
        if (structure.choiceRewards && structure.choiceRewards->size() != numRows) {
            flag("reward \"" + name + "\": choice vector has wrong length");
        }
        auto checkNonnegative = [&](std::vector<double> const& values, std::string const& which) {
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
                    flag("reward \"" + name + "\" " + which + " " + std::to_string(i) + ": negative or non-finite");
                    return;
                }
            }
        };
        if (structure.stateRewards) {
            checkNonnegative(*structure.stateRewards, "state");
        }
        if (structure.choiceRewards) {
            checkNonnegative(*structure.choiceRewards, "choice");
        }
    }

    if (model.choiceLabels && model.choiceLabels->size() != numRows) {
        flag("choice-label vector has wrong length");
    }
    if (model.stateValuations && model.stateValuations->size() != numStates) {
        flag("state-valuation vector has wrong length");
    }

    if (model.kind == ModelKind::Pomdp) {
        if (!model.observations) {
            flag("pomdp without observations");
        } else if (model.observations->size() != numStates) {
            flag("observation vector has wrong length");
        } else if (model.choiceLabels && model.choiceLabels->size() == numRows) {
            // Equal observation implies equal multiset of choice labels.
            std::map<uint32_t, std::multiset<std::string>> seen;
            std::map<uint32_t, std::size_t> witness;
            for (std::size_t state = 0; state < numStates; ++state) {
                std::multiset<std::string> actions;
                for (uint64_t rowIndex = model.matrix.rowGroupBegin(state);
                     rowIndex < model.matrix.rowGroupEnd(state); ++rowIndex) {
                    actions.insert((*model.choiceLabels)[rowIndex]);
                }
                uint32_t observation = (*model.observations)[state];
                auto [it, inserted] = seen.emplace(observation, actions);
                if (inserted) {
                    witness[observation] = state;
                } else if (it->second != actions) {
                    flag("state " + std::to_string(state) + ": observation " + std::to_string(observation) +
                         " has different enabled actions than state " + std::to_string(witness[observation]));
                }
            }
        } else {
            flag("pomdp without choice labels");
        }
    } else if (model.observations) {
        flag("observations on non-pomdp model");
    }

    return violations;
}

void requireValid(ExplicitModel const& model, std::string const& context) {
    auto violations = validate(model);
    if (!violations.empty()) {
        throw ModelError(context + ": " + violations.front() +
                         (violations.size() > 1 ? " (+" + std::to_string(violations.size() - 1) + " more)" : ""));
    }
}

ModelCounts counts(ExplicitModel const& model) {
    ModelCounts result;
    result.states = model.numStates();
    result.transitions = model.numTransitions();
    result.choices = model.numChoices();
    if (model.choiceLabels) {
        std::set<std::string> names;
        for (auto const& name : *model.choiceLabels) {
            if (!name.empty()) {
                names.insert(name);
            }
        }
        result.distinctChoiceLabels = names.size();
    }
    result.distinctLabels = model.labels.size();
    if (model.observations) {
        std::set<uint32_t> observations(model.observations->begin(), model.observations->end());
        result.observationCount = observations.size();
    }
    return result;
}

std::string summary(ExplicitModel const& model) {
    ModelCounts c = counts(model);
    std::string kindName = toString(model.kind);
    std::transform(kindName.begin(), kindName.end(), kindName.begin(), ::toupper);
    std::ostringstream out;
    out << kindName << " model with " << c.states << " states, " << c.transitions << " transitions, " << c.choices
        << " choices, " << c.distinctChoiceLabels << " actions, and " << c.distinctLabels << " distinct labels";
    if (model.kind == ModelKind::Pomdp) {
        out << ", " << c.observationCount << " observations";
    }
    out << ".";
    return out.str();
}

ExplicitModel applyScheduler(ExplicitModel const& model, Scheduler const& scheduler) {
    if (model.kind != ModelKind::Mdp) {
        throw ModelError("apply-scheduler requires an mdp, got " + toString(model.kind));
    }
    if (scheduler.choices.size() != model.numStates()) {
        throw ModelError("invalid scheduler: expected " + std::to_string(model.numStates()) + " choices, got " +
                         std::to_string(scheduler.choices.size()));
    }

    ExplicitModel induced;
    induced.kind = ModelKind::Dtmc;
    induced.initialStates = model.initialStates;
    induced.labels = model.labels;
    induced.stateValuations = model.stateValuations;

    std::vector<std::string> inducedChoiceLabels;
    for (std::size_t state = 0; state < model.numStates(); ++state) {
        uint32_t choice = scheduler.choices[state];
        if (choice >= model.matrix.rowGroupSize(state)) {
            throw ModelError("invalid scheduler: choice " + std::to_string(choice) + " out of range at state " +
                             std::to_string(state));
        }
        uint64_t rowIndex = model.matrix.rowGroupBegin(state) + choice;
        induced.matrix.newRowGroup();
        induced.matrix.newRow();
        for (auto const& entry : model.matrix.row(rowIndex)) {
            induced.matrix.pushEntry(entry);
        }
        if (model.choiceLabels) {
            inducedChoiceLabels.push_back((*model.choiceLabels)[rowIndex]);
        }
    }
    if (model.choiceLabels) {
        induced.choiceLabels = std::move(inducedChoiceLabels);
    }

    for (auto const& [name, structure] : model.rewards) {
        RewardStructure inducedStructure;
        inducedStructure.stateRewards = structure.stateRewards;
        if (structure.choiceRewards) {
            std::vector<double> choiceRewards(model.numStates(), 0.0);
            for (std::size_t state = 0; state < model.numStates(); ++state) {
                uint64_t rowIndex = model.matrix.rowGroupBegin(state) + scheduler.choices[state];
                choiceRewards[state] = (*structure.choiceRewards)[rowIndex];
            }
            inducedStructure.choiceRewards = std::move(choiceRewards);
        }
        induced.rewards.emplace(name, std::move(inducedStructure));
    }
    return induced;
}

} // namespace stormlet
