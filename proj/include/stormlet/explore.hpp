#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "stormlet/exceptions.hpp"
#include "stormlet/model.hpp"
#include "stormlet/model_ops.hpp"

namespace stormlet {

/// One successor of a (state, action) pair: a probability (or probability
/// interval) and the target state.
template <typename State>
struct TransitionTarget {
    double lower = 0.0;
    double upper = 0.0;
    bool interval = false;
    State state;

    static TransitionTarget point(double probability, State target) {
        return TransitionTarget{probability, probability, false, std::move(target)};
    }
    static TransitionTarget bounded(double lo, double hi, State target) {
        return TransitionTarget{lo, hi, true, std::move(target)};
    }
};

/// Callback-based model description. States must be hashable and equality
/// comparable; equal states must produce identical actions, transitions,
/// labels and rewards.
template <typename State>
struct ExplorationSpec {
    State initialState;
    std::function<std::vector<std::string>(State const&)> availableActions;
    std::function<std::vector<TransitionTarget<State>>(State const&, std::string const&)> delta;
    std::function<std::vector<std::string>(State const&)> labelsOf;                            // may be empty
    std::function<std::map<std::string, double>(State const&, std::string const&)> rewardsOf;  // may be empty
    std::function<uint32_t(State const&)> observationOf;                                       // pomdp only
    std::size_t maxSize = 1000000;
    ModelKind kind = ModelKind::Mdp;
};

/// Breadth-first state-space exploration. State indices are assigned in
/// discovery order (initial state = 0); successors are inserted in the order
/// the delta callback lists them. The initial state is labeled "init".
template <typename State, typename Hash = std::hash<State>>
ExplicitModel explore(ExplorationSpec<State> const& spec) {
    ExplicitModel model;
    model.kind = spec.kind;

    std::vector<State> states;
    std::unordered_map<State, uint32_t, Hash> indexOf;
    std::vector<std::string> choiceLabels;
    std::map<std::string, std::vector<std::size_t>> labelStates;
    std::map<std::string, std::vector<std::pair<std::size_t, double>>> choiceRewards;
    std::vector<uint32_t> observations;

    auto discover = [&](State const& state) -> uint32_t {
        auto it = indexOf.find(state);
        if (it != indexOf.end()) {
            return it->second;
        }
        if (states.size() >= spec.maxSize) {
            throw ModelError("state-space limit exceeded: more than " + std::to_string(spec.maxSize) +
                             " states (max_size)");
        }
        uint32_t index = static_cast<uint32_t>(states.size());
        states.push_back(state);
        indexOf.emplace(state, index);
        return index;
    };

    discover(spec.initialState);

    for (std::size_t current = 0; current < states.size(); ++current) {
        // states may reallocate while successors are discovered
        State state = states[current];
        model.matrix.newRowGroup();

        if (spec.labelsOf) {
            for (auto const& label : spec.labelsOf(state)) {
                labelStates[label].push_back(current);
            }
        }
        if (spec.observationOf) {
            observations.push_back(spec.observationOf(state));
        }

        auto actions = spec.availableActions(state);
        if (actions.empty()) {
            throw ModelError("state " + std::to_string(current) + ": no available action");
        }
        for (auto const& action : actions) {
            std::size_t rowIndex = model.matrix.numRows();
            model.matrix.newRow();
            choiceLabels.push_back(action);

            if (spec.rewardsOf) {
                for (auto const& [name, value] : spec.rewardsOf(state, action)) {
                    if (value < 0.0) {
                        throw ModelError("state " + std::to_string(current) + " action " + action +
                                         ": negative reward " + name);
                    }
                    if (value != 0.0) {
                        choiceRewards[name].emplace_back(rowIndex, value);
                    }
                }
            }

            // accumulate by target, then emit with strictly increasing columns
            std::map<uint32_t, std::pair<Interval, bool>> accumulated;
            double lowerSum = 0.0;
            double upperSum = 0.0;
            bool anyInterval = false;
            for (auto const& target : spec.delta(state, action)) {
                if (target.interval) {
                    if (target.lower < 0.0 || target.upper < target.lower || target.upper > 1.0) {
                        throw ModelError("state " + std::to_string(current) + " action " + action +
                                         ": invalid probability interval");
                    }
                    anyInterval = true;
                } else if (!(target.lower > 0.0)) {
                    throw ModelError("state " + std::to_string(current) + " action " + action +
                                     ": nonpositive transition probability");
                }
                uint32_t column = discover(target.state);
                auto& cell = accumulated[column];
                cell.first.lower += target.lower;
                cell.first.upper += target.upper;
                cell.second = cell.second || target.interval;
                lowerSum += target.lower;
                upperSum += target.upper;
            }
            if (accumulated.empty()) {
                throw ModelError("state " + std::to_string(current) + " action " + action + ": empty distribution");
            }
            if (anyInterval) {
                if (lowerSum > 1.0 + kRowSumTolerance || upperSum < 1.0 - kRowSumTolerance) {
                    throw ModelError("state " + std::to_string(current) + " action " + action +
                                     ": interval row not realizable");
                }
            } else if (std::abs(lowerSum - 1.0) > kRowSumTolerance) {
                throw ModelError("state " + std::to_string(current) + " action " + action + ": row sum " +
                                 std::to_string(lowerSum) + " not 1");
            }
            for (auto const& [column, cell] : accumulated) {
                if (cell.second) {
                    model.matrix.pushEntry(MatrixEntry::bounded(column, cell.first.lower, cell.first.upper));
                } else {
                    model.matrix.pushEntry(MatrixEntry::point(column, cell.first.lower));
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

    for (auto const& [name, sparse] : choiceRewards) {
        RewardStructure structure;
        structure.choiceRewards = std::vector<double>(model.numChoices(), 0.0);
        for (auto const& [row, value] : sparse) {
            (*structure.choiceRewards)[row] = value;
        }
        model.rewards.emplace(name, std::move(structure));
    }

    if (spec.observationOf) {
        model.observations = std::move(observations);
    }

    return model;
}

} // namespace stormlet
