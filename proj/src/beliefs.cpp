#include "stormlet/beliefs.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

#include "stormlet/exceptions.hpp"

namespace stormlet {

namespace {

void requirePomdp(ExplicitModel const& model, std::string const& operation) {
    if (model.kind != ModelKind::Pomdp || !model.observations) {
        throw UnsupportedError(operation + ": requires a pomdp with observations");
    }
}

std::string canonicalKey(Belief const& belief) {
    std::string key;
    for (auto const& [state, weight] : belief.support) {
        key += std::to_string(state) + ":" + rationalToString(weight) + "|";
    }
    return key;
}

/// Same-observation states must agree on their ordered action lists so that
/// local choice indices line up across a belief's support.
void checkActionAlignment(ExplicitModel const& pomdp) {
    if (!pomdp.choiceLabels) {
        throw UnsupportedError("belief exploration: pomdp without choice labels");
    }
    std::map<uint32_t, std::vector<std::string>> seen;
    for (std::size_t s = 0; s < pomdp.numStates(); ++s) {
        std::vector<std::string> actions;
        for (uint64_t row = pomdp.matrix.rowGroupBegin(s); row < pomdp.matrix.rowGroupEnd(s); ++row) {
            actions.push_back((*pomdp.choiceLabels)[row]);
        }
        uint32_t observation = (*pomdp.observations)[s];
        auto it = seen.find(observation);
        if (it == seen.end()) {
            seen.emplace(observation, std::move(actions));
        } else if (it->second != actions) {
            throw UnsupportedError("belief exploration: states with observation " + std::to_string(observation) +
                                   " have mismatched action lists");
        }
    }
}

} // namespace

uint32_t Belief::observationOf(ExplicitModel const& pomdp) const {
    if (support.empty()) {
        throw ModelError("empty belief");
    }
    return (*pomdp.observations)[support.front().first];
}

Belief pointBelief(uint32_t state) {
    Belief belief;
    belief.support.emplace_back(state, Rational(1));
    return belief;
}

std::vector<std::pair<Rational, Belief>> beliefSuccessors(ExplicitModel const& pomdp, Belief const& belief,
                                                          uint32_t action) {
    requirePomdp(pomdp, "belief successors");
    if (belief.support.empty()) {
        throw ModelError("belief successors: empty belief");
    }
    std::size_t groupSize = pomdp.matrix.rowGroupSize(belief.support.front().first);
    if (action >= groupSize) {
        throw ModelError("belief successors: action " + std::to_string(action) + " not enabled (only " +
                         std::to_string(groupSize) + " choices)");
    }

    // observation -> (successor state -> unnormalized posterior weight)
    std::map<uint32_t, std::map<uint32_t, Rational>> buckets;
    for (auto const& [state, weight] : belief.support) {
        if (pomdp.matrix.rowGroupSize(state) != groupSize) {
            throw ModelError("belief successors: support states disagree on the number of choices");
        }
        uint64_t row = pomdp.matrix.rowGroupBegin(state) + action;
        for (auto const& entry : pomdp.matrix.row(row)) {
            buckets[(*pomdp.observations)[entry.column]][entry.column] += weight * rationalFromDouble(entry.lower);
        }
    }

    std::vector<std::pair<Rational, Belief>> successors;
    for (auto const& [observation, posterior] : buckets) {
        (void)observation;
        Rational total(0);
        for (auto const& [state, weight] : posterior) {
            (void)state;
            total += weight;
        }
        if (total == 0) {
            continue;
        }
        Belief next;
        for (auto const& [state, weight] : posterior) {
            next.support.emplace_back(state, weight / total);
        }
        successors.emplace_back(total, std::move(next));
    }
    return successors;
}

CheckResult fullyObservableValue(ExplicitModel const& pomdp, BitVector const& goal, Direction direction,
                                 Environment const& env) {
    ExplicitModel asMdp = pomdp;
    asMdp.kind = ModelKind::Mdp;
    asMdp.observations.reset();
    return checkReachability(asMdp, goal, direction, env);
}

BeliefCheckResult checkPomdpReachability(ExplicitModel const& pomdp, std::string const& goalLabel,
                                         Environment const& env, std::size_t beliefCap) {
    requirePomdp(pomdp, "belief check");
    checkActionAlignment(pomdp);
    BitVector const& goal = pomdp.label(goalLabel);

    // goal membership must be a function of the observation
    std::map<uint32_t, bool> goalByObservation;
    for (std::size_t s = 0; s < pomdp.numStates(); ++s) {
        uint32_t observation = (*pomdp.observations)[s];
        auto [it, inserted] = goalByObservation.emplace(observation, goal.get(s));
        if (!inserted && it->second != goal.get(s)) {
            throw UnsupportedError("belief check: goal label \"" + goalLabel +
                                   "\" is not observation-consistent (observation " + std::to_string(observation) +
                                   ")");
        }
    }

    if (pomdp.initialStates.count() != 1) {
        throw UnsupportedError("belief check: expects a single initial state");
    }
    std::vector<double> mdpValues = fullyObservableValue(pomdp, goal, Direction::Max, env).values;

    struct BeliefNode {
        Belief belief;
        bool isGoal = false;
        bool expanded = false;
        // per action: (probability, successor belief index)
        std::vector<std::vector<std::pair<double, uint32_t>>> choices;
    };

    std::vector<BeliefNode> nodes;
    std::unordered_map<std::string, uint32_t> indexOf;
    std::size_t maxSupport = 0;
    auto discover = [&](Belief belief) -> uint32_t {
        std::string key = canonicalKey(belief);
        auto it = indexOf.find(key);
        if (it != indexOf.end()) {
            return it->second;
        }
        uint32_t index = static_cast<uint32_t>(nodes.size());
        maxSupport = std::max(maxSupport, belief.support.size());
        BeliefNode node;
        node.isGoal = goalByObservation.at(belief.observationOf(pomdp));
        node.belief = std::move(belief);
        nodes.push_back(std::move(node));
        indexOf.emplace(std::move(key), index);
        return index;
    };

    discover(pointBelief(static_cast<uint32_t>(pomdp.firstInitialState())));
    std::size_t cursor = 0;
    while (cursor < nodes.size() && cursor < beliefCap) {
        BeliefNode& node = nodes[cursor];
        if (node.isGoal) {
            node.expanded = true; // absorbing, nothing to enumerate
            ++cursor;
            continue;
        }
        std::size_t actions = pomdp.matrix.rowGroupSize(node.belief.support.front().first);
        std::vector<std::vector<std::pair<double, uint32_t>>> choices(actions);
        Belief belief = node.belief; // discover() may reallocate nodes
        for (std::size_t action = 0; action < actions; ++action) {
            for (auto& [probability, successor] : beliefSuccessors(pomdp, belief, static_cast<uint32_t>(action))) {
                choices[action].emplace_back(toDouble(probability), discover(std::move(successor)));
            }
        }
        nodes[cursor].choices = std::move(choices);
        nodes[cursor].expanded = true;
        ++cursor;
    }

    BeliefCheckResult result;
    result.exploredBeliefs = cursor;
    result.frontierBeliefs = nodes.size() - cursor;
    result.maxSupportSize = maxSupport;

    std::size_t n = nodes.size();
    std::vector<double> lower(n, 0.0);
    std::vector<double> upper(n, 0.0);
    std::vector<char> fixed(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes[i].isGoal) {
            lower[i] = upper[i] = 1.0;
            fixed[i] = 1;
        } else if (!nodes[i].expanded) {
            // frontier: no under-approximation, fully-observable over-approximation
            double bound = 0.0;
            for (auto const& [state, weight] : nodes[i].belief.support) {
                bound += toDouble(weight) * mdpValues[state];
            }
            lower[i] = 0.0;
            upper[i] = std::min(1.0, bound);
            fixed[i] = 1;
        }
    }

    // beliefs that cannot reach a positive-value terminal have value zero;
    // fixing them keeps the from-above iteration monotone despite self-loops
    {
        std::vector<std::vector<uint32_t>> predecessors(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto const& choice : nodes[i].choices) {
                for (auto const& [probability, successor] : choice) {
                    (void)probability;
                    predecessors[successor].push_back(static_cast<uint32_t>(i));
                }
            }
        }
        std::vector<char> canReach(n, 0);
        std::deque<uint32_t> worklist;
        for (std::size_t i = 0; i < n; ++i) {
            if (fixed[i] && upper[i] > 0.0) {
                canReach[i] = 1;
                worklist.push_back(static_cast<uint32_t>(i));
            }
        }
        while (!worklist.empty()) {
            uint32_t target = worklist.front();
            worklist.pop_front();
            for (uint32_t source : predecessors[target]) {
                if (!canReach[source] && !fixed[source]) {
                    canReach[source] = 1;
                    worklist.push_back(source);
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!fixed[i] && !canReach[i]) {
                lower[i] = upper[i] = 0.0;
                fixed[i] = 1;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) {
            upper[i] = 1.0;
        }
    }

    // interval value iteration: lower climbs from 0, upper descends from 1
    result.converged = false;
    for (uint64_t iteration = 0; iteration < env.maxIterations; ++iteration) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (fixed[i]) {
                continue;
            }
            double bestLower = 0.0;
            double bestUpper = 0.0;
            for (auto const& choice : nodes[i].choices) {
                double lo = 0.0;
                double hi = 0.0;
                for (auto const& [probability, successor] : choice) {
                    lo += probability * lower[successor];
                    hi += probability * upper[successor];
                }
                bestLower = std::max(bestLower, lo);
                bestUpper = std::max(bestUpper, hi);
            }
            delta = std::max(delta, std::abs(bestLower - lower[i]));
            delta = std::max(delta, std::abs(upper[i] - bestUpper));
            lower[i] = bestLower;
            upper[i] = bestUpper;
        }
        if (upper[0] - lower[0] <= env.precision || delta <= env.precision * 1e-3) {
            result.converged = upper[0] - lower[0] <= env.precision;
            break;
        }
    }

    result.lowerBound = lower[0];
    result.upperBound = upper[0];
    return result;
}

std::string dumpBeliefs(ExplicitModel const& pomdp, std::vector<Belief> const& beliefs) {
    std::ostringstream out;
    out << "[\n";
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        out << "  {\"obs\": " << beliefs[i].observationOf(pomdp) << ", \"support\": [";
        for (std::size_t j = 0; j < beliefs[i].support.size(); ++j) {
            if (j > 0) {
                out << ", ";
            }
            out << "[" << beliefs[i].support[j].first << ", \"" << rationalToString(beliefs[i].support[j].second)
                << "\"]";
        }
        out << "]}" << (i + 1 < beliefs.size() ? "," : "") << "\n";
    }
    out << "]\n";
    return out.str();
}

} // namespace stormlet
