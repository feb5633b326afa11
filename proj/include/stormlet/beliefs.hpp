#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stormlet/engines.hpp"
#include "stormlet/model.hpp"
#include "stormlet/rational.hpp"

namespace stormlet {

/// Sparse exact-rational distribution over model states. All support states
/// share one observation; the weights sum to exactly one.
struct Belief {
    std::vector<std::pair<uint32_t, Rational>> support; // ascending state index, positive weight

    uint32_t observationOf(ExplicitModel const& pomdp) const;
    bool isPoint() const { return support.size() == 1; }
};

/// Point belief at the given state.
Belief pointBelief(uint32_t state);

/// Successor beliefs of (belief, action) grouped by observation: the standard
/// Bayes filter in exact rational arithmetic. The action is a local choice
/// index, valid for every support state (same-observation states share their
/// ordered action list).
std::vector<std::pair<Rational, Belief>> beliefSuccessors(ExplicitModel const& pomdp, Belief const& belief,
                                                          uint32_t action);

struct BeliefCheckResult {
    double lowerBound = 0.0;
    double upperBound = 1.0;
    bool converged = true;        // false when the cap clipped exploration
    std::size_t exploredBeliefs = 0;
    std::size_t frontierBeliefs = 0;
    std::size_t maxSupportSize = 0;
};

/// Maximal reachability on the belief MDP, explored breadth-first up to
/// beliefCap beliefs. Frontier beliefs are bounded by 0 from below and by the
/// fully-observable optimum from above; the true POMDP optimum lies within
/// the returned interval.
BeliefCheckResult checkPomdpReachability(ExplicitModel const& pomdp, std::string const& goalLabel,
                                         Environment const& env = Environment(), std::size_t beliefCap = 1000000);

/// Drops the observation map and checks the underlying MDP.
CheckResult fullyObservableValue(ExplicitModel const& pomdp, BitVector const& goal, Direction direction,
                                 Environment const& env = Environment());

/// Diagnostic dump of explored beliefs as JSON.
std::string dumpBeliefs(ExplicitModel const& pomdp, std::vector<Belief> const& beliefs);

} // namespace stormlet
