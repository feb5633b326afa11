#pragma once

#include <cstdint>
#include <string>

#include "stormlet/model.hpp"

namespace stormlet {

enum class Direction { Max, Min };

inline Direction oppositeOf(Direction d) {
    return d == Direction::Max ? Direction::Min : Direction::Max;
}

enum class Method { ValueIteration, GaussSeidel, PolicyIteration, OptimisticValueIteration };
enum class Criterion { Absolute, Relative };

Method methodFromString(std::string const& text);
std::string toString(Method method);

/// Solver configuration shared by all numeric engines.
struct Environment {
    Method method = Method::ValueIteration;
    double precision = 1e-6;
    Criterion criterion = Criterion::Absolute;
    uint64_t maxIterations = 1000000;
};

/// States with reachability probability exactly 0 / exactly 1, relative to a
/// direction and goal set; computed graph-theoretically.
struct QualitativeSets {
    BitVector prob0;
    BitVector prob1;
};

/// States where Pmax(phi U psi) = 0 resp. = 1.
QualitativeSets prob01Max(ExplicitModel const& model, BitVector const& phi, BitVector const& psi);

/// States where Pmin(phi U psi) = 0 resp. = 1 (quantifying over all
/// schedulers).
QualitativeSets prob01Min(ExplicitModel const& model, BitVector const& phi, BitVector const& psi);

/// Optimal reachability probabilities Popt(F goal) per state.
CheckResult checkReachability(ExplicitModel const& model, BitVector const& goal, Direction direction,
                              Environment const& env = Environment(), bool extractScheduler = false);

/// Certified per-state enclosures [lb, ub] of the reachability value, with
/// the upper bound verified inductive (optimistic value iteration).
std::vector<Interval> checkReachabilityBounds(ExplicitModel const& model, BitVector const& goal, Direction direction,
                                              Environment const& env = Environment());

/// Expected accumulated (state + choice) reward until first entering the goal
/// set; +infinity where the goal is missed with positive probability (max:
/// under some scheduler, min: under all).
CheckResult checkTotalReward(ExplicitModel const& model, std::string const& rewardName, BitVector const& goal,
                             Direction direction, Environment const& env = Environment(),
                             bool extractScheduler = false);

/// Popt(F^{reward <= bound} goal) via the epoch unfolding; requires the
/// reward structure to be non-negative integer valued.
CheckResult checkBoundedReachability(ExplicitModel const& model, std::string const& rewardName, int64_t bound,
                                     BitVector const& goal, Direction direction,
                                     Environment const& env = Environment());

/// DTMC reachability or expected reward via a linear solve: direct Gaussian
/// elimination up to 500 unknowns, Gauss-Seidel beyond.
CheckResult solveDtmcReachability(ExplicitModel const& model, BitVector const& goal,
                                  Environment const& env = Environment());
CheckResult solveDtmcReward(ExplicitModel const& model, std::string const& rewardName, BitVector const& goal,
                            Environment const& env = Environment());

} // namespace stormlet
