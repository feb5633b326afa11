#include "stormlet/engines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "stormlet/exceptions.hpp"
#include "stormlet/model_ops.hpp"

namespace stormlet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void requirePointModel(ExplicitModel const& model, std::string const& operation) {
    if (model.kind != ModelKind::Dtmc && model.kind != ModelKind::Mdp && model.kind != ModelKind::Pomdp) {
        throw UnsupportedError(operation + ": requires a point-valued model, got " + toString(model.kind));
    }
}

void requireStateVector(ExplicitModel const& model, BitVector const& states, std::string const& name) {
    if (states.size() != model.numStates()) {
        throw ModelError(name + ": bit vector sized " + std::to_string(states.size()) + ", expected " +
                         std::to_string(model.numStates()));
    }
}

/// Predecessor adjacency in CSR form: for each state, the (source state,
/// row index) pairs of entries leading into it.
struct PredecessorGraph {
    std::vector<uint64_t> offsets;
    std::vector<uint32_t> sourceState;
    std::vector<uint32_t> sourceRow;

    explicit PredecessorGraph(ExplicitModel const& model) {
        std::size_t n = model.numStates();
        offsets.assign(n + 1, 0);
        for (auto const& entry : model.matrix.entries()) {
            ++offsets[entry.column + 1];
        }
        for (std::size_t i = 1; i <= n; ++i) {
            offsets[i] += offsets[i - 1];
        }
        sourceState.resize(model.numTransitions());
        sourceRow.resize(model.numTransitions());
        std::vector<uint64_t> cursor(offsets.begin(), offsets.end() - 1);
        for (std::size_t state = 0; state < n; ++state) {
            for (uint64_t row = model.matrix.rowGroupBegin(state); row < model.matrix.rowGroupEnd(state); ++row) {
                for (auto const& entry : model.matrix.row(row)) {
                    uint64_t slot = cursor[entry.column]++;
                    sourceState[slot] = static_cast<uint32_t>(state);
                    sourceRow[slot] = static_cast<uint32_t>(row);
                }
            }
        }
    }
};

/// prob1 set for the maximizing direction together with, per member state, a
/// row witnessing almost-sure reachability (UINT32_MAX outside / on psi).
struct Prob1MaxResult {
    BitVector states;
    std::vector<uint32_t> witnessRow; // global row index
};

Prob1MaxResult prob1MaxWithWitness(ExplicitModel const& model, BitVector const& phi, BitVector const& psi,
                                   PredecessorGraph const& pred) {
    std::size_t n = model.numStates();
    BitVector u(n, true);
    while (true) {
        BitVector v(n, false);
        std::vector<uint32_t> witness(n, UINT32_MAX);
        std::deque<uint32_t> worklist;
        for (std::size_t s = 0; s < n; ++s) {
            if (psi.get(s)) {
                v.set(s);
                worklist.push_back(static_cast<uint32_t>(s));
            }
        }
        while (!worklist.empty()) {
            uint32_t target = worklist.front();
            worklist.pop_front();
            for (uint64_t i = pred.offsets[target]; i < pred.offsets[target + 1]; ++i) {
                uint32_t s = pred.sourceState[i];
                if (v.get(s) || !phi.get(s)) {
                    continue;
                }
                uint32_t row = pred.sourceRow[i];
                bool insideU = true;
                for (auto const& entry : model.matrix.row(row)) {
                    if (!u.get(entry.column)) {
                        insideU = false;
                        break;
                    }
                }
                if (insideU) {
                    v.set(s);
                    witness[s] = row;
                    worklist.push_back(s);
                }
            }
        }
        if (v == u) {
            return {std::move(v), std::move(witness)};
        }
        u = v;
    }
}

BitVector prob0Max(ExplicitModel const& model, BitVector const& phi, BitVector const& psi,
                   PredecessorGraph const& pred) {
    std::size_t n = model.numStates();
    BitVector canReach(n, false);
    std::deque<uint32_t> worklist;
    for (std::size_t s = 0; s < n; ++s) {
        if (psi.get(s)) {
            canReach.set(s);
            worklist.push_back(static_cast<uint32_t>(s));
        }
    }
    while (!worklist.empty()) {
        uint32_t target = worklist.front();
        worklist.pop_front();
        for (uint64_t i = pred.offsets[target]; i < pred.offsets[target + 1]; ++i) {
            uint32_t s = pred.sourceState[i];
            if (!canReach.get(s) && phi.get(s)) {
                canReach.set(s);
                worklist.push_back(s);
            }
        }
    }
    return ~canReach;
}

/// Set of states where every scheduler reaches psi (phi-constrained) with
/// positive probability; the complement is prob0 for the minimizing
/// direction.
BitVector prob0MinComplement(ExplicitModel const& model, BitVector const& phi, BitVector const& psi,
                             PredecessorGraph const& pred) {
    std::size_t n = model.numStates();
    BitVector inSet(n, false);
    std::vector<char> rowHit(model.numChoices(), 0);
    std::vector<uint32_t> hits(n, 0);
    std::deque<uint32_t> worklist;
    for (std::size_t s = 0; s < n; ++s) {
        if (psi.get(s)) {
            inSet.set(s);
            worklist.push_back(static_cast<uint32_t>(s));
        }
    }
    while (!worklist.empty()) {
        uint32_t target = worklist.front();
        worklist.pop_front();
        for (uint64_t i = pred.offsets[target]; i < pred.offsets[target + 1]; ++i) {
            uint32_t row = pred.sourceRow[i];
            if (rowHit[row]) {
                continue;
            }
            rowHit[row] = 1;
            uint32_t s = pred.sourceState[i];
            if (++hits[s] == model.matrix.rowGroupSize(s) && !inSet.get(s) && phi.get(s)) {
                inSet.set(s);
                worklist.push_back(s);
            }
        }
    }
    return inSet;
}

BitVector prob1Min(ExplicitModel const& model, BitVector const& phi, BitVector const& psi,
                   PredecessorGraph const& pred) {
    std::size_t n = model.numStates();
    BitVector u(n, true);
    while (true) {
        // Rows whose successors all lie in u; a state is eligible if every
        // row qualifies.
        std::vector<char> eligible(n, 1);
        for (std::size_t s = 0; s < n; ++s) {
            for (uint64_t row = model.matrix.rowGroupBegin(s); row < model.matrix.rowGroupEnd(s) && eligible[s];
                 ++row) {
                for (auto const& entry : model.matrix.row(row)) {
                    if (!u.get(entry.column)) {
                        eligible[s] = 0;
                        break;
                    }
                }
            }
        }
        BitVector v(n, false);
        std::vector<char> rowHit(model.numChoices(), 0);
        std::vector<uint32_t> hits(n, 0);
        std::deque<uint32_t> worklist;
        for (std::size_t s = 0; s < n; ++s) {
            if (psi.get(s)) {
                v.set(s);
                worklist.push_back(static_cast<uint32_t>(s));
            }
        }
        while (!worklist.empty()) {
            uint32_t target = worklist.front();
            worklist.pop_front();
            for (uint64_t i = pred.offsets[target]; i < pred.offsets[target + 1]; ++i) {
                uint32_t row = pred.sourceRow[i];
                if (rowHit[row]) {
                    continue;
                }
                rowHit[row] = 1;
                uint32_t s = pred.sourceState[i];
                if (eligible[s] && ++hits[s] == model.matrix.rowGroupSize(s) && !v.get(s) && phi.get(s)) {
                    v.set(s);
                    worklist.push_back(s);
                }
            }
        }
        if (v == u) {
            return v;
        }
        u = v;
    }
}

/// Shared numeric state for the iterative solvers: full-length value vector
/// with fixed entries outside `unknown`, optional per-row rewards.
struct NumericProblem {
    ExplicitModel const& model;
    Direction direction;
    Environment env;
    std::vector<uint32_t> unknown;       // ascending state indices
    std::vector<double> values;          // full length
    std::vector<double> rowRewards;      // empty in probability mode
    bool probabilityMode = true;

    double rowValue(uint64_t row, std::vector<double> const& x) const {
        double result = rowRewards.empty() ? 0.0 : rowRewards[row];
        for (auto const& entry : model.matrix.row(row)) {
            result += entry.lower * x[entry.column];
        }
        return result;
    }

    double bestValue(std::size_t state, std::vector<double> const& x) const {
        double best = direction == Direction::Max ? -kInf : kInf;
        for (uint64_t row = model.matrix.rowGroupBegin(state); row < model.matrix.rowGroupEnd(state); ++row) {
            double q = rowValue(row, x);
            if (direction == Direction::Max ? q > best : q < best) {
                best = q;
            }
        }
        return best;
    }

    uint32_t bestRow(std::size_t state, std::vector<double> const& x) const {
        double best = direction == Direction::Max ? -kInf : kInf;
        uint64_t bestRow = model.matrix.rowGroupBegin(state);
        for (uint64_t row = model.matrix.rowGroupBegin(state); row < model.matrix.rowGroupEnd(state); ++row) {
            double q = rowValue(row, x);
            if (direction == Direction::Max ? q > best : q < best) {
                best = q;
                bestRow = row;
            }
        }
        return static_cast<uint32_t>(bestRow - model.matrix.rowGroupBegin(state));
    }

    bool withinPrecision(double delta, double newValue) const {
        if (env.criterion == Criterion::Absolute) {
            return std::abs(delta) <= env.precision;
        }
        return std::abs(delta) <= env.precision * std::abs(newValue);
    }
};

void runValueIteration(NumericProblem& problem, bool inPlace) {
    std::vector<double> next;
    if (!inPlace) {
        next = problem.values;
    }
    for (uint64_t iteration = 0; iteration < problem.env.maxIterations; ++iteration) {
        bool converged = true;
        for (uint32_t state : problem.unknown) {
            double updated = problem.bestValue(state, problem.values);
            double delta = updated - problem.values[state];
            if (converged && !problem.withinPrecision(delta, updated)) {
                converged = false;
            }
            (inPlace ? problem.values : next)[state] = updated;
        }
        if (!inPlace) {
            for (uint32_t state : problem.unknown) {
                problem.values[state] = next[state];
            }
        }
        if (converged) {
            return;
        }
    }
    throw ConvergenceError("value iteration did not converge within " + std::to_string(problem.env.maxIterations) +
                           " iterations");
}

/// Evaluates the chain induced by fixing one row per unknown state, by
/// Gauss-Seidel iteration from zero (the least fixpoint is the policy value).
void evaluatePolicy(NumericProblem& problem, std::vector<uint32_t> const& policyRow, double precision,
                    std::vector<double>& values) {
    for (uint32_t state : problem.unknown) {
        values[state] = 0.0;
    }
    uint64_t cap = std::max<uint64_t>(problem.env.maxIterations, 1000000);
    for (uint64_t iteration = 0; iteration < cap; ++iteration) {
        double maxDelta = 0.0;
        for (uint32_t state : problem.unknown) {
            uint64_t row = problem.model.matrix.rowGroupBegin(state) + policyRow[state];
            double updated = problem.rowValue(row, values);
            maxDelta = std::max(maxDelta, std::abs(updated - values[state]));
            values[state] = updated;
        }
        if (maxDelta <= precision) {
            return;
        }
    }
    throw ConvergenceError("policy evaluation did not converge");
}

void runPolicyIteration(NumericProblem& problem, std::vector<uint32_t> const& initialPolicy) {
    std::vector<uint32_t> policy = initialPolicy;
    double evalPrecision = std::min(problem.env.precision * 1e-2, 1e-13);
    constexpr uint64_t kMaxImprovements = 10000;
    std::vector<double> previous;
    for (uint64_t round = 0; round < kMaxImprovements; ++round) {
        evaluatePolicy(problem, policy, evalPrecision, problem.values);
        if (round > 0) {
            // exact ties may keep flipping the policy; the value deciding
            double maxDelta = 0.0;
            for (uint32_t state : problem.unknown) {
                maxDelta = std::max(maxDelta, std::abs(problem.values[state] - previous[state]));
            }
            if (maxDelta <= 1e-12) {
                return;
            }
        }
        previous = problem.values;
        bool improved = false;
        for (uint32_t state : problem.unknown) {
            double current = problem.values[state];
            uint64_t groupBegin = problem.model.matrix.rowGroupBegin(state);
            uint32_t bestLocal = policy[state];
            double best = current;
            for (uint64_t row = groupBegin; row < problem.model.matrix.rowGroupEnd(state); ++row) {
                double q = problem.rowValue(row, problem.values);
                bool better = problem.direction == Direction::Max ? q > best + 1e-12 : q < best - 1e-12;
                if (better) {
                    best = q;
                    bestLocal = static_cast<uint32_t>(row - groupBegin);
                    improved = true;
                }
            }
            policy[state] = bestLocal;
        }
        if (!improved) {
            return;
        }
    }
    throw ConvergenceError("policy iteration did not stabilize");
}

/// Optimistic value iteration: iterate from below, guess an upper bound and
/// verify it inductive (Bellman(ub) <= ub). Fills `problem.values` with the
/// certified lower bound and returns the matching upper bounds.
std::vector<double> runOptimisticValueIteration(NumericProblem& problem) {
    double epsilon = problem.env.precision;
    double guessPrecision = epsilon;
    std::vector<double> upper = problem.values;
    constexpr int kMaxAttempts = 64;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        // improve the lower bound
        NumericProblem stage{problem.model, problem.direction, problem.env,
                             problem.unknown, {},                problem.rowRewards,
                             problem.probabilityMode};
        stage.env.precision = guessPrecision;
        stage.env.criterion = Criterion::Absolute;
        stage.values = problem.values;
        runValueIteration(stage, true);
        problem.values = stage.values;

        // optimistic guess
        upper = problem.values;
        for (uint32_t state : problem.unknown) {
            double lb = problem.values[state];
            double guess = lb + epsilon * std::max(1.0, std::abs(lb));
            if (problem.probabilityMode) {
                guess = std::min(guess, 1.0);
            }
            upper[state] = guess;
        }

        // verification phase
        uint64_t budget = std::max<uint64_t>(1000, problem.env.maxIterations / 100);
        bool verified = false;
        bool abandoned = false;
        std::vector<double> next = upper;
        for (uint64_t step = 0; step < budget && !verified && !abandoned; ++step) {
            bool allDown = true;
            bool allUp = true;
            for (uint32_t state : problem.unknown) {
                double q = problem.bestValue(state, upper);
                if (problem.probabilityMode) {
                    q = std::min(q, 1.0);
                }
                if (q > upper[state] + 1e-14) {
                    allDown = false;
                }
                if (q < upper[state] - 1e-14) {
                    allUp = false;
                }
                next[state] = q;
            }
            if (allDown) {
                verified = true; // next is inductive: Bellman(next) <= Bellman(upper) = next
                for (uint32_t state : problem.unknown) {
                    upper[state] = std::max(next[state], problem.values[state]);
                }
            } else if (allUp) {
                abandoned = true; // guess lies below the fixpoint
            } else {
                std::swap(upper, next);
            }
        }
        if (verified) {
            return upper;
        }
        guessPrecision *= 0.5;
    }
    throw ConvergenceError("optimistic value iteration failed to certify an upper bound");
}

struct QualitativeReachability {
    QualitativeSets sets;
    std::vector<uint32_t> prob1Witness; // max direction only; global rows
    std::vector<uint32_t> prob0Witness; // min direction only; global rows
};

QualitativeReachability qualitativeReachability(ExplicitModel const& model, BitVector const& phi,
                                                BitVector const& psi, Direction direction,
                                                PredecessorGraph const& pred) {
    QualitativeReachability result;
    if (direction == Direction::Max) {
        result.sets.prob0 = prob0Max(model, phi, psi, pred);
        auto prob1 = prob1MaxWithWitness(model, phi, psi, pred);
        result.sets.prob1 = std::move(prob1.states);
        result.prob1Witness = std::move(prob1.witnessRow);
    } else {
        BitVector surelyPositive = prob0MinComplement(model, phi, psi, pred);
        result.sets.prob0 = ~surelyPositive;
        result.sets.prob1 = prob1Min(model, phi, psi, pred);
        // witness rows that avoid the goal from prob0 states
        result.prob0Witness.assign(model.numStates(), UINT32_MAX);
        for (std::size_t s = 0; s < model.numStates(); ++s) {
            if (!result.sets.prob0.get(s)) {
                continue;
            }
            for (uint64_t row = model.matrix.rowGroupBegin(s); row < model.matrix.rowGroupEnd(s); ++row) {
                bool avoids = true;
                for (auto const& entry : model.matrix.row(row)) {
                    if (surelyPositive.get(entry.column)) {
                        avoids = false;
                        break;
                    }
                }
                if (avoids) {
                    result.prob0Witness[s] = static_cast<uint32_t>(row);
                    break;
                }
            }
        }
    }
    return result;
}

Scheduler extractSchedulerFromValues(NumericProblem const& problem, QualitativeReachability const& qual,
                                     BitVector const& goal) {
    ExplicitModel const& model = problem.model;
    Scheduler scheduler;
    scheduler.choices.assign(model.numStates(), 0);
    BitVector unknownSet(model.numStates());
    for (uint32_t s : problem.unknown) {
        unknownSet.set(s);
    }
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        if (goal.get(s)) {
            continue; // any choice; value already attained
        }
        if (unknownSet.get(s)) {
            scheduler.choices[s] = problem.bestRow(s, problem.values);
        } else if (problem.direction == Direction::Max && qual.sets.prob1.get(s)) {
            uint32_t row = qual.prob1Witness.empty() ? UINT32_MAX : qual.prob1Witness[s];
            if (row != UINT32_MAX) {
                scheduler.choices[s] = static_cast<uint32_t>(row - model.matrix.rowGroupBegin(s));
            }
        } else if (problem.direction == Direction::Min && qual.sets.prob0.get(s)) {
            uint32_t row = qual.prob0Witness.empty() ? UINT32_MAX : qual.prob0Witness[s];
            if (row != UINT32_MAX) {
                scheduler.choices[s] = static_cast<uint32_t>(row - model.matrix.rowGroupBegin(s));
            }
        }
    }
    return scheduler;
}

void dispatchMethod(NumericProblem& problem, std::vector<uint32_t> const& initialPolicy,
                    std::vector<double>* upperOut) {
    switch (problem.env.method) {
    case Method::ValueIteration:
        runValueIteration(problem, false);
        break;
    case Method::GaussSeidel:
        runValueIteration(problem, true);
        break;
    case Method::PolicyIteration:
        runPolicyIteration(problem, initialPolicy);
        break;
    case Method::OptimisticValueIteration: {
        auto upper = runOptimisticValueIteration(problem);
        if (upperOut) {
            *upperOut = std::move(upper);
        }
        break;
    }
    }
}

std::vector<double> rewardPerRow(ExplicitModel const& model, RewardStructure const& structure) {
    std::vector<double> rowRewards(model.numChoices(), 0.0);
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        for (uint64_t row = model.matrix.rowGroupBegin(s); row < model.matrix.rowGroupEnd(s); ++row) {
            rowRewards[row] = model.rewardOf(structure, s, row);
        }
    }
    return rowRewards;
}

RewardStructure const& findRewardStructure(ExplicitModel const& model, std::string const& name) {
    auto it = model.rewards.find(name);
    if (it == model.rewards.end()) {
        throw ModelError("unknown reward structure: " + name);
    }
    return it->second;
}

} // namespace

Method methodFromString(std::string const& text) {
    if (text == "vi") {
        return Method::ValueIteration;
    }
    if (text == "gauss-seidel") {
        return Method::GaussSeidel;
    }
    if (text == "pi") {
        return Method::PolicyIteration;
    }
    if (text == "ovi") {
        return Method::OptimisticValueIteration;
    }
    throw ParseError("unknown method: " + text + " (expected vi, gauss-seidel, pi, ovi)");
}

std::string toString(Method method) {
    switch (method) {
    case Method::ValueIteration:
        return "vi";
    case Method::GaussSeidel:
        return "gauss-seidel";
    case Method::PolicyIteration:
        return "pi";
    case Method::OptimisticValueIteration:
        return "ovi";
    }
    return "?";
}

QualitativeSets prob01Max(ExplicitModel const& model, BitVector const& phi, BitVector const& psi) {
    requirePointModel(model, "prob01-max");
    requireStateVector(model, phi, "phi");
    requireStateVector(model, psi, "psi");
    PredecessorGraph pred(model);
    QualitativeSets sets;
    sets.prob0 = prob0Max(model, phi, psi, pred);
    sets.prob1 = prob1MaxWithWitness(model, phi, psi, pred).states;
    return sets;
}

QualitativeSets prob01Min(ExplicitModel const& model, BitVector const& phi, BitVector const& psi) {
    requirePointModel(model, "prob01-min");
    requireStateVector(model, phi, "phi");
    requireStateVector(model, psi, "psi");
    PredecessorGraph pred(model);
    QualitativeSets sets;
    sets.prob0 = ~prob0MinComplement(model, phi, psi, pred);
    sets.prob1 = prob1Min(model, phi, psi, pred);
    return sets;
}

CheckResult checkReachability(ExplicitModel const& model, BitVector const& goal, Direction direction,
                              Environment const& env, bool extractScheduler) {
    requirePointModel(model, "reachability");
    requireStateVector(model, goal, "goal");
    std::size_t n = model.numStates();
    PredecessorGraph pred(model);
    BitVector all(n, true);
    auto qual = qualitativeReachability(model, all, goal, direction, pred);

    NumericProblem problem{model, direction, env, {}, {}, {}, true};
    problem.values.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (qual.sets.prob1.get(s)) {
            problem.values[s] = 1.0;
        } else if (!qual.sets.prob0.get(s)) {
            problem.unknown.push_back(static_cast<uint32_t>(s));
        }
    }

    std::vector<double> upper;
    dispatchMethod(problem, std::vector<uint32_t>(n, 0), &upper);

    CheckResult result;
    result.values = problem.values;
    if (env.method == Method::OptimisticValueIteration) {
        std::vector<Interval> bounds(n);
        for (std::size_t s = 0; s < n; ++s) {
            bounds[s] = {problem.values[s], problem.values[s]};
        }
        for (uint32_t s : problem.unknown) {
            bounds[s] = {problem.values[s], upper.empty() ? problem.values[s] : upper[s]};
        }
        result.bounds = std::move(bounds);
    }
    if (extractScheduler) {
        result.scheduler = extractSchedulerFromValues(problem, qual, goal);
    }
    return result;
}

std::vector<Interval> checkReachabilityBounds(ExplicitModel const& model, BitVector const& goal, Direction direction,
                                              Environment const& env) {
    Environment oviEnv = env;
    oviEnv.method = Method::OptimisticValueIteration;
    auto result = checkReachability(model, goal, direction, oviEnv, false);
    return *result.bounds;
}

CheckResult checkTotalReward(ExplicitModel const& model, std::string const& rewardName, BitVector const& goal,
                             Direction direction, Environment const& env, bool extractScheduler) {
    requirePointModel(model, "total reward");
    requireStateVector(model, goal, "goal");
    RewardStructure const& structure = findRewardStructure(model, rewardName);
    std::size_t n = model.numStates();
    PredecessorGraph pred(model);
    BitVector all(n, true);

    // Finite values exactly where the complementary quantification reaches
    // the goal almost surely.
    BitVector finite(n);
    Prob1MaxResult witness;
    if (direction == Direction::Max) {
        finite = prob1Min(model, all, goal, pred);
    } else {
        witness = prob1MaxWithWitness(model, all, goal, pred);
        finite = witness.states;
    }

    NumericProblem problem{model, direction, env, {}, {}, rewardPerRow(model, structure), false};
    problem.values.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (!finite.get(s)) {
            problem.values[s] = kInf;
        } else if (!goal.get(s)) {
            problem.unknown.push_back(static_cast<uint32_t>(s));
        }
    }

    // Initial policy for policy iteration: for minimizing reward queries the
    // lowest-index policy may miss the goal; repair it with the almost-sure
    // witness rows.
    std::vector<uint32_t> initialPolicy(n, 0);
    if (direction == Direction::Min) {
        for (uint32_t s : problem.unknown) {
            if (witness.witnessRow[s] != UINT32_MAX) {
                initialPolicy[s] = static_cast<uint32_t>(witness.witnessRow[s] - model.matrix.rowGroupBegin(s));
            }
        }
    }

    std::vector<double> upper;
    dispatchMethod(problem, initialPolicy, &upper);

    CheckResult result;
    result.values = problem.values;
    if (env.method == Method::OptimisticValueIteration) {
        std::vector<Interval> bounds(n);
        for (std::size_t s = 0; s < n; ++s) {
            bounds[s] = {problem.values[s], problem.values[s]};
        }
        for (uint32_t s : problem.unknown) {
            bounds[s] = {problem.values[s], upper.empty() ? problem.values[s] : upper[s]};
        }
        result.bounds = std::move(bounds);
    }
    if (extractScheduler) {
        Scheduler scheduler;
        scheduler.choices.assign(n, 0);
        for (uint32_t s : problem.unknown) {
            scheduler.choices[s] = problem.bestRow(s, problem.values);
        }
        result.scheduler = std::move(scheduler);
    }
    return result;
}

CheckResult checkBoundedReachability(ExplicitModel const& model, std::string const& rewardName, int64_t bound,
                                     BitVector const& goal, Direction direction, Environment const& env) {
    requirePointModel(model, "bounded reachability");
    requireStateVector(model, goal, "goal");
    if (bound < 0) {
        throw ModelError("reward bound must be non-negative");
    }
    RewardStructure const& structure = findRewardStructure(model, rewardName);
    std::vector<double> rowRewards = rewardPerRow(model, structure);
    std::vector<int64_t> integerRewards(rowRewards.size());
    for (std::size_t row = 0; row < rowRewards.size(); ++row) {
        double value = rowRewards[row];
        if (value < 0.0 || value != std::floor(value)) {
            throw UnsupportedError("reward-bounded reachability requires non-negative integer rewards, found " +
                                   std::to_string(value));
        }
        integerRewards[row] = static_cast<int64_t>(value);
    }

    // Epoch unfolding: product states (s, accumulated reward), with every
    // overflow beyond the bound collapsed into one absorbing sink.
    std::size_t n = model.numStates();
    std::unordered_map<uint64_t, uint32_t> productIndex;
    std::vector<uint64_t> productKeys;
    auto keyOf = [&](std::size_t s, int64_t r) { return static_cast<uint64_t>(r) * n + s; };
    auto discover = [&](std::size_t s, int64_t r) -> uint32_t {
        uint64_t key = keyOf(s, r);
        auto it = productIndex.find(key);
        if (it != productIndex.end()) {
            return it->second;
        }
        uint32_t index = static_cast<uint32_t>(productKeys.size());
        productIndex.emplace(key, index);
        productKeys.push_back(key);
        return index;
    };

    for (std::size_t s = 0; s < n; ++s) {
        discover(s, 0);
    }

    ExplicitModel product;
    product.kind = ModelKind::Mdp;
    std::vector<char> productGoal;
    bool sinkCreated = false;
    uint32_t sinkIndex = 0;
    auto sink = [&]() -> uint32_t {
        if (!sinkCreated) {
            // reserve an index; rows are appended when the BFS reaches it
            sinkIndex = static_cast<uint32_t>(productKeys.size());
            productKeys.push_back(UINT64_MAX);
            sinkCreated = true;
        }
        return sinkIndex;
    };

    for (std::size_t current = 0; current < productKeys.size(); ++current) {
        product.matrix.newRowGroup();
        uint64_t key = productKeys[current];
        if (key == UINT64_MAX) {
            product.matrix.newRow();
            product.matrix.pushEntry(MatrixEntry::point(static_cast<uint32_t>(current), 1.0));
            productGoal.push_back(0);
            continue;
        }
        std::size_t s = static_cast<std::size_t>(key % n);
        int64_t r = static_cast<int64_t>(key / n);
        if (goal.get(s)) {
            // reward still within bound: goal reached, absorb
            product.matrix.newRow();
            product.matrix.pushEntry(MatrixEntry::point(static_cast<uint32_t>(current), 1.0));
            productGoal.push_back(1);
            continue;
        }
        productGoal.push_back(0);
        for (uint64_t row = model.matrix.rowGroupBegin(s); row < model.matrix.rowGroupEnd(s); ++row) {
            product.matrix.newRow();
            int64_t accumulated = r + integerRewards[row];
            if (accumulated > bound) {
                product.matrix.pushEntry(MatrixEntry::point(sink(), 1.0));
                continue;
            }
            std::map<uint32_t, double> combined;
            for (auto const& entry : model.matrix.row(row)) {
                combined[discover(entry.column, accumulated)] += entry.lower;
            }
            for (auto const& [column, probability] : combined) {
                product.matrix.pushEntry(MatrixEntry::point(column, probability));
            }
        }
    }

    product.initialStates = BitVector(productKeys.size());
    for (std::size_t s = 0; s < n; ++s) {
        if (model.initialStates.get(s)) {
            product.initialStates.set(productIndex.at(keyOf(s, 0)));
        }
    }
    BitVector productGoalSet(productKeys.size());
    for (std::size_t i = 0; i < productGoal.size(); ++i) {
        if (productGoal[i]) {
            productGoalSet.set(i);
        }
    }

    auto productResult = checkReachability(product, productGoalSet, direction, env, false);

    CheckResult result;
    result.values.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        result.values[s] = productResult.values[productIndex.at(keyOf(s, 0))];
    }
    return result;
}

namespace {

/// Direct dense solve of (I - P_unknown) x = b with partial pivoting.
std::vector<double> gaussianSolve(std::vector<std::vector<double>>& matrix, std::vector<double>& rhs) {
    std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(matrix[row][col]) > std::abs(matrix[pivot][col])) {
                pivot = row;
            }
        }
        if (std::abs(matrix[pivot][col]) < 1e-14) {
            throw Error("internal error: singular linear system in dtmc solve");
        }
        std::swap(matrix[pivot], matrix[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            double factor = matrix[row][col] / matrix[col][col];
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t k = col; k < n; ++k) {
                matrix[row][k] -= factor * matrix[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    std::vector<double> solution(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double value = rhs[row];
        for (std::size_t k = row + 1; k < n; ++k) {
            value -= matrix[row][k] * solution[k];
        }
        solution[row] = value / matrix[row][row];
    }
    return solution;
}

constexpr std::size_t kDirectSolveLimit = 500;

CheckResult solveDtmcLinear(ExplicitModel const& model, std::vector<uint32_t> const& unknown,
                            std::vector<double>& values, std::vector<double> const& rowRewards,
                            Environment const& env) {
    if (unknown.size() <= kDirectSolveLimit) {
        std::unordered_map<uint32_t, std::size_t> position;
        for (std::size_t i = 0; i < unknown.size(); ++i) {
            position.emplace(unknown[i], i);
        }
        std::vector<std::vector<double>> matrix(unknown.size(), std::vector<double>(unknown.size(), 0.0));
        std::vector<double> rhs(unknown.size(), 0.0);
        for (std::size_t i = 0; i < unknown.size(); ++i) {
            uint32_t state = unknown[i];
            uint64_t row = model.matrix.rowGroupBegin(state);
            matrix[i][i] = 1.0;
            rhs[i] = rowRewards.empty() ? 0.0 : rowRewards[row];
            for (auto const& entry : model.matrix.row(row)) {
                auto it = position.find(entry.column);
                if (it != position.end()) {
                    matrix[i][it->second] -= entry.lower;
                } else {
                    rhs[i] += entry.lower * values[entry.column];
                }
            }
        }
        auto solution = gaussianSolve(matrix, rhs);
        for (std::size_t i = 0; i < unknown.size(); ++i) {
            values[unknown[i]] = solution[i];
        }
    } else {
        NumericProblem problem{model, Direction::Max, env, unknown, values, rowRewards, rowRewards.empty()};
        runValueIteration(problem, true);
        values = problem.values;
    }
    CheckResult result;
    result.values = values;
    return result;
}

} // namespace

CheckResult solveDtmcReachability(ExplicitModel const& model, BitVector const& goal, Environment const& env) {
    if (model.kind != ModelKind::Dtmc) {
        throw UnsupportedError("dtmc solve: requires a dtmc, got " + toString(model.kind));
    }
    requireStateVector(model, goal, "goal");
    std::size_t n = model.numStates();
    PredecessorGraph pred(model);
    BitVector all(n, true);
    BitVector prob0 = prob0Max(model, all, goal, pred);
    BitVector prob1 = prob1MaxWithWitness(model, all, goal, pred).states;

    std::vector<double> values(n, 0.0);
    std::vector<uint32_t> unknown;
    for (std::size_t s = 0; s < n; ++s) {
        if (prob1.get(s)) {
            values[s] = 1.0;
        } else if (!prob0.get(s)) {
            unknown.push_back(static_cast<uint32_t>(s));
        }
    }
    return solveDtmcLinear(model, unknown, values, {}, env);
}

CheckResult solveDtmcReward(ExplicitModel const& model, std::string const& rewardName, BitVector const& goal,
                            Environment const& env) {
    if (model.kind != ModelKind::Dtmc) {
        throw UnsupportedError("dtmc solve: requires a dtmc, got " + toString(model.kind));
    }
    requireStateVector(model, goal, "goal");
    RewardStructure const& structure = findRewardStructure(model, rewardName);
    std::size_t n = model.numStates();
    PredecessorGraph pred(model);
    BitVector all(n, true);
    BitVector finite = prob1MaxWithWitness(model, all, goal, pred).states;

    std::vector<double> values(n, 0.0);
    std::vector<uint32_t> unknown;
    for (std::size_t s = 0; s < n; ++s) {
        if (!finite.get(s)) {
            values[s] = kInf;
        } else if (!goal.get(s)) {
            unknown.push_back(static_cast<uint32_t>(s));
        }
    }
    return solveDtmcLinear(model, unknown, values, rewardPerRow(model, structure), env);
}

} // namespace stormlet
