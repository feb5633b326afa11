#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stormlet/model.hpp"

namespace stormlet {

/// LP encoding of maximal reachability: one [0,1] variable per state,
/// objective minimize the sum, with x_s = 1 on goal states, x_s = 0 on
/// states that cannot reach the goal, and x_s >= sum P(s,a,s') x_{s'} for
/// every choice of the remaining states.
struct LpProblem {
    enum class ConstraintKind { EqualOne, EqualZero, GeqRow };
    struct Constraint {
        ConstraintKind kind = ConstraintKind::GeqRow;
        uint32_t state = 0;
        // GeqRow: canonical left-hand side of x_s - sum p x_{s'} >= 0
        std::vector<std::pair<uint32_t, double>> terms; // ascending column
    };
    std::size_t numVariables = 0;
    std::vector<Constraint> constraints;
};

LpProblem encodeReachabilityLp(ExplicitModel const& model, BitVector const& goal);

/// Solves with the built-in dense two-phase simplex (Bland's rule);
/// equality-constrained variables are substituted away first. Limited to
/// 5000 variables; export the LP for anything larger.
std::vector<double> solveLp(LpProblem const& problem);

/// CPLEX-LP-format text, deterministic and byte-stable.
std::string exportLp(LpProblem const& problem);

} // namespace stormlet
