#include "stormlet/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "stormlet/engines.hpp"
#include "stormlet/exceptions.hpp"
#include "stormlet/model_json.hpp"

namespace stormlet {

LpProblem encodeReachabilityLp(ExplicitModel const& model, BitVector const& goal) {
    if (model.kind != ModelKind::Dtmc && model.kind != ModelKind::Mdp) {
        throw UnsupportedError("lp encoding: requires a point-valued dtmc/mdp");
    }
    if (goal.size() != model.numStates()) {
        throw ModelError("lp encoding: goal vector has wrong length");
    }
    BitVector all(model.numStates(), true);
    BitVector prob0 = prob01Max(model, all, goal).prob0;

    LpProblem problem;
    problem.numVariables = model.numStates();
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        if (goal.get(s)) {
            problem.constraints.push_back({LpProblem::ConstraintKind::EqualOne, static_cast<uint32_t>(s), {}});
        } else if (prob0.get(s)) {
            problem.constraints.push_back({LpProblem::ConstraintKind::EqualZero, static_cast<uint32_t>(s), {}});
        } else {
            for (uint64_t row = model.matrix.rowGroupBegin(s); row < model.matrix.rowGroupEnd(s); ++row) {
                std::map<uint32_t, double> coefficients;
                coefficients[static_cast<uint32_t>(s)] = 1.0;
                for (auto const& entry : model.matrix.row(row)) {
                    coefficients[entry.column] -= entry.lower;
                }
                LpProblem::Constraint constraint;
                constraint.kind = LpProblem::ConstraintKind::GeqRow;
                constraint.state = static_cast<uint32_t>(s);
                for (auto const& [column, coefficient] : coefficients) {
                    if (coefficient != 0.0) {
                        constraint.terms.emplace_back(column, coefficient);
                    }
                }
                problem.constraints.push_back(std::move(constraint));
            }
        }
    }
    return problem;
}

namespace {

/// Dense two-phase simplex for min c'x subject to Ax >= b, 0 <= x <= 1.
/// Bland's rule (lowest eligible index) prevents cycling.
class DenseSimplex {
  public:
    DenseSimplex(std::vector<std::vector<double>> rows, std::vector<double> rhs, std::vector<double> objective)
        : a_(std::move(rows)), b_(std::move(rhs)), c_(std::move(objective)), m_(a_.size()), n_(c_.size()) {}

    std::vector<double> solve() {
        buildTableau();
        if (artificialCount_ > 0) {
            runPhase(true);
            // the objective row holds the negated phase-1 value
            if (tableau_.back()[cols_ - 1] < -1e-7) {
                throw Error("internal error: lp reported infeasible");
            }
            // pivot leftover basic artificials out so phase 2 cannot move them
            for (std::size_t i = 0; i < m_; ++i) {
                if (basis_[i] >= n_ + m_) {
                    for (std::size_t j = 0; j < n_ + m_; ++j) {
                        if (std::abs(tableau_[i][j]) > 1e-9) {
                            pivot(i, j);
                            break;
                        }
                    }
                }
            }
        }
        runPhase(false);
        std::vector<double> solution(n_, 0.0);
        for (std::size_t row = 0; row < m_; ++row) {
            if (basis_[row] < n_) {
                solution[basis_[row]] = tableau_[row][cols_ - 1];
            }
        }
        return solution;
    }

  private:
    void buildTableau() {
        // normalize to b >= 0
        for (std::size_t i = 0; i < m_; ++i) {
            if (b_[i] < 0.0) {
                for (auto& v : a_[i]) {
                    v = -v;
                }
                b_[i] = -b_[i];
                geq_.push_back(false);
            } else {
                geq_.push_back(true);
            }
        }
        // columns: x (n), surplus/slack (m), artificials (added on demand), rhs
        artificialCount_ = 0;
        std::vector<std::size_t> artificialRows;
        for (std::size_t i = 0; i < m_; ++i) {
            bool slackFeasible = !geq_[i] || b_[i] == 0.0;
            if (!slackFeasible) {
                ++artificialCount_;
                artificialRows.push_back(i);
            }
        }
        cols_ = n_ + m_ + artificialCount_ + 1;
        tableau_.assign(m_ + 1, std::vector<double>(cols_, 0.0));
        basis_.assign(m_, 0);
        std::size_t nextArtificial = n_ + m_;
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                tableau_[i][j] = a_[i][j];
            }
            // geq rows get a surplus (-1), flipped rows a slack (+1)
            tableau_[i][n_ + i] = geq_[i] ? -1.0 : 1.0;
            tableau_[i][cols_ - 1] = b_[i];
            bool slackFeasible = !geq_[i] || b_[i] == 0.0;
            if (slackFeasible) {
                if (geq_[i]) {
                    // b == 0: make the surplus basic by flipping the row
                    for (std::size_t j = 0; j < cols_; ++j) {
                        tableau_[i][j] = -tableau_[i][j];
                    }
                }
                basis_[i] = n_ + i;
            } else {
                tableau_[i][nextArtificial] = 1.0;
                basis_[i] = nextArtificial;
                ++nextArtificial;
            }
        }
    }

    void setObjective(bool phase1) {
        auto& z = tableau_[m_];
        std::fill(z.begin(), z.end(), 0.0);
        if (phase1) {
            for (std::size_t j = n_ + m_; j < cols_ - 1; ++j) {
                z[j] = 1.0;
            }
        } else {
            for (std::size_t j = 0; j < n_; ++j) {
                z[j] = c_[j];
            }
        }
        // price out the basic variables
        for (std::size_t i = 0; i < m_; ++i) {
            double coefficient = z[basis_[i]];
            if (coefficient != 0.0) {
                for (std::size_t j = 0; j < cols_; ++j) {
                    z[j] -= coefficient * tableau_[i][j];
                }
            }
        }
    }

    void runPhase(bool phase1) {
        setObjective(phase1);
        auto& z = tableau_[m_];
        constexpr double kEps = 1e-11;
        for (uint64_t iteration = 0; iteration < 2000000; ++iteration) {
            // Bland: entering = lowest-index column with negative reduced cost
            std::size_t entering = cols_ - 1;
            std::size_t limit = phase1 ? cols_ - 1 : n_ + m_;
            for (std::size_t j = 0; j < limit; ++j) {
                if (!phase1 && j >= n_ + m_) {
                    break;
                }
                if (z[j] < -kEps) {
                    entering = j;
                    break;
                }
            }
            if (entering == cols_ - 1) {
                return; // optimal
            }
            // leaving: min ratio, ties to the lowest basis index
            std::size_t leaving = m_;
            double bestRatio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (tableau_[i][entering] > kEps) {
                    double ratio = tableau_[i][cols_ - 1] / tableau_[i][entering];
                    if (leaving == m_ || ratio < bestRatio - kEps ||
                        (ratio < bestRatio + kEps && basis_[i] < basis_[leaving])) {
                        leaving = i;
                        bestRatio = ratio;
                    }
                }
            }
            if (leaving == m_) {
                throw Error("internal error: lp unbounded");
            }
            pivot(leaving, entering);
        }
        throw ConvergenceError("simplex exceeded its iteration budget");
    }

    void pivot(std::size_t row, std::size_t col) {
        double pivotValue = tableau_[row][col];
        for (std::size_t j = 0; j < cols_; ++j) {
            tableau_[row][j] /= pivotValue;
        }
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == row) {
                continue;
            }
            double factor = tableau_[i][col];
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < cols_; ++j) {
                tableau_[i][j] -= factor * tableau_[row][j];
            }
        }
        basis_[row] = col;
    }

    std::vector<std::vector<double>> a_;
    std::vector<double> b_;
    std::vector<double> c_;
    std::size_t m_;
    std::size_t n_;
    std::size_t cols_ = 0;
    std::size_t artificialCount_ = 0;
    std::vector<bool> geq_;
    std::vector<std::vector<double>> tableau_;
    std::vector<std::size_t> basis_;
};

} // namespace

std::vector<double> solveLp(LpProblem const& problem) {
    if (problem.numVariables > 5000) {
        throw UnsupportedError("lp solve: " + std::to_string(problem.numVariables) +
                               " variables exceed the built-in limit of 5000; use the LP export instead");
    }

    // substitute the equality-pinned variables
    std::vector<double> fixedValue(problem.numVariables, -1.0); // -1 = free
    for (auto const& constraint : problem.constraints) {
        if (constraint.kind == LpProblem::ConstraintKind::EqualOne) {
            fixedValue[constraint.state] = 1.0;
        } else if (constraint.kind == LpProblem::ConstraintKind::EqualZero) {
            fixedValue[constraint.state] = 0.0;
        }
    }
    std::vector<std::size_t> columnOf(problem.numVariables, SIZE_MAX);
    std::vector<uint32_t> freeVariables;
    for (std::size_t v = 0; v < problem.numVariables; ++v) {
        if (fixedValue[v] < 0.0) {
            columnOf[v] = freeVariables.size();
            freeVariables.push_back(static_cast<uint32_t>(v));
        }
    }

    std::size_t n = freeVariables.size();
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (auto const& constraint : problem.constraints) {
        if (constraint.kind != LpProblem::ConstraintKind::GeqRow) {
            continue;
        }
        std::vector<double> row(n, 0.0);
        double bound = 0.0;
        for (auto const& [variable, coefficient] : constraint.terms) {
            if (fixedValue[variable] >= 0.0) {
                bound -= coefficient * fixedValue[variable];
            } else {
                row[columnOf[variable]] += coefficient;
            }
        }
        rows.push_back(std::move(row));
        rhs.push_back(bound);
    }
    // upper bounds x <= 1 as -x >= -1
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(n, 0.0);
        row[j] = -1.0;
        rows.push_back(std::move(row));
        rhs.push_back(-1.0);
    }

    std::vector<double> solution(problem.numVariables, 0.0);
    for (std::size_t v = 0; v < problem.numVariables; ++v) {
        if (fixedValue[v] >= 0.0) {
            solution[v] = fixedValue[v];
        }
    }
    if (n > 0) {
        DenseSimplex simplex(std::move(rows), std::move(rhs), std::vector<double>(n, 1.0));
        std::vector<double> values = simplex.solve();
        for (std::size_t j = 0; j < n; ++j) {
            solution[freeVariables[j]] = values[j];
        }
    }
    return solution;
}

std::string exportLp(LpProblem const& problem) {
    std::string out = "Minimize\n obj:";
    for (std::size_t v = 0; v < problem.numVariables; ++v) {
        out += v == 0 ? " " : " + ";
        out += "x" + std::to_string(v);
    }
    out += "\nSubject To\n";
    std::size_t index = 0;
    for (auto const& constraint : problem.constraints) {
        out += " c" + std::to_string(index++) + ": ";
        switch (constraint.kind) {
        case LpProblem::ConstraintKind::EqualOne:
            out += "x" + std::to_string(constraint.state) + " = 1\n";
            break;
        case LpProblem::ConstraintKind::EqualZero:
            out += "x" + std::to_string(constraint.state) + " = 0\n";
            break;
        case LpProblem::ConstraintKind::GeqRow: {
            if (constraint.terms.empty()) {
                out += "0 x" + std::to_string(constraint.state) + " >= 0\n";
                break;
            }
            bool first = true;
            for (auto const& [variable, coefficient] : constraint.terms) {
                double magnitude = std::abs(coefficient);
                if (first) {
                    if (coefficient < 0.0) {
                        out += "- ";
                    }
                } else {
                    out += coefficient < 0.0 ? " - " : " + ";
                }
                if (magnitude != 1.0) {
                    out += formatDouble(magnitude) + " ";
                }
                out += "x" + std::to_string(variable);
                first = false;
            }
            out += " >= 0\n";
            break;
        }
        }
    }
    out += "Bounds\n";
    for (std::size_t v = 0; v < problem.numVariables; ++v) {
        out += " 0 <= x" + std::to_string(v) + " <= 1\n";
    }
    out += "End\n";
    return out;
}

} // namespace stormlet
