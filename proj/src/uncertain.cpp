#include "stormlet/uncertain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stormlet/exceptions.hpp"
#include "stormlet/model_json.hpp"
#include "stormlet/model_ops.hpp"

namespace stormlet {

namespace {

/// Sort-and-saturate: start every entry at its lower bound and hand the
/// remaining mass to entries in continuation-value order (best first for the
/// maximizing sense), each up to its upper bound. Ties go to the lower index.
double resolveRow(std::span<MatrixEntry const> entries, std::vector<double> const& continuation, Direction sense,
                  std::vector<double>* witness, std::vector<uint32_t>& order) {
    order.resize(entries.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        double va = continuation[entries[a].column];
        double vb = continuation[entries[b].column];
        return sense == Direction::Max ? va > vb : va < vb;
    });
    double remaining = 1.0;
    for (auto const& entry : entries) {
        remaining -= entry.lower;
    }
    if (remaining < 0.0) {
        remaining = 0.0;
    }
    double expectation = 0.0;
    if (witness) {
        witness->assign(entries.size(), 0.0);
    }
    for (uint32_t i : order) {
        double mass = entries[i].lower;
        if (entries[i].interval && remaining > 0.0) {
            double extra = std::min(remaining, entries[i].upper - entries[i].lower);
            mass += extra;
            remaining -= extra;
        }
        expectation += mass * continuation[entries[i].column];
        if (witness) {
            (*witness)[i] = mass;
        }
    }
    return expectation;
}

} // namespace

std::pair<double, std::vector<double>> innerExtremum(std::vector<Interval> const& intervals,
                                                     std::vector<double> const& values, Direction sense) {
    if (intervals.size() != values.size()) {
        throw ModelError("inner extremum: interval and value lists differ in length");
    }
    double lowerSum = 0.0;
    double upperSum = 0.0;
    for (auto const& interval : intervals) {
        if (!(interval.lower >= 0.0 && interval.lower <= interval.upper && interval.upper <= 1.0)) {
            throw ModelError("inner extremum: invalid interval");
        }
        lowerSum += interval.lower;
        upperSum += interval.upper;
    }
    if (lowerSum > 1.0 + kRowSumTolerance || upperSum < 1.0 - kRowSumTolerance) {
        throw ModelError("inner extremum: infeasible row");
    }

    // reuse the row resolver by building interval entries over a local index
    std::vector<MatrixEntry> entries(intervals.size());
    std::vector<double> continuation(values);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        entries[i] = MatrixEntry::bounded(static_cast<uint32_t>(i), intervals[i].lower, intervals[i].upper);
    }
    std::vector<double> witness;
    std::vector<uint32_t> order;
    double expectation =
        resolveRow(std::span<MatrixEntry const>(entries.data(), entries.size()), continuation, sense, &witness, order);
    return {expectation, std::move(witness)};
}

CheckResult checkIntervalReachability(ExplicitModel const& model, BitVector const& goal, Direction direction,
                                      UncertaintyMode mode, Environment const& env) {
    if (model.kind != ModelKind::Imdp) {
        throw UnsupportedError("interval check: requires an imdp, got " + toString(model.kind));
    }
    if (goal.size() != model.numStates()) {
        throw ModelError("interval check: goal vector has wrong length");
    }
    requireValid(model, "interval check");

    // Nature extremizes each row: with the policy under cooperative
    // resolution, against it under robust resolution.
    Direction inner = mode == UncertaintyMode::Cooperative ? direction : oppositeOf(direction);

    std::size_t n = model.numStates();
    std::vector<double> values(n, 0.0);
    std::vector<uint32_t> unknown;
    for (std::size_t s = 0; s < n; ++s) {
        if (goal.get(s)) {
            values[s] = 1.0;
        } else {
            unknown.push_back(static_cast<uint32_t>(s));
        }
    }

    std::vector<double> next(values);
    std::vector<uint32_t> order;
    for (uint64_t iteration = 0; iteration < env.maxIterations; ++iteration) {
        bool converged = true;
        for (uint32_t state : unknown) {
            double best = direction == Direction::Max ? -1.0 : 2.0;
            for (uint64_t row = model.matrix.rowGroupBegin(state); row < model.matrix.rowGroupEnd(state); ++row) {
                double q = resolveRow(model.matrix.row(row), values, inner, nullptr, order);
                if (direction == Direction::Max ? q > best : q < best) {
                    best = q;
                }
            }
            double delta = best - values[state];
            bool ok = env.criterion == Criterion::Absolute ? std::abs(delta) <= env.precision
                                                           : std::abs(delta) <= env.precision * std::abs(best);
            if (!ok) {
                converged = false;
            }
            next[state] = best;
        }
        for (uint32_t state : unknown) {
            values[state] = next[state];
        }
        if (converged) {
            CheckResult result;
            result.values = std::move(values);
            return result;
        }
    }
    throw ConvergenceError("interval value iteration did not converge");
}

ParamExpr ParamExpr::constant(Rational value) {
    ParamExpr expr;
    expr.op_ = Op::Constant;
    expr.value_ = std::move(value);
    return expr;
}

ParamExpr ParamExpr::parameter(std::size_t index) {
    ParamExpr expr;
    expr.op_ = Op::Parameter;
    expr.parameter_ = index;
    return expr;
}

ParamExpr ParamExpr::add(ParamExpr lhs, ParamExpr rhs) {
    ParamExpr expr;
    expr.op_ = Op::Add;
    expr.lhs_ = std::make_shared<ParamExpr const>(std::move(lhs));
    expr.rhs_ = std::make_shared<ParamExpr const>(std::move(rhs));
    return expr;
}

ParamExpr ParamExpr::sub(ParamExpr lhs, ParamExpr rhs) {
    ParamExpr expr;
    expr.op_ = Op::Sub;
    expr.lhs_ = std::make_shared<ParamExpr const>(std::move(lhs));
    expr.rhs_ = std::make_shared<ParamExpr const>(std::move(rhs));
    return expr;
}

ParamExpr ParamExpr::mul(ParamExpr lhs, ParamExpr rhs) {
    ParamExpr expr;
    expr.op_ = Op::Mul;
    expr.lhs_ = std::make_shared<ParamExpr const>(std::move(lhs));
    expr.rhs_ = std::make_shared<ParamExpr const>(std::move(rhs));
    return expr;
}

Rational ParamExpr::evaluate(std::vector<Rational> const& parameterValues) const {
    switch (op_) {
    case Op::Constant:
        return value_;
    case Op::Parameter:
        return parameterValues.at(parameter_);
    case Op::Add:
        return lhs_->evaluate(parameterValues) + rhs_->evaluate(parameterValues);
    case Op::Sub:
        return lhs_->evaluate(parameterValues) - rhs_->evaluate(parameterValues);
    case Op::Mul:
        return lhs_->evaluate(parameterValues) * rhs_->evaluate(parameterValues);
    }
    return Rational(0);
}

bool ParamExpr::isConstant() const {
    switch (op_) {
    case Op::Constant:
        return true;
    case Op::Parameter:
        return false;
    default:
        return lhs_->isConstant() && rhs_->isConstant();
    }
}

ExplicitModel instantiate(ParametricModel const& model, std::map<std::string, Rational> const& valuation) {
    std::vector<Rational> parameterValues;
    for (auto const& name : model.parameters) {
        auto it = valuation.find(name);
        if (it == valuation.end()) {
            throw ModelError("instantiation: parameter " + name + " is not bound");
        }
        parameterValues.push_back(it->second);
    }

    ExplicitModel result;
    result.kind = ModelKind::Mdp;
    result.initialStates = model.initialStates;
    result.labels = model.labels;
    result.rewards = model.rewards;
    result.choiceLabels = model.choiceLabels;

    std::size_t numStates = model.numStates();
    for (std::size_t state = 0; state < numStates; ++state) {
        result.matrix.newRowGroup();
        for (uint64_t row = model.rowGroupOffsets[state]; row < model.rowGroupOffsets[state + 1]; ++row) {
            result.matrix.newRow();
            Rational sum(0);
            for (uint64_t e = model.rowOffsets[row]; e < model.rowOffsets[row + 1]; ++e) {
                auto const& entry = model.entries[e];
                Rational value = entry.expression.evaluate(parameterValues);
                if (value < 0 || value > 1) {
                    std::ostringstream message;
                    message << "instantiation: probability " << rationalToString(value) << " out of [0,1] at state "
                            << state << " entry " << (e - model.rowOffsets[row]);
                    throw ModelError(message.str());
                }
                sum += value;
                if (value != 0) {
                    result.matrix.pushEntry(MatrixEntry::point(entry.column, toDouble(value)));
                }
            }
            double sumError = std::abs(toDouble(sum) - 1.0);
            if (sumError > kRowSumTolerance) {
                throw ModelError("instantiation: row of state " + std::to_string(state) + " sums to " +
                                 formatDouble(toDouble(sum)) + ", not 1");
            }
        }
    }
    return result;
}

std::vector<GridRow> sampleGrid(ParametricModel const& model, BitVector const& goal, Direction direction,
                                std::vector<std::vector<Rational>> const& axes, Environment const& env) {
    if (axes.size() != model.parameters.size()) {
        throw ModelError("grid sampling: expected one axis per parameter");
    }
    std::vector<GridRow> rows;
    std::vector<std::size_t> cursor(axes.size(), 0);
    bool done = axes.empty();
    while (!done) {
        GridRow row;
        std::map<std::string, Rational> valuation;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            row.point.push_back(axes[i][cursor[i]]);
            valuation.emplace(model.parameters[i], axes[i][cursor[i]]);
        }
        try {
            ExplicitModel instance = instantiate(model, valuation);
            row.value = checkReachability(instance, goal, direction, env).values[instance.firstInitialState()];
        } catch (Error const&) {
            row.valid = false;
        }
        rows.push_back(std::move(row));

        // advance odometer, last axis fastest
        std::size_t axis = axes.size();
        while (axis-- > 0) {
            if (++cursor[axis] < axes[axis].size()) {
                break;
            }
            cursor[axis] = 0;
            if (axis == 0) {
                done = true;
            }
        }
    }
    return rows;
}

std::string gridCsv(ParametricModel const& model, std::vector<GridRow> const& rows) {
    std::string out;
    for (std::size_t i = 0; i < model.parameters.size(); ++i) {
        if (i > 0) {
            out += ",";
        }
        out += model.parameters[i];
    }
    out += ",value\n";
    for (auto const& row : rows) {
        for (auto const& value : row.point) {
            out += formatDouble(toDouble(value)) + ",";
        }
        out += row.valid ? formatDouble(row.value) : "invalid";
        out += "\n";
    }
    return out;
}

} // namespace stormlet
