#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stormlet/engines.hpp"
#include "stormlet/model.hpp"
#include "stormlet/rational.hpp"

namespace stormlet {

/// How interval uncertainty is resolved relative to the optimizing policy:
/// cooperative picks distributions in the policy's favor, robust against it.
enum class UncertaintyMode { Cooperative, Robust };

/// Reachability on an interval MDP under dynamic uncertainty semantics: each
/// Bellman step resolves every row's distribution within its intervals,
/// extremizing the expected continuation value.
CheckResult checkIntervalReachability(ExplicitModel const& model, BitVector const& goal, Direction direction,
                                      UncertaintyMode mode, Environment const& env = Environment());

/// Extremal expectation over the transportation polytope
/// { x : lower <= x <= upper, sum x = 1 } for the given continuation values.
/// Returns the extremum and a witness distribution attaining it.
std::pair<double, std::vector<double>> innerExtremum(std::vector<Interval> const& intervals,
                                                     std::vector<double> const& values, Direction sense);

/// Polynomial expression over declared parameters: rational constants,
/// parameter references, +, -, *.
class ParamExpr {
  public:
    static ParamExpr constant(Rational value);
    static ParamExpr parameter(std::size_t index);
    static ParamExpr add(ParamExpr lhs, ParamExpr rhs);
    static ParamExpr sub(ParamExpr lhs, ParamExpr rhs);
    static ParamExpr mul(ParamExpr lhs, ParamExpr rhs);

    Rational evaluate(std::vector<Rational> const& parameterValues) const;
    bool isConstant() const;

  private:
    enum class Op { Constant, Parameter, Add, Sub, Mul };
    Op op_ = Op::Constant;
    Rational value_;
    std::size_t parameter_ = 0;
    std::shared_ptr<ParamExpr const> lhs_;
    std::shared_ptr<ParamExpr const> rhs_;
};

struct ParametricEntry {
    uint32_t column = 0;
    ParamExpr expression;
};

/// Explicit model whose transition probabilities are expressions over
/// parameters. Shares the row-group layout of ExplicitModel.
struct ParametricModel {
    std::vector<std::string> parameters;
    std::vector<uint64_t> rowGroupOffsets{0};
    std::vector<uint64_t> rowOffsets{0};
    std::vector<ParametricEntry> entries;
    BitVector initialStates;
    std::map<std::string, BitVector> labels;
    std::map<std::string, RewardStructure> rewards;
    std::optional<std::vector<std::string>> choiceLabels;

    std::size_t numStates() const { return rowGroupOffsets.size() - 1; }
    std::size_t numChoices() const { return rowOffsets.size() - 1; }

    void newRowGroup() { rowGroupOffsets.push_back(rowGroupOffsets.back()); }
    void newRow() {
        rowOffsets.push_back(rowOffsets.back());
        ++rowGroupOffsets.back();
    }
    void pushEntry(ParametricEntry entry) {
        entries.push_back(std::move(entry));
        ++rowOffsets.back();
    }
};

/// Instantiates all parameters, dropping zero-valued entries. Throws
/// ModelError when an entry leaves [0, 1] or a row does not sum to 1.
ExplicitModel instantiate(ParametricModel const& model, std::map<std::string, Rational> const& valuation);

struct GridRow {
    std::vector<Rational> point;
    double value = 0.0;
    bool valid = true;
};

/// Evaluates the reachability value on the cartesian grid of parameter
/// values. Invalid instantiations flag their row instead of failing the run.
std::vector<GridRow> sampleGrid(ParametricModel const& model, BitVector const& goal, Direction direction,
                                std::vector<std::vector<Rational>> const& axes,
                                Environment const& env = Environment());

/// Renders a sampled grid as CSV with a header naming the parameters.
std::string gridCsv(ParametricModel const& model, std::vector<GridRow> const& rows);

} // namespace stormlet
