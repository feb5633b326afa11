#pragma once

#include <memory>
#include <optional>
#include <string>

#include "stormlet/engines.hpp"
#include "stormlet/model.hpp"

namespace stormlet {

/// Boolean formula over quoted state labels.
struct StateFormula {
    enum class Kind { True, Label, Not, And, Or };
    Kind kind = Kind::True;
    std::string label;
    std::shared_ptr<StateFormula const> lhs;
    std::shared_ptr<StateFormula const> rhs;
};

using StateFormulaPtr = std::shared_ptr<StateFormula const>;

enum class PropertyOperator { Probability, Reward, LabelQuery };
enum class OptDirection { Max, Min, None };
enum class BoundRelation { Geq, Leq, Gt, Lt };

/// Parsed query: a probability / reward operator over an eventually path
/// formula (optionally reward-bounded), or a bare state formula.
struct PropertyAst {
    PropertyOperator op = PropertyOperator::LabelQuery;
    OptDirection direction = OptDirection::None;
    std::string rewardName;                                    // reward queries
    std::optional<std::pair<BoundRelation, double>> bound;     // P>=0.6 style
    std::optional<std::pair<std::string, int64_t>> pathBound;  // F{"rew"}<=k
    StateFormulaPtr goal;
};

/// Parses the property subset: bare state formulas, `P{max|min}{=?|relop c}
/// [F ["{rew}<=k"] phi]`, and `R{"rew"}{max|min}=? [F phi]`. Recognized but
/// unsupported constructs (conditional `||`, `multi(`, `U`, `G`, `X`) raise
/// UnsupportedError naming the construct.
PropertyAst parseProperty(std::string const& text);

/// Canonical text form; parse(print(parse(s))) == parse(s).
std::string printProperty(PropertyAst const& ast);

/// Pointwise evaluation over the model's label sets.
BitVector evaluateStateFormula(ExplicitModel const& model, StateFormula const& formula);

struct PropertyCheckOutcome {
    CheckResult result;
    std::optional<BitVector> satisfaction; // present iff the property carries a bound
};

/// Dispatches a parsed property to the owning engine. DTMC queries run
/// through the linear solver; MDP queries require a direction.
PropertyCheckOutcome evaluateProperty(ExplicitModel const& model, PropertyAst const& ast,
                                      Environment const& env = Environment(), bool extractScheduler = false);

} // namespace stormlet
