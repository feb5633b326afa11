#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stormlet/model.hpp"
#include "stormlet/rational.hpp"

namespace stormlet {

/// Expression tree of the PRISM subset: numeric literals, identifier
/// references (constants, formulas, variables), arithmetic, comparisons and
/// boolean connectives. Division is only admitted between constants and is
/// folded away during instantiation.
struct PrismExpression {
    enum class Kind { Literal, BoolLiteral, Identifier, Unary, Binary };
    enum class Op { Plus, Minus, Times, Divide, Eq, Neq, Lt, Leq, Gt, Geq, And, Or, Not, Negate };

    Kind kind = Kind::Literal;
    Rational literal;
    bool boolValue = false;
    std::string name;
    Op op = Op::Plus;
    std::shared_ptr<PrismExpression const> lhs;
    std::shared_ptr<PrismExpression const> rhs;
    std::size_t line = 0;
    std::size_t column = 0;
};

using PrismExprPtr = std::shared_ptr<PrismExpression const>;

enum class PrismConstantType { Int, Double };

struct PrismConstant {
    PrismConstantType type = PrismConstantType::Int;
    std::string name;
    PrismExprPtr definition; // null for undefined constants
};

struct PrismFormula {
    std::string name;
    PrismExprPtr definition;
};

struct PrismVariable {
    std::string name;
    PrismExprPtr lowerBound;
    PrismExprPtr upperBound;
    PrismExprPtr init;
};

struct PrismAssignment {
    std::string variable;
    PrismExprPtr value;
};

struct PrismBranch {
    PrismExprPtr probability;
    std::vector<PrismAssignment> assignments; // empty encodes "true"
};

struct PrismCommand {
    std::string action; // empty for unlabeled commands
    PrismExprPtr guard;
    std::vector<PrismBranch> branches;
    std::size_t line = 0;
};

struct PrismModule {
    std::string name;
    std::vector<PrismVariable> variables;
    std::vector<PrismCommand> commands;
};

struct PrismLabel {
    std::string name;
    PrismExprPtr expression;
};

struct PrismRewardItem {
    PrismExprPtr guard;
    PrismExprPtr value;
};

struct PrismRewards {
    std::string name;
    std::vector<PrismRewardItem> items;
};

struct PrismProgram {
    std::vector<PrismConstant> constants;
    std::vector<PrismFormula> formulas;
    std::vector<PrismModule> modules;
    std::vector<PrismLabel> labels;
    std::vector<PrismRewards> rewardStructures;
};

/// Parses the mdp-only PRISM subset. Out-of-subset features raise
/// UnsupportedError naming the feature; malformed input raises ParseError
/// with line and column.
PrismProgram parsePrism(std::string const& source);

/// Binds the undefined constants and folds every constant expression to an
/// exact rational literal. Derived constants are evaluated in rational
/// arithmetic; division between non-constants is rejected here.
PrismProgram instantiateConstants(PrismProgram const& program, std::map<std::string, Rational> const& bindings);

struct PrismBuildOptions {
    bool buildStateValuations = true;
    bool buildChoiceLabels = true;
};

/// Explores the reachable state space of a fully instantiated program with
/// standard alphabet-based synchronization semantics.
ExplicitModel buildFromPrism(PrismProgram const& program, PrismBuildOptions const& options = PrismBuildOptions());

/// Canonical source form; re-parses to a structurally equal program.
std::string printPrism(PrismProgram const& program);

/// Parses "NAME=VALUE,NAME=VALUE" constant binding lists (values are decimal
/// or rational literals).
std::map<std::string, Rational> parseConstantBindings(std::string const& text);

} // namespace stormlet
