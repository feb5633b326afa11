#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stormlet/exceptions.hpp"
#include "stormlet/model_ops.hpp"
#include "stormlet/prism.hpp"

namespace stormlet {

namespace {

std::string location(PrismExpression const& expr) {
    return "line " + std::to_string(expr.line) + ", column " + std::to_string(expr.column);
}

PrismExprPtr makeLiteral(Rational value, PrismExpression const& like) {
    auto node = std::make_shared<PrismExpression>();
    node->kind = PrismExpression::Kind::Literal;
    node->literal = std::move(value);
    node->line = like.line;
    node->column = like.column;
    return node;
}

PrismExprPtr makeBoolLiteral(bool value, PrismExpression const& like) {
    auto node = std::make_shared<PrismExpression>();
    node->kind = PrismExpression::Kind::BoolLiteral;
    node->boolValue = value;
    node->line = like.line;
    node->column = like.column;
    return node;
}

bool isArithmetic(PrismExpression::Op op) {
    switch (op) {
    case PrismExpression::Op::Plus:
    case PrismExpression::Op::Minus:
    case PrismExpression::Op::Times:
    case PrismExpression::Op::Divide:
        return true;
    default:
        return false;
    }
}

bool isComparison(PrismExpression::Op op) {
    switch (op) {
    case PrismExpression::Op::Eq:
    case PrismExpression::Op::Neq:
    case PrismExpression::Op::Lt:
    case PrismExpression::Op::Leq:
    case PrismExpression::Op::Gt:
    case PrismExpression::Op::Geq:
        return true;
    default:
        return false;
    }
}

bool compareRationals(PrismExpression::Op op, Rational const& lhs, Rational const& rhs) {
    switch (op) {
    case PrismExpression::Op::Eq:
        return lhs == rhs;
    case PrismExpression::Op::Neq:
        return lhs != rhs;
    case PrismExpression::Op::Lt:
        return lhs < rhs;
    case PrismExpression::Op::Leq:
        return lhs <= rhs;
    case PrismExpression::Op::Gt:
        return lhs > rhs;
    case PrismExpression::Op::Geq:
        return lhs >= rhs;
    default:
        return false;
    }
}

/// Substitutes constants by literals and folds constant subtrees. Division
/// must disappear here; remaining division nodes are rejected.
PrismExprPtr substituteAndFold(PrismExprPtr const& expr, std::map<std::string, Rational> const& constants) {
    switch (expr->kind) {
    case PrismExpression::Kind::Literal:
    case PrismExpression::Kind::BoolLiteral:
        return expr;
    case PrismExpression::Kind::Identifier: {
        auto it = constants.find(expr->name);
        if (it != constants.end()) {
            return makeLiteral(it->second, *expr);
        }
        return expr;
    }
    case PrismExpression::Kind::Unary: {
        PrismExprPtr inner = substituteAndFold(expr->lhs, constants);
        if (expr->op == PrismExpression::Op::Negate && inner->kind == PrismExpression::Kind::Literal) {
            return makeLiteral(-inner->literal, *expr);
        }
        if (expr->op == PrismExpression::Op::Not && inner->kind == PrismExpression::Kind::BoolLiteral) {
            return makeBoolLiteral(!inner->boolValue, *expr);
        }
        auto node = std::make_shared<PrismExpression>(*expr);
        node->lhs = inner;
        return node;
    }
    case PrismExpression::Kind::Binary: {
        PrismExprPtr lhs = substituteAndFold(expr->lhs, constants);
        PrismExprPtr rhs = substituteAndFold(expr->rhs, constants);
        bool bothLiteral =
            lhs->kind == PrismExpression::Kind::Literal && rhs->kind == PrismExpression::Kind::Literal;
        if (isArithmetic(expr->op) && bothLiteral) {
            Rational value;
            switch (expr->op) {
            case PrismExpression::Op::Plus:
                value = lhs->literal + rhs->literal;
                break;
            case PrismExpression::Op::Minus:
                value = lhs->literal - rhs->literal;
                break;
            case PrismExpression::Op::Times:
                value = lhs->literal * rhs->literal;
                break;
            case PrismExpression::Op::Divide:
                if (rhs->literal == 0) {
                    throw ParseError("prism: division by zero at " + location(*expr));
                }
                value = lhs->literal / rhs->literal;
                break;
            default:
                break;
            }
            return makeLiteral(value, *expr);
        }
        if (expr->op == PrismExpression::Op::Divide) {
            throw UnsupportedError("prism: division is only allowed between constants, at " + location(*expr));
        }
        if (isComparison(expr->op) && bothLiteral) {
            return makeBoolLiteral(compareRationals(expr->op, lhs->literal, rhs->literal), *expr);
        }
        bool bothBool =
            lhs->kind == PrismExpression::Kind::BoolLiteral && rhs->kind == PrismExpression::Kind::BoolLiteral;
        if ((expr->op == PrismExpression::Op::And || expr->op == PrismExpression::Op::Or) && bothBool) {
            bool value = expr->op == PrismExpression::Op::And ? (lhs->boolValue && rhs->boolValue)
                                                              : (lhs->boolValue || rhs->boolValue);
            return makeBoolLiteral(value, *expr);
        }
        auto node = std::make_shared<PrismExpression>(*expr);
        node->lhs = lhs;
        node->rhs = rhs;
        return node;
    }
    }
    return expr;
}

/// Evaluates a constant-defining expression; only literals and other
/// constants may occur.
class ConstantResolver {
  public:
    ConstantResolver(PrismProgram const& program, std::map<std::string, Rational> const& bindings)
        : program_(program), bindings_(bindings) {}

    std::map<std::string, Rational> resolveAll() {
        for (auto const& [name, value] : bindings_) {
            (void)value;
            bool known = false;
            for (auto const& constant : program_.constants) {
                if (constant.name == name) {
                    known = true;
                    if (constant.definition) {
                        throw ModelError("constant " + name + " is defined in the program; binding it is a conflict");
                    }
                }
            }
            if (!known) {
                throw ModelError("binding for unknown constant " + name);
            }
        }
        for (auto const& constant : program_.constants) {
            resolve(constant.name);
        }
        return values_;
    }

  private:
    Rational resolve(std::string const& name) {
        auto done = values_.find(name);
        if (done != values_.end()) {
            return done->second;
        }
        if (!inProgress_.insert(name).second) {
            throw ParseError("prism: cyclic constant definition involving " + name);
        }
        PrismConstant const* constant = nullptr;
        for (auto const& candidate : program_.constants) {
            if (candidate.name == name) {
                constant = &candidate;
                break;
            }
        }
        if (!constant) {
            throw ParseError("prism: unknown constant " + name);
        }
        Rational value;
        if (constant->definition) {
            value = evaluate(*constant->definition);
        } else {
            auto binding = bindings_.find(name);
            if (binding == bindings_.end()) {
                throw ModelError("missing constant: " + name);
            }
            value = binding->second;
        }
        if (constant->type == PrismConstantType::Int && denominator(value) != 1) {
            throw ModelError("constant " + name + " is declared int but has value " + rationalToString(value));
        }
        inProgress_.erase(name);
        values_.emplace(name, value);
        return value;
    }

    Rational evaluate(PrismExpression const& expr) {
        switch (expr.kind) {
        case PrismExpression::Kind::Literal:
            return expr.literal;
        case PrismExpression::Kind::BoolLiteral:
            throw ParseError("prism: boolean value in numeric constant at " + location(expr));
        case PrismExpression::Kind::Identifier:
            return resolve(expr.name);
        case PrismExpression::Kind::Unary:
            if (expr.op == PrismExpression::Op::Negate) {
                return -evaluate(*expr.lhs);
            }
            throw ParseError("prism: boolean operator in constant definition at " + location(expr));
        case PrismExpression::Kind::Binary: {
            if (!isArithmetic(expr.op)) {
                throw ParseError("prism: non-arithmetic operator in constant definition at " + location(expr));
            }
            Rational lhs = evaluate(*expr.lhs);
            Rational rhs = evaluate(*expr.rhs);
            switch (expr.op) {
            case PrismExpression::Op::Plus:
                return lhs + rhs;
            case PrismExpression::Op::Minus:
                return lhs - rhs;
            case PrismExpression::Op::Times:
                return lhs * rhs;
            case PrismExpression::Op::Divide:
                if (rhs == 0) {
                    throw ParseError("prism: division by zero at " + location(expr));
                }
                return lhs / rhs;
            default:
                return Rational(0);
            }
        }
        }
        return Rational(0);
    }

    PrismProgram const& program_;
    std::map<std::string, Rational> const& bindings_;
    std::map<std::string, Rational> values_;
    std::set<std::string> inProgress_;
};

/// Compiled, formula-expanded, statically typed expression over variable
/// indices; evaluation uses exact rationals.
struct CompiledExpr {
    enum class Kind { Num, Bool, Var, Not, Negate, Binary };
    Kind kind = Kind::Num;
    Rational constant;
    bool boolConstant = false;
    std::size_t variable = 0;
    PrismExpression::Op op = PrismExpression::Op::Plus;
    std::unique_ptr<CompiledExpr> lhs;
    std::unique_ptr<CompiledExpr> rhs;
    bool isBool = false;
};

class ExpressionCompiler {
  public:
    ExpressionCompiler(std::map<std::string, std::size_t> const& variableIndex,
                       std::map<std::string, PrismExprPtr> const& formulas)
        : variableIndex_(variableIndex), formulas_(formulas) {}

    std::unique_ptr<CompiledExpr> compile(PrismExpression const& expr) {
        auto result = std::make_unique<CompiledExpr>();
        switch (expr.kind) {
        case PrismExpression::Kind::Literal:
            result->kind = CompiledExpr::Kind::Num;
            result->constant = expr.literal;
            result->isBool = false;
            return result;
        case PrismExpression::Kind::BoolLiteral:
            result->kind = CompiledExpr::Kind::Bool;
            result->boolConstant = expr.boolValue;
            result->isBool = true;
            return result;
        case PrismExpression::Kind::Identifier: {
            auto variable = variableIndex_.find(expr.name);
            if (variable != variableIndex_.end()) {
                result->kind = CompiledExpr::Kind::Var;
                result->variable = variable->second;
                result->isBool = false;
                return result;
            }
            auto formula = formulas_.find(expr.name);
            if (formula != formulas_.end()) {
                if (!expanding_.insert(expr.name).second) {
                    throw ParseError("prism: cyclic formula " + expr.name);
                }
                auto compiled = compile(*formula->second);
                expanding_.erase(expr.name);
                return compiled;
            }
            throw ParseError("prism: undeclared identifier '" + expr.name + "' at " + location(expr));
        }
        case PrismExpression::Kind::Unary: {
            auto inner = compile(*expr.lhs);
            if (expr.op == PrismExpression::Op::Not) {
                requireBool(*inner, expr);
                result->kind = CompiledExpr::Kind::Not;
                result->isBool = true;
            } else {
                requireNum(*inner, expr);
                result->kind = CompiledExpr::Kind::Negate;
                result->isBool = false;
            }
            result->lhs = std::move(inner);
            return result;
        }
        case PrismExpression::Kind::Binary: {
            auto lhs = compile(*expr.lhs);
            auto rhs = compile(*expr.rhs);
            result->kind = CompiledExpr::Kind::Binary;
            result->op = expr.op;
            if (isArithmetic(expr.op)) {
                requireNum(*lhs, expr);
                requireNum(*rhs, expr);
                result->isBool = false;
            } else if (isComparison(expr.op)) {
                requireNum(*lhs, expr);
                requireNum(*rhs, expr);
                result->isBool = true;
            } else {
                requireBool(*lhs, expr);
                requireBool(*rhs, expr);
                result->isBool = true;
            }
            result->lhs = std::move(lhs);
            result->rhs = std::move(rhs);
            return result;
        }
        }
        return result;
    }

  private:
    void requireBool(CompiledExpr const& expr, PrismExpression const& at) {
        if (!expr.isBool) {
            throw ParseError("prism: expected a boolean operand at " + location(at));
        }
    }
    void requireNum(CompiledExpr const& expr, PrismExpression const& at) {
        if (expr.isBool) {
            throw ParseError("prism: expected a numeric operand at " + location(at));
        }
    }

    std::map<std::string, std::size_t> const& variableIndex_;
    std::map<std::string, PrismExprPtr> const& formulas_;
    std::set<std::string> expanding_;
};

Rational evalNum(CompiledExpr const& expr, std::vector<int64_t> const& state);

bool evalBool(CompiledExpr const& expr, std::vector<int64_t> const& state) {
    switch (expr.kind) {
    case CompiledExpr::Kind::Bool:
        return expr.boolConstant;
    case CompiledExpr::Kind::Not:
        return !evalBool(*expr.lhs, state);
    case CompiledExpr::Kind::Binary:
        if (expr.op == PrismExpression::Op::And) {
            return evalBool(*expr.lhs, state) && evalBool(*expr.rhs, state);
        }
        if (expr.op == PrismExpression::Op::Or) {
            return evalBool(*expr.lhs, state) || evalBool(*expr.rhs, state);
        }
        return compareRationals(expr.op, evalNum(*expr.lhs, state), evalNum(*expr.rhs, state));
    default:
        throw Error("internal error: numeric expression evaluated as boolean");
    }
}

Rational evalNum(CompiledExpr const& expr, std::vector<int64_t> const& state) {
    switch (expr.kind) {
    case CompiledExpr::Kind::Num:
        return expr.constant;
    case CompiledExpr::Kind::Var:
        return Rational(state[expr.variable]);
    case CompiledExpr::Kind::Negate:
        return -evalNum(*expr.lhs, state);
    case CompiledExpr::Kind::Binary:
        switch (expr.op) {
        case PrismExpression::Op::Plus:
            return evalNum(*expr.lhs, state) + evalNum(*expr.rhs, state);
        case PrismExpression::Op::Minus:
            return evalNum(*expr.lhs, state) - evalNum(*expr.rhs, state);
        case PrismExpression::Op::Times:
            return evalNum(*expr.lhs, state) * evalNum(*expr.rhs, state);
        default:
            throw Error("internal error: boolean expression evaluated as number");
        }
    default:
        throw Error("internal error: boolean expression evaluated as number");
    }
}

struct CompiledCommand {
    std::string action;
    std::size_t moduleIndex = 0;
    std::unique_ptr<CompiledExpr> guard;
    std::vector<std::pair<std::unique_ptr<CompiledExpr>, std::vector<std::pair<std::size_t, std::unique_ptr<CompiledExpr>>>>>
        branches; // (probability, assignments by variable index)
    std::size_t line = 0;
};

} // namespace

PrismProgram instantiateConstants(PrismProgram const& program, std::map<std::string, Rational> const& bindings) {
    ConstantResolver resolver(program, bindings);
    std::map<std::string, Rational> values = resolver.resolveAll();

    PrismProgram result;
    for (auto const& constant : program.constants) {
        PrismConstant folded = constant;
        PrismExpression like;
        folded.definition = makeLiteral(values.at(constant.name), like);
        result.constants.push_back(std::move(folded));
    }
    auto rewrite = [&](PrismExprPtr const& expr) { return substituteAndFold(expr, values); };
    for (auto const& formula : program.formulas) {
        result.formulas.push_back({formula.name, rewrite(formula.definition)});
    }
    for (auto const& module : program.modules) {
        PrismModule rewritten;
        rewritten.name = module.name;
        for (auto const& variable : module.variables) {
            rewritten.variables.push_back(
                {variable.name, rewrite(variable.lowerBound), rewrite(variable.upperBound), rewrite(variable.init)});
        }
        for (auto const& command : module.commands) {
            PrismCommand rewrittenCommand;
            rewrittenCommand.action = command.action;
            rewrittenCommand.line = command.line;
            rewrittenCommand.guard = rewrite(command.guard);
            for (auto const& branch : command.branches) {
                PrismBranch rewrittenBranch;
                rewrittenBranch.probability = rewrite(branch.probability);
                for (auto const& assignment : branch.assignments) {
                    rewrittenBranch.assignments.push_back({assignment.variable, rewrite(assignment.value)});
                }
                rewrittenCommand.branches.push_back(std::move(rewrittenBranch));
            }
            rewritten.commands.push_back(std::move(rewrittenCommand));
        }
        result.modules.push_back(std::move(rewritten));
    }
    for (auto const& label : program.labels) {
        result.labels.push_back({label.name, rewrite(label.expression)});
    }
    for (auto const& rewards : program.rewardStructures) {
        PrismRewards rewritten;
        rewritten.name = rewards.name;
        for (auto const& item : rewards.items) {
            rewritten.items.push_back({rewrite(item.guard), rewrite(item.value)});
        }
        result.rewardStructures.push_back(std::move(rewritten));
    }
    return result;
}

ExplicitModel buildFromPrism(PrismProgram const& program, PrismBuildOptions const& options) {
    for (auto const& constant : program.constants) {
        if (!constant.definition) {
            throw ModelError("constant " + constant.name + " is not instantiated");
        }
    }

    // variable table in module order
    std::map<std::string, std::size_t> variableIndex;
    std::vector<std::string> variableNames;
    std::vector<int64_t> lower, upper, init;
    std::map<std::string, PrismExprPtr> formulaMap;
    for (auto const& formula : program.formulas) {
        formulaMap.emplace(formula.name, formula.definition);
    }
    // constants may still appear as identifiers when the caller skipped
    // instantiateConstants; treat their folded definitions as formulas
    for (auto const& constant : program.constants) {
        formulaMap.emplace(constant.name, constant.definition);
    }

    auto constValueOf = [&](PrismExprPtr const& expr, std::string const& what) -> Rational {
        PrismExprPtr folded = substituteAndFold(expr, {});
        if (folded->kind == PrismExpression::Kind::Identifier) {
            auto it = formulaMap.find(folded->name);
            if (it != formulaMap.end()) {
                folded = substituteAndFold(it->second, {});
            }
        }
        if (folded->kind != PrismExpression::Kind::Literal) {
            throw ParseError("prism: " + what + " must be constant, at " + location(*expr));
        }
        return folded->literal;
    };

    for (auto const& module : program.modules) {
        for (auto const& variable : module.variables) {
            variableIndex.emplace(variable.name, variableNames.size());
            variableNames.push_back(variable.name);
            Rational lo = constValueOf(variable.lowerBound, "variable lower bound");
            Rational hi = constValueOf(variable.upperBound, "variable upper bound");
            Rational in = constValueOf(variable.init, "variable initializer");
            if (denominator(lo) != 1 || denominator(hi) != 1 || denominator(in) != 1) {
                throw ParseError("prism: variable " + variable.name + " has non-integer range or initializer");
            }
            lower.push_back(lo.convert_to<int64_t>());
            upper.push_back(hi.convert_to<int64_t>());
            init.push_back(in.convert_to<int64_t>());
            if (lower.back() > upper.back() || init.back() < lower.back() || init.back() > upper.back()) {
                throw ModelError("prism: variable " + variable.name + " has an empty range or out-of-range init");
            }
        }
    }

    ExpressionCompiler compiler(variableIndex, formulaMap);

    // compile commands; record each module's alphabet and the global action
    // order (first syntactic occurrence)
    std::vector<std::vector<CompiledCommand>> moduleCommands(program.modules.size());
    std::vector<std::set<std::string>> alphabet(program.modules.size());
    std::vector<std::string> actionOrder;
    std::map<std::string, std::size_t> firstModuleOf;
    for (std::size_t m = 0; m < program.modules.size(); ++m) {
        for (auto const& command : program.modules[m].commands) {
            CompiledCommand compiled;
            compiled.action = command.action;
            compiled.moduleIndex = m;
            compiled.line = command.line;
            compiled.guard = compiler.compile(*command.guard);
            if (compiled.guard->isBool == false) {
                throw ParseError("prism: guard must be boolean at line " + std::to_string(command.line));
            }
            for (auto const& branch : command.branches) {
                auto probability = compiler.compile(*branch.probability);
                if (probability->isBool) {
                    throw ParseError("prism: probability must be numeric at line " + std::to_string(command.line));
                }
                std::vector<std::pair<std::size_t, std::unique_ptr<CompiledExpr>>> assignments;
                for (auto const& assignment : branch.assignments) {
                    auto variable = variableIndex.find(assignment.variable);
                    if (variable == variableIndex.end()) {
                        throw ParseError("prism: assignment to undeclared variable '" + assignment.variable +
                                         "' at line " + std::to_string(command.line));
                    }
                    auto value = compiler.compile(*assignment.value);
                    if (value->isBool) {
                        throw ParseError("prism: assigned value must be numeric at line " +
                                         std::to_string(command.line));
                    }
                    assignments.emplace_back(variable->second, std::move(value));
                }
                compiled.branches.emplace_back(std::move(probability), std::move(assignments));
            }
            if (!command.action.empty()) {
                alphabet[m].insert(command.action);
                if (!firstModuleOf.count(command.action)) {
                    firstModuleOf.emplace(command.action, m);
                    actionOrder.push_back(command.action);
                }
            }
            moduleCommands[m].push_back(std::move(compiled));
        }
    }

    std::vector<std::pair<std::string, std::unique_ptr<CompiledExpr>>> labelExprs;
    for (auto const& label : program.labels) {
        auto compiled = compiler.compile(*label.expression);
        if (!compiled->isBool) {
            throw ParseError("prism: label \"" + label.name + "\" must be boolean");
        }
        labelExprs.emplace_back(label.name, std::move(compiled));
    }
    std::vector<std::pair<std::string, std::vector<std::pair<std::unique_ptr<CompiledExpr>, std::unique_ptr<CompiledExpr>>>>>
        rewardExprs;
    for (auto const& rewards : program.rewardStructures) {
        std::vector<std::pair<std::unique_ptr<CompiledExpr>, std::unique_ptr<CompiledExpr>>> items;
        for (auto const& item : rewards.items) {
            auto guard = compiler.compile(*item.guard);
            auto value = compiler.compile(*item.value);
            if (!guard->isBool || value->isBool) {
                throw ParseError("prism: reward items need a boolean guard and numeric value (structure \"" +
                                 rewards.name + "\")");
            }
            items.emplace_back(std::move(guard), std::move(value));
        }
        rewardExprs.emplace_back(rewards.name, std::move(items));
    }

    // breadth-first reachability from the declared initial valuation
    struct VectorHash {
        std::size_t operator()(std::vector<int64_t> const& v) const {
            std::size_t h = 0xcbf29ce484222325ull;
            for (int64_t x : v) {
                h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ull;
            }
            return h;
        }
    };

    std::vector<std::vector<int64_t>> states;
    std::unordered_map<std::vector<int64_t>, uint32_t, VectorHash> indexOf;
    auto discover = [&](std::vector<int64_t> const& valuation) -> uint32_t {
        auto it = indexOf.find(valuation);
        if (it != indexOf.end()) {
            return it->second;
        }
        uint32_t index = static_cast<uint32_t>(states.size());
        states.push_back(valuation);
        indexOf.emplace(valuation, index);
        return index;
    };
    discover(init);

    auto describeState = [&](std::vector<int64_t> const& state) {
        std::string text;
        for (std::size_t v = 0; v < variableNames.size(); ++v) {
            if (v > 0) {
                text += " & ";
            }
            text += variableNames[v] + "=" + std::to_string(state[v]);
        }
        return text;
    };

    Rational const sumTolerance(1, BigInt(10000000000ll));

    ExplicitModel model;
    model.kind = ModelKind::Mdp;
    std::vector<std::string> choiceLabels;

    // one successor distribution of one joint command combination
    auto expandCombination = [&](std::vector<int64_t> const& state,
                                 std::vector<CompiledCommand const*> const& parts) {
        std::map<std::vector<int64_t>, Rational> distribution;
        Rational total(0);
        // iterate the cartesian product of the parts' branch lists
        std::vector<std::size_t> branchCursor(parts.size(), 0);
        while (true) {
            Rational probability(1);
            std::vector<int64_t> successor = state;
            for (std::size_t p = 0; p < parts.size(); ++p) {
                auto const& branch = parts[p]->branches[branchCursor[p]];
                probability *= evalNum(*branch.first, state);
                for (auto const& [variable, value] : branch.second) {
                    Rational assigned = evalNum(*value, state);
                    if (denominator(assigned) != 1) {
                        throw ModelError("prism: non-integer assignment to " + variableNames[variable] +
                                         " in state " + describeState(state));
                    }
                    int64_t v = assigned.convert_to<int64_t>();
                    if (v < lower[variable] || v > upper[variable]) {
                        throw ModelError("prism: update moves " + variableNames[variable] + " out of range in state " +
                                         describeState(state) + " (line " + std::to_string(parts[p]->line) + ")");
                    }
                    successor[variable] = v;
                }
            }
            if (probability < 0) {
                throw ModelError("prism: negative branch probability in state " + describeState(state));
            }
            total += probability;
            if (probability > 0) {
                distribution[successor] += probability;
            }
            std::size_t p = parts.size();
            bool carry = true;
            while (p-- > 0 && carry) {
                if (++branchCursor[p] < parts[p]->branches.size()) {
                    carry = false;
                } else {
                    branchCursor[p] = 0;
                }
            }
            if (carry) {
                break;
            }
        }
        Rational deviation = total - 1;
        if (deviation < 0) {
            deviation = -deviation;
        }
        if (deviation > sumTolerance) {
            throw ModelError("prism: probabilities sum to " + rationalToString(total) + " in state " +
                             describeState(state) + " (line " + std::to_string(parts.front()->line) + ")");
        }
        return distribution;
    };

    for (std::size_t current = 0; current < states.size(); ++current) {
        std::vector<int64_t> state = states[current];
        model.matrix.newRowGroup();
        // distributions already emitted for this state, per action
        std::set<std::pair<std::string, std::vector<std::pair<uint32_t, std::string>>>> emitted;

        auto emitChoice = [&](std::string const& action, std::map<std::vector<int64_t>, Rational> const& distribution) {
            std::map<uint32_t, Rational> byIndex;
            for (auto const& [successor, probability] : distribution) {
                byIndex[discover(successor)] += probability;
            }
            std::vector<std::pair<uint32_t, std::string>> key;
            for (auto const& [column, probability] : byIndex) {
                key.emplace_back(column, rationalToString(probability));
            }
            if (!emitted.emplace(action, key).second) {
                return; // duplicate distribution under the same action
            }
            model.matrix.newRow();
            choiceLabels.push_back(action);
            for (auto const& [column, probability] : byIndex) {
                model.matrix.pushEntry(MatrixEntry::point(column, toDouble(probability)));
            }
        };

        for (std::size_t m = 0; m < moduleCommands.size(); ++m) {
            for (auto const& command : moduleCommands[m]) {
                if (!evalBool(*command.guard, state)) {
                    continue;
                }
                if (command.action.empty()) {
                    emitChoice("", expandCombination(state, {&command}));
                    continue;
                }
                if (firstModuleOf.at(command.action) != m) {
                    continue; // synchronized actions are driven by their first module
                }
                // gather enabled commands of every other participating module
                std::vector<std::vector<CompiledCommand const*>> partners;
                partners.push_back({&command});
                bool possible = true;
                for (std::size_t other = 0; other < moduleCommands.size() && possible; ++other) {
                    if (other == m || !alphabet[other].count(command.action)) {
                        continue;
                    }
                    std::vector<CompiledCommand const*> enabled;
                    for (auto const& candidate : moduleCommands[other]) {
                        if (candidate.action == command.action && evalBool(*candidate.guard, state)) {
                            enabled.push_back(&candidate);
                        }
                    }
                    if (enabled.empty()) {
                        possible = false; // unsatisfiable synchronization
                    } else {
                        partners.push_back(std::move(enabled));
                    }
                }
                if (!possible) {
                    continue;
                }
                // cartesian product over the participating modules
                std::vector<std::size_t> cursor(partners.size(), 0);
                while (true) {
                    std::vector<CompiledCommand const*> parts;
                    for (std::size_t p = 0; p < partners.size(); ++p) {
                        parts.push_back(partners[p][cursor[p]]);
                    }
                    emitChoice(command.action, expandCombination(state, parts));
                    std::size_t p = partners.size();
                    bool carry = true;
                    while (p-- > 0 && carry) {
                        if (++cursor[p] < partners[p].size()) {
                            carry = false;
                        } else {
                            cursor[p] = 0;
                        }
                    }
                    if (carry) {
                        break;
                    }
                }
            }
        }
        if (model.matrix.rowGroupSize(current) == 0) {
            throw ModelError("prism: deadlock in state " + describeState(state));
        }
    }

    std::size_t numStates = states.size();
    model.initialStates = BitVector(numStates);
    model.initialStates.set(0);
    if (options.buildChoiceLabels) {
        model.choiceLabels = std::move(choiceLabels);
    }

    for (auto const& [name, expr] : labelExprs) {
        BitVector bits(numStates);
        for (std::size_t s = 0; s < numStates; ++s) {
            if (evalBool(*expr, states[s])) {
                bits.set(s);
            }
        }
        model.labels.emplace(name, std::move(bits));
    }
    BitVector initLabel(numStates);
    initLabel.set(0);
    model.labels.emplace("init", std::move(initLabel));

    for (auto const& [name, items] : rewardExprs) {
        RewardStructure structure;
        structure.stateRewards = std::vector<double>(numStates, 0.0);
        for (std::size_t s = 0; s < numStates; ++s) {
            Rational sum(0);
            for (auto const& [guard, value] : items) {
                if (evalBool(*guard, states[s])) {
                    Rational v = evalNum(*value, states[s]);
                    if (v < 0) {
                        throw ModelError("prism: negative reward in structure \"" + name + "\" at state " +
                                         describeState(states[s]));
                    }
                    sum += v;
                }
            }
            (*structure.stateRewards)[s] = toDouble(sum);
        }
        model.rewards.emplace(name, std::move(structure));
    }

    if (options.buildStateValuations) {
        std::vector<StateValuation> valuations;
        valuations.reserve(numStates);
        for (auto const& state : states) {
            StateValuation valuation;
            for (std::size_t v = 0; v < variableNames.size(); ++v) {
                valuation.emplace(variableNames[v], state[v]);
            }
            valuations.push_back(std::move(valuation));
        }
        model.stateValuations = std::move(valuations);
    }

    return model;
}

} // namespace stormlet
