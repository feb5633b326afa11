#include "stormlet/properties.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

#include "stormlet/exceptions.hpp"
#include "stormlet/model_json.hpp"

namespace stormlet {

namespace {

enum class TokenKind { Identifier, String, Number, Punct, End };

struct Token {
    TokenKind kind;
    std::string text;
    std::size_t position;
};

std::vector<Token> lexProperty(std::string const& text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    auto fail = [&](std::string const& message) {
        throw ParseError("property: " + message + " at position " + std::to_string(i));
    };
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
                ++i;
            }
            tokens.push_back({TokenKind::Identifier, text.substr(start, i - start), start});
        } else if (c == '"') {
            ++i;
            while (i < text.size() && text[i] != '"') {
                ++i;
            }
            if (i >= text.size()) {
                fail("unterminated string");
            }
            tokens.push_back({TokenKind::String, text.substr(start + 1, i - start - 1), start});
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            while (i < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' || text[i] == 'e' ||
                    text[i] == 'E' || ((text[i] == '+' || text[i] == '-') && (text[i - 1] == 'e' || text[i - 1] == 'E')))) {
                ++i;
            }
            tokens.push_back({TokenKind::Number, text.substr(start, i - start), start});
        } else if (c == '|' && i + 1 < text.size() && text[i + 1] == '|') {
            tokens.push_back({TokenKind::Punct, "||", start});
            i += 2;
        } else if ((c == '<' || c == '>') && i + 1 < text.size() && text[i + 1] == '=') {
            tokens.push_back({TokenKind::Punct, text.substr(start, 2), start});
            i += 2;
        } else if (std::string("[]{}()=?!&|<>,").find(c) != std::string::npos) {
            tokens.push_back({TokenKind::Punct, std::string(1, c), start});
            ++i;
        } else {
            fail(std::string("unexpected character '") + c + "'");
        }
    }
    tokens.push_back({TokenKind::End, "", text.size()});
    return tokens;
}

void rejectUnsupported(std::vector<Token> const& tokens) {
    for (auto const& token : tokens) {
        if (token.kind == TokenKind::Punct && token.text == "||") {
            throw UnsupportedError("unsupported: conditional (\"||\")");
        }
        if (token.kind == TokenKind::Identifier) {
            if (token.text == "multi") {
                throw UnsupportedError("unsupported: multi-objective query (\"multi\")");
            }
            if (token.text == "U") {
                throw UnsupportedError("unsupported: until operator (\"U\")");
            }
            if (token.text == "G") {
                throw UnsupportedError("unsupported: globally operator (\"G\")");
            }
            if (token.text == "X") {
                throw UnsupportedError("unsupported: next operator (\"X\")");
            }
        }
    }
}

class PropertyParser {
  public:
    explicit PropertyParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    PropertyAst parse() {
        PropertyAst ast;
        Token const& first = peek();
        if (first.kind == TokenKind::Identifier && !first.text.empty() &&
            (first.text[0] == 'P' || first.text[0] == 'R') && looksLikeOperator(first.text)) {
            ast = parseOperatorQuery();
        } else {
            ast.op = PropertyOperator::LabelQuery;
            ast.goal = parseOr();
        }
        expectEnd();
        return ast;
    }

  private:
    static bool looksLikeOperator(std::string const& text) {
        return text == "P" || text == "Pmax" || text == "Pmin" || text == "R" || text == "Rmax" || text == "Rmin";
    }

    Token const& peek() const { return tokens_[index_]; }

    Token const& advance() { return tokens_[index_++]; }

    bool accept(std::string const& punct) {
        if (peek().kind == TokenKind::Punct && peek().text == punct) {
            ++index_;
            return true;
        }
        return false;
    }

    void expect(std::string const& punct, std::string const& context) {
        if (!accept(punct)) {
            fail("expected '" + punct + "' " + context);
        }
    }

    void expectEnd() {
        if (peek().kind != TokenKind::End) {
            fail("trailing input");
        }
    }

    [[noreturn]] void fail(std::string const& message) const {
        throw ParseError("property: " + message + " at position " + std::to_string(peek().position));
    }

    PropertyAst parseOperatorQuery() {
        PropertyAst ast;
        std::string head = advance().text;
        ast.op = head[0] == 'P' ? PropertyOperator::Probability : PropertyOperator::Reward;
        if (head.size() > 1) {
            ast.direction = head.substr(1) == "max" ? OptDirection::Max : OptDirection::Min;
        }
        if (ast.op == PropertyOperator::Reward) {
            expect("{", "before reward structure name");
            if (peek().kind != TokenKind::String) {
                fail("expected quoted reward structure name");
            }
            ast.rewardName = advance().text;
            expect("}", "after reward structure name");
            if (ast.direction == OptDirection::None && peek().kind == TokenKind::Identifier &&
                (peek().text == "max" || peek().text == "min")) {
                ast.direction = advance().text == "max" ? OptDirection::Max : OptDirection::Min;
            }
        }
        if (accept("=")) {
            expect("?", "after '='");
        } else if (peek().kind == TokenKind::Punct &&
                   (peek().text == ">=" || peek().text == "<=" || peek().text == ">" || peek().text == "<")) {
            if (ast.op == PropertyOperator::Reward) {
                throw UnsupportedError("unsupported: threshold bound on reward operator");
            }
            std::string relation = advance().text;
            if (peek().kind != TokenKind::Number) {
                fail("expected threshold after relation");
            }
            double threshold = std::stod(advance().text);
            if (threshold < 0.0 || threshold > 1.0) {
                fail("probability threshold must lie in [0,1]");
            }
            BoundRelation rel = relation == ">=" ? BoundRelation::Geq
                                : relation == "<=" ? BoundRelation::Leq
                                : relation == ">" ? BoundRelation::Gt
                                                  : BoundRelation::Lt;
            ast.bound = {rel, threshold};
        } else {
            fail("expected '=?' or a threshold bound");
        }

        expect("[", "before path formula");
        if (peek().kind != TokenKind::Identifier || peek().text != "F") {
            fail("expected 'F'");
        }
        advance();
        if (accept("{")) {
            if (ast.op != PropertyOperator::Probability) {
                throw UnsupportedError("unsupported: reward bound inside a reward query");
            }
            if (peek().kind != TokenKind::String) {
                fail("expected quoted reward structure name in F{...}");
            }
            ast.pathBound = {advance().text, 0};
            expect("}", "after reward structure name");
            if (!(peek().kind == TokenKind::Punct && peek().text == "<=")) {
                throw UnsupportedError("unsupported: reward bound relation (only <= is available)");
            }
            advance();
            if (peek().kind != TokenKind::Number) {
                fail("expected integer bound");
            }
            std::string bound = advance().text;
            if (bound.find('.') != std::string::npos || bound.find('e') != std::string::npos) {
                fail("reward bound must be an integer");
            }
            ast.pathBound->second = std::stoll(bound);
            if (ast.pathBound->second < 0) {
                fail("reward bound must be non-negative");
            }
        }
        ast.goal = parseOr();
        expect("]", "after path formula");
        return ast;
    }

    StateFormulaPtr parseOr() {
        StateFormulaPtr lhs = parseAnd();
        while (accept("|")) {
            auto node = std::make_shared<StateFormula>();
            node->kind = StateFormula::Kind::Or;
            node->lhs = lhs;
            node->rhs = parseAnd();
            lhs = node;
        }
        return lhs;
    }

    StateFormulaPtr parseAnd() {
        StateFormulaPtr lhs = parseUnary();
        while (accept("&")) {
            auto node = std::make_shared<StateFormula>();
            node->kind = StateFormula::Kind::And;
            node->lhs = lhs;
            node->rhs = parseUnary();
            lhs = node;
        }
        return lhs;
    }

    StateFormulaPtr parseUnary() {
        if (accept("!")) {
            auto node = std::make_shared<StateFormula>();
            node->kind = StateFormula::Kind::Not;
            node->lhs = parseUnary();
            return node;
        }
        if (accept("(")) {
            StateFormulaPtr inner = parseOr();
            expect(")", "after parenthesized formula");
            return inner;
        }
        if (peek().kind == TokenKind::String) {
            auto node = std::make_shared<StateFormula>();
            node->kind = StateFormula::Kind::Label;
            node->label = advance().text;
            return node;
        }
        if (peek().kind == TokenKind::Identifier && peek().text == "true") {
            advance();
            auto node = std::make_shared<StateFormula>();
            node->kind = StateFormula::Kind::True;
            return node;
        }
        fail("expected a state formula");
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
};

std::string printStateFormula(StateFormula const& formula) {
    switch (formula.kind) {
    case StateFormula::Kind::True:
        return "true";
    case StateFormula::Kind::Label:
        return "\"" + formula.label + "\"";
    case StateFormula::Kind::Not:
        return "!" + printStateFormula(*formula.lhs);
    case StateFormula::Kind::And:
        return "(" + printStateFormula(*formula.lhs) + " & " + printStateFormula(*formula.rhs) + ")";
    case StateFormula::Kind::Or:
        return "(" + printStateFormula(*formula.lhs) + " | " + printStateFormula(*formula.rhs) + ")";
    }
    return "true";
}

} // namespace

PropertyAst parseProperty(std::string const& text) {
    auto tokens = lexProperty(text);
    rejectUnsupported(tokens);
    return PropertyParser(std::move(tokens)).parse();
}

std::string printProperty(PropertyAst const& ast) {
    if (ast.op == PropertyOperator::LabelQuery) {
        return printStateFormula(*ast.goal);
    }
    std::ostringstream out;
    if (ast.op == PropertyOperator::Probability) {
        out << "P";
    } else {
        out << "R{\"" << ast.rewardName << "\"}";
    }
    if (ast.direction == OptDirection::Max) {
        out << "max";
    } else if (ast.direction == OptDirection::Min) {
        out << "min";
    }
    if (ast.bound) {
        switch (ast.bound->first) {
        case BoundRelation::Geq:
            out << ">=";
            break;
        case BoundRelation::Leq:
            out << "<=";
            break;
        case BoundRelation::Gt:
            out << ">";
            break;
        case BoundRelation::Lt:
            out << "<";
            break;
        }
        out << formatDouble(ast.bound->second, 16);
    } else {
        out << "=?";
    }
    out << " [F ";
    if (ast.pathBound) {
        out << "{\"" << ast.pathBound->first << "\"}<=" << ast.pathBound->second << " ";
    }
    out << printStateFormula(*ast.goal) << "]";
    return out.str();
}

BitVector evaluateStateFormula(ExplicitModel const& model, StateFormula const& formula) {
    switch (formula.kind) {
    case StateFormula::Kind::True:
        return BitVector(model.numStates(), true);
    case StateFormula::Kind::Label: {
        auto it = model.labels.find(formula.label);
        if (it == model.labels.end()) {
            throw ModelError("unknown label: " + formula.label);
        }
        return it->second;
    }
    case StateFormula::Kind::Not:
        return ~evaluateStateFormula(model, *formula.lhs);
    case StateFormula::Kind::And:
        return evaluateStateFormula(model, *formula.lhs) & evaluateStateFormula(model, *formula.rhs);
    case StateFormula::Kind::Or:
        return evaluateStateFormula(model, *formula.lhs) | evaluateStateFormula(model, *formula.rhs);
    }
    return BitVector(model.numStates());
}

PropertyCheckOutcome evaluateProperty(ExplicitModel const& model, PropertyAst const& ast, Environment const& env,
                                      bool extractScheduler) {
    if (model.kind == ModelKind::Imdp) {
        throw UnsupportedError("unsupported: plain check on an interval mdp (use the interval checker)");
    }
    if (model.kind == ModelKind::Pomdp) {
        throw UnsupportedError("unsupported: plain check on a pomdp (use the belief checker)");
    }

    PropertyCheckOutcome outcome;
    if (ast.op == PropertyOperator::LabelQuery) {
        BitVector truth = evaluateStateFormula(model, *ast.goal);
        outcome.result.values.assign(model.numStates(), 0.0);
        for (std::size_t s = 0; s < model.numStates(); ++s) {
            if (truth.get(s)) {
                outcome.result.values[s] = 1.0;
            }
        }
        return outcome;
    }

    Direction direction = Direction::Max;
    if (ast.direction == OptDirection::Min) {
        direction = Direction::Min;
    } else if (ast.direction == OptDirection::None) {
        if (model.kind != ModelKind::Dtmc) {
            throw UnsupportedError("unsupported: direction-less query on an mdp (use Pmax/Pmin or Rmax/Rmin)");
        }
    }

    BitVector goal = evaluateStateFormula(model, *ast.goal);
    if (ast.op == PropertyOperator::Probability) {
        if (ast.pathBound) {
            outcome.result =
                checkBoundedReachability(model, ast.pathBound->first, ast.pathBound->second, goal, direction, env);
        } else if (model.kind == ModelKind::Dtmc) {
            outcome.result = solveDtmcReachability(model, goal, env);
        } else {
            outcome.result = checkReachability(model, goal, direction, env, extractScheduler);
        }
    } else {
        if (model.kind == ModelKind::Dtmc) {
            outcome.result = solveDtmcReward(model, ast.rewardName, goal, env);
        } else {
            outcome.result = checkTotalReward(model, ast.rewardName, goal, direction, env, extractScheduler);
        }
    }

    if (ast.bound) {
        BitVector satisfied(model.numStates());
        for (std::size_t s = 0; s < model.numStates(); ++s) {
            double value = outcome.result.values[s];
            bool ok = false;
            switch (ast.bound->first) {
            case BoundRelation::Geq:
                ok = value >= ast.bound->second;
            break;
            case BoundRelation::Leq:
                ok = value <= ast.bound->second;
                break;
            case BoundRelation::Gt:
                ok = value > ast.bound->second;
                break;
            case BoundRelation::Lt:
                ok = value < ast.bound->second;
                break;
            }
            if (ok) {
                satisfied.set(s);
            }
        }
        outcome.satisfaction = std::move(satisfied);
    }
    return outcome;
}

} // namespace stormlet
