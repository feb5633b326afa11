#include <cctype>
#include <set>
#include <sstream>

#include "stormlet/exceptions.hpp"
#include "stormlet/prism.hpp"

namespace stormlet {

namespace {

enum class TokenKind { Identifier, Number, String, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;
};

class Lexer {
  public:
    explicit Lexer(std::string const& source) : source_(source) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (position_ < source_.size()) {
            char c = source_[position_];
            if (c == '\n') {
                ++line_;
                column_ = 1;
                ++position_;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                step();
                continue;
            }
            if (c == '/' && position_ + 1 < source_.size() && source_[position_ + 1] == '/') {
                while (position_ < source_.size() && source_[position_] != '\n') {
                    ++position_;
                }
                continue;
            }
            std::size_t line = line_;
            std::size_t column = column_;
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string text;
                while (position_ < source_.size() &&
                       (std::isalnum(static_cast<unsigned char>(source_[position_])) || source_[position_] == '_')) {
                    text.push_back(source_[position_]);
                    step();
                }
                tokens.push_back({TokenKind::Identifier, text, line, column});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string text;
                while (position_ < source_.size() &&
                       (std::isdigit(static_cast<unsigned char>(source_[position_])) || source_[position_] == '.')) {
                    // ".." closes a range, not a decimal point
                    if (source_[position_] == '.' && position_ + 1 < source_.size() && source_[position_ + 1] == '.') {
                        break;
                    }
                    text.push_back(source_[position_]);
                    step();
                }
                tokens.push_back({TokenKind::Number, text, line, column});
            } else if (c == '"') {
                step();
                std::string text;
                while (position_ < source_.size() && source_[position_] != '"') {
                    text.push_back(source_[position_]);
                    step();
                }
                if (position_ >= source_.size()) {
                    throw ParseError("prism: unterminated string at line " + std::to_string(line));
                }
                step();
                tokens.push_back({TokenKind::String, text, line, column});
            } else {
                std::string text(1, c);
                if (c == '.' && position_ + 1 < source_.size() && source_[position_ + 1] == '.') {
                    text = "..";
                    step();
                } else if ((c == '<' || c == '>' || c == '!') && position_ + 1 < source_.size() &&
                           source_[position_ + 1] == '=') {
                    text.push_back('=');
                    step();
                } else if (c == '-' && position_ + 1 < source_.size() && source_[position_ + 1] == '>') {
                    text = "->";
                    step();
                }
                step();
                tokens.push_back({TokenKind::Punct, text, line, column});
            }
        }
        tokens.push_back({TokenKind::End, "", line_, column_});
        return tokens;
    }

  private:
    void step() {
        ++position_;
        ++column_;
    }

    std::string const& source_;
    std::size_t position_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    PrismProgram run() {
        parseHeader();
        PrismProgram program;
        while (peek().kind != TokenKind::End) {
            Token const& token = peek();
            if (token.kind != TokenKind::Identifier) {
                fail("expected a top-level declaration");
            }
            if (token.text == "const") {
                program.constants.push_back(parseConstant());
            } else if (token.text == "formula") {
                program.formulas.push_back(parseFormula());
            } else if (token.text == "module") {
                program.modules.push_back(parseModule());
            } else if (token.text == "label") {
                program.labels.push_back(parseLabel());
            } else if (token.text == "rewards") {
                program.rewardStructures.push_back(parseRewards());
            } else if (token.text == "global") {
                throw UnsupportedError(located("unsupported feature: global variables"));
            } else if (token.text == "init") {
                throw UnsupportedError(located("unsupported feature: init...endinit blocks"));
            } else {
                fail("unexpected declaration '" + token.text + "'");
            }
        }
        checkNames(program);
        return program;
    }

  private:
    Token const& peek(std::size_t lookahead = 0) const {
        std::size_t index = std::min(index_ + lookahead, tokens_.size() - 1);
        return tokens_[index];
    }

    Token const& advance() { return tokens_[index_++]; }

    bool accept(std::string const& punct) {
        if (peek().kind == TokenKind::Punct && peek().text == punct) {
            ++index_;
            return true;
        }
        return false;
    }

    bool acceptKeyword(std::string const& word) {
        if (peek().kind == TokenKind::Identifier && peek().text == word) {
            ++index_;
            return true;
        }
        return false;
    }

    void expect(std::string const& punct) {
        if (!accept(punct)) {
            fail("expected '" + punct + "'");
        }
    }

    void expectKeyword(std::string const& word) {
        if (!acceptKeyword(word)) {
            fail("expected '" + word + "'");
        }
    }

    std::string expectIdentifier(std::string const& what) {
        if (peek().kind != TokenKind::Identifier) {
            fail("expected " + what);
        }
        return advance().text;
    }

    std::string located(std::string const& message) const {
        std::ostringstream out;
        out << "prism: " << message << " at line " << peek().line << ", column " << peek().column;
        return out.str();
    }

    [[noreturn]] void fail(std::string const& message) const { throw ParseError(located(message)); }

    void parseHeader() {
        if (peek().kind != TokenKind::Identifier) {
            fail("expected a model type header");
        }
        std::string kind = advance().text;
        if (kind == "mdp") {
            return;
        }
        static std::set<std::string> const knownKinds = {"dtmc", "ctmc", "pomdp", "ma", "smg",
                                                         "probabilistic", "nondeterministic", "stochastic"};
        if (knownKinds.count(kind)) {
            throw UnsupportedError("prism: unsupported model kind '" + kind + "' (this subset is mdp-only)");
        }
        throw ParseError("prism: expected 'mdp' header, found '" + kind + "'");
    }

    PrismConstant parseConstant() {
        expectKeyword("const");
        PrismConstant constant;
        if (acceptKeyword("int")) {
            constant.type = PrismConstantType::Int;
        } else if (acceptKeyword("double")) {
            constant.type = PrismConstantType::Double;
        } else if (peek().kind == TokenKind::Identifier && peek().text == "bool") {
            throw UnsupportedError(located("unsupported feature: boolean constants"));
        } else {
            fail("expected 'int' or 'double'");
        }
        constant.name = expectIdentifier("constant name");
        if (accept("=")) {
            constant.definition = parseExpression();
        }
        expect(";");
        return constant;
    }

    PrismFormula parseFormula() {
        expectKeyword("formula");
        PrismFormula formula;
        formula.name = expectIdentifier("formula name");
        expect("=");
        formula.definition = parseExpression();
        expect(";");
        return formula;
    }

    PrismModule parseModule() {
        expectKeyword("module");
        PrismModule module;
        module.name = expectIdentifier("module name");
        while (!acceptKeyword("endmodule")) {
            if (peek().kind == TokenKind::End) {
                fail("unterminated module '" + module.name + "'");
            }
            if (peek().kind == TokenKind::Punct && peek().text == "[") {
                module.commands.push_back(parseCommand());
            } else {
                module.variables.push_back(parseVariable());
            }
        }
        return module;
    }

    PrismVariable parseVariable() {
        PrismVariable variable;
        variable.name = expectIdentifier("variable name");
        expect(":");
        if (peek().kind == TokenKind::Identifier && peek().text == "bool") {
            throw UnsupportedError(located("unsupported feature: boolean variables"));
        }
        expect("[");
        variable.lowerBound = parseExpression();
        expect("..");
        variable.upperBound = parseExpression();
        expect("]");
        expectKeyword("init");
        variable.init = parseExpression();
        expect(";");
        return variable;
    }

    PrismCommand parseCommand() {
        PrismCommand command;
        command.line = peek().line;
        expect("[");
        if (peek().kind == TokenKind::Identifier) {
            command.action = advance().text;
        }
        expect("]");
        command.guard = parseExpression();
        expect("->");
        command.branches.push_back(parseBranch());
        while (accept("+")) {
            command.branches.push_back(parseBranch());
        }
        expect(";");
        return command;
    }

    PrismBranch parseBranch() {
        PrismBranch branch;
        branch.probability = parseExpression();
        expect(":");
        if (acceptKeyword("true")) {
            return branch;
        }
        branch.assignments.push_back(parseAssignment());
        while (accept("&")) {
            branch.assignments.push_back(parseAssignment());
        }
        return branch;
    }

    PrismAssignment parseAssignment() {
        expect("(");
        PrismAssignment assignment;
        assignment.variable = expectIdentifier("variable name");
        expect("'");
        expect("=");
        assignment.value = parseExpression();
        expect(")");
        return assignment;
    }

    PrismLabel parseLabel() {
        expectKeyword("label");
        PrismLabel label;
        if (peek().kind != TokenKind::String) {
            fail("expected quoted label name");
        }
        label.name = advance().text;
        expect("=");
        label.expression = parseExpression();
        expect(";");
        return label;
    }

    PrismRewards parseRewards() {
        expectKeyword("rewards");
        PrismRewards rewards;
        if (peek().kind != TokenKind::String) {
            fail("expected quoted reward structure name");
        }
        rewards.name = advance().text;
        while (!acceptKeyword("endrewards")) {
            if (peek().kind == TokenKind::End) {
                fail("unterminated rewards block '" + rewards.name + "'");
            }
            if (peek().kind == TokenKind::Punct && peek().text == "[") {
                throw UnsupportedError(located("unsupported feature: transition rewards"));
            }
            PrismRewardItem item;
            item.guard = parseExpression();
            expect(":");
            item.value = parseExpression();
            expect(";");
            rewards.items.push_back(item);
        }
        return rewards;
    }

    // expression precedence: | < & < comparisons < additive < multiplicative < unary
    PrismExprPtr parseExpression() { return parseOr(); }

    std::shared_ptr<PrismExpression> makeNode() {
        auto node = std::make_shared<PrismExpression>();
        node->line = peek().line;
        node->column = peek().column;
        return node;
    }

    PrismExprPtr binary(PrismExpression::Op op, PrismExprPtr lhs, PrismExprPtr rhs) {
        auto node = std::make_shared<PrismExpression>();
        node->kind = PrismExpression::Kind::Binary;
        node->op = op;
        node->line = lhs->line;
        node->column = lhs->column;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    PrismExprPtr parseOr() {
        PrismExprPtr lhs = parseAnd();
        while (accept("|")) {
            lhs = binary(PrismExpression::Op::Or, lhs, parseAnd());
        }
        return lhs;
    }

    PrismExprPtr parseAnd() {
        PrismExprPtr lhs = parseComparison();
        while (accept("&")) {
            lhs = binary(PrismExpression::Op::And, lhs, parseComparison());
        }
        return lhs;
    }

    PrismExprPtr parseComparison() {
        PrismExprPtr lhs = parseAdditive();
        while (peek().kind == TokenKind::Punct) {
            PrismExpression::Op op;
            if (peek().text == "=") {
                op = PrismExpression::Op::Eq;
            } else if (peek().text == "!=") {
                op = PrismExpression::Op::Neq;
            } else if (peek().text == "<") {
                op = PrismExpression::Op::Lt;
            } else if (peek().text == "<=") {
                op = PrismExpression::Op::Leq;
            } else if (peek().text == ">") {
                op = PrismExpression::Op::Gt;
            } else if (peek().text == ">=") {
                op = PrismExpression::Op::Geq;
            } else {
                break;
            }
            advance();
            lhs = binary(op, lhs, parseAdditive());
        }
        return lhs;
    }

    PrismExprPtr parseAdditive() {
        PrismExprPtr lhs = parseMultiplicative();
        while (peek().kind == TokenKind::Punct && (peek().text == "+" || peek().text == "-")) {
            PrismExpression::Op op = advance().text == "+" ? PrismExpression::Op::Plus : PrismExpression::Op::Minus;
            lhs = binary(op, lhs, parseMultiplicative());
        }
        return lhs;
    }

    PrismExprPtr parseMultiplicative() {
        PrismExprPtr lhs = parseUnary();
        while (peek().kind == TokenKind::Punct && (peek().text == "*" || peek().text == "/")) {
            PrismExpression::Op op = advance().text == "*" ? PrismExpression::Op::Times : PrismExpression::Op::Divide;
            lhs = binary(op, lhs, parseUnary());
        }
        return lhs;
    }

    PrismExprPtr parseUnary() {
        if (peek().kind == TokenKind::Punct && (peek().text == "!" || peek().text == "-")) {
            auto node = makeNode();
            node->kind = PrismExpression::Kind::Unary;
            node->op = advance().text == "!" ? PrismExpression::Op::Not : PrismExpression::Op::Negate;
            node->lhs = parseUnary();
            return node;
        }
        return parseAtom();
    }

    PrismExprPtr parseAtom() {
        if (accept("(")) {
            PrismExprPtr inner = parseExpression();
            expect(")");
            return inner;
        }
        if (peek().kind == TokenKind::Number) {
            auto node = makeNode();
            node->kind = PrismExpression::Kind::Literal;
            node->literal = rationalFromDecimalString(advance().text);
            return node;
        }
        if (peek().kind == TokenKind::Identifier) {
            std::string name = peek().text;
            if ((name == "min" || name == "max" || name == "func" || name == "floor" || name == "ceil" ||
                 name == "pow" || name == "mod" || name == "log") &&
                peek(1).kind == TokenKind::Punct && peek(1).text == "(") {
                throw UnsupportedError(located("unsupported feature: function '" + name + "'"));
            }
            auto node = makeNode();
            advance();
            if (name == "true" || name == "false") {
                node->kind = PrismExpression::Kind::BoolLiteral;
                node->boolValue = name == "true";
            } else {
                node->kind = PrismExpression::Kind::Identifier;
                node->name = name;
            }
            return node;
        }
        fail("expected an expression");
    }

    void checkNames(PrismProgram const& program) {
        std::set<std::string> names;
        auto add = [&](std::string const& name, std::string const& what) {
            if (!names.insert(name).second) {
                throw ParseError("prism: duplicate name '" + name + "' (" + what + ")");
            }
        };
        for (auto const& constant : program.constants) {
            add(constant.name, "constant");
        }
        for (auto const& formula : program.formulas) {
            add(formula.name, "formula");
        }
        for (auto const& module : program.modules) {
            for (auto const& variable : module.variables) {
                add(variable.name, "variable in module " + module.name);
            }
        }
        // assigned variables must belong to the assigning module
        for (auto const& module : program.modules) {
            std::set<std::string> own;
            for (auto const& variable : module.variables) {
                own.insert(variable.name);
            }
            for (auto const& command : module.commands) {
                for (auto const& branch : command.branches) {
                    for (auto const& assignment : branch.assignments) {
                        if (!own.count(assignment.variable)) {
                            throw ParseError("prism: module " + module.name + " assigns foreign variable '" +
                                             assignment.variable + "' (line " + std::to_string(command.line) + ")");
                        }
                    }
                }
            }
        }
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
};

void printExpression(std::ostringstream& out, PrismExpression const& expr);

void printOperand(std::ostringstream& out, PrismExpression const& expr) {
    bool needsParens = expr.kind == PrismExpression::Kind::Binary;
    if (needsParens) {
        out << "(";
    }
    printExpression(out, expr);
    if (needsParens) {
        out << ")";
    }
}

void printExpression(std::ostringstream& out, PrismExpression const& expr) {
    switch (expr.kind) {
    case PrismExpression::Kind::Literal:
        if (denominator(expr.literal) == 1) {
            out << numerator(expr.literal).str();
        } else {
            out << numerator(expr.literal).str() << "/" << denominator(expr.literal).str();
        }
        return;
    case PrismExpression::Kind::BoolLiteral:
        out << (expr.boolValue ? "true" : "false");
        return;
    case PrismExpression::Kind::Identifier:
        out << expr.name;
        return;
    case PrismExpression::Kind::Unary:
        out << (expr.op == PrismExpression::Op::Not ? "!" : "-");
        printOperand(out, *expr.lhs);
        return;
    case PrismExpression::Kind::Binary: {
        char const* symbol = "?";
        switch (expr.op) {
        case PrismExpression::Op::Plus:
            symbol = "+";
            break;
        case PrismExpression::Op::Minus:
            symbol = "-";
            break;
        case PrismExpression::Op::Times:
            symbol = "*";
            break;
        case PrismExpression::Op::Divide:
            symbol = "/";
            break;
        case PrismExpression::Op::Eq:
            symbol = "=";
            break;
        case PrismExpression::Op::Neq:
            symbol = "!=";
            break;
        case PrismExpression::Op::Lt:
            symbol = "<";
            break;
        case PrismExpression::Op::Leq:
            symbol = "<=";
            break;
        case PrismExpression::Op::Gt:
            symbol = ">";
            break;
        case PrismExpression::Op::Geq:
            symbol = ">=";
            break;
        case PrismExpression::Op::And:
            symbol = "&";
            break;
        case PrismExpression::Op::Or:
            symbol = "|";
            break;
        default:
            break;
        }
        printOperand(out, *expr.lhs);
        out << " " << symbol << " ";
        printOperand(out, *expr.rhs);
        return;
    }
    }
}

std::string exprToString(PrismExprPtr const& expr) {
    std::ostringstream out;
    printExpression(out, *expr);
    return out.str();
}

} // namespace

PrismProgram parsePrism(std::string const& source) {
    Lexer lexer(source);
    Parser parser(lexer.run());
    return parser.run();
}

std::string printPrism(PrismProgram const& program) {
    std::ostringstream out;
    out << "mdp\n\n";
    for (auto const& constant : program.constants) {
        out << "const " << (constant.type == PrismConstantType::Int ? "int" : "double") << " " << constant.name;
        if (constant.definition) {
            out << " = " << exprToString(constant.definition);
        }
        out << ";\n";
    }
    for (auto const& formula : program.formulas) {
        out << "formula " << formula.name << " = " << exprToString(formula.definition) << ";\n";
    }
    for (auto const& module : program.modules) {
        out << "\nmodule " << module.name << "\n";
        for (auto const& variable : module.variables) {
            out << "    " << variable.name << " : [" << exprToString(variable.lowerBound) << ".."
                << exprToString(variable.upperBound) << "] init " << exprToString(variable.init) << ";\n";
        }
        for (auto const& command : module.commands) {
            out << "    [" << command.action << "] " << exprToString(command.guard) << " -> ";
            for (std::size_t b = 0; b < command.branches.size(); ++b) {
                if (b > 0) {
                    out << " + ";
                }
                auto const& branch = command.branches[b];
                out << exprToString(branch.probability) << " : ";
                if (branch.assignments.empty()) {
                    out << "true";
                } else {
                    for (std::size_t a = 0; a < branch.assignments.size(); ++a) {
                        if (a > 0) {
                            out << " & ";
                        }
                        out << "(" << branch.assignments[a].variable << "'="
                            << exprToString(branch.assignments[a].value) << ")";
                    }
                }
            }
            out << ";\n";
        }
        out << "endmodule\n";
    }
    out << "\n";
    for (auto const& label : program.labels) {
        out << "label \"" << label.name << "\" = " << exprToString(label.expression) << ";\n";
    }
    for (auto const& rewards : program.rewardStructures) {
        out << "rewards \"" << rewards.name << "\"\n";
        for (auto const& item : rewards.items) {
            out << "    " << exprToString(item.guard) << " : " << exprToString(item.value) << ";\n";
        }
        out << "endrewards\n";
    }
    return out.str();
}

std::map<std::string, Rational> parseConstantBindings(std::string const& text) {
    std::map<std::string, Rational> bindings;
    std::size_t position = 0;
    while (position < text.size()) {
        std::size_t comma = text.find(',', position);
        std::string item = text.substr(position, comma == std::string::npos ? std::string::npos : comma - position);
        position = comma == std::string::npos ? text.size() : comma + 1;
        // trim
        std::size_t begin = item.find_first_not_of(" \t");
        std::size_t end = item.find_last_not_of(" \t");
        if (begin == std::string::npos) {
            continue;
        }
        item = item.substr(begin, end - begin + 1);
        std::size_t equals = item.find('=');
        if (equals == std::string::npos) {
            throw ParseError("constant binding '" + item + "' is not NAME=VALUE");
        }
        std::string name = item.substr(0, equals);
        std::string value = item.substr(equals + 1);
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t");
            std::size_t e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        name = trim(name);
        value = trim(value);
        std::size_t slash = value.find('/');
        Rational parsed;
        if (slash != std::string::npos) {
            parsed = rationalFromDecimalString(value.substr(0, slash)) /
                     rationalFromDecimalString(value.substr(slash + 1));
        } else {
            parsed = rationalFromDecimalString(value);
        }
        bindings[name] = parsed;
    }
    return bindings;
}

} // namespace stormlet
