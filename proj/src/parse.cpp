#include "recursum/parse.hpp"

#include "recursum/error.hpp"
#include "recursum/validate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace recursum {

namespace {

constexpr std::array<std::string_view, 3> kFunctions = {"sqrt", "exp", "erf"};

bool is_function_name(std::string_view s) {
    return std::find(kFunctions.begin(), kFunctions.end(), s) != kFunctions.end();
}

// ---------------------------------------------------------------------------
// Tokens

struct Token {
    enum class Kind { Number, Ident, Op, End };
    Kind kind = Kind::End;
    std::string text;
    bool integer = false;
    double number = 0.0;
    std::size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.pos = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            bool real = false;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                real = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    real = true;
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            tok.kind = Token::Kind::Number;
            tok.text = std::string(src.substr(i, j - i));
            tok.integer = !real;
            auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
            if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
                fail(ErrorCode::SyntaxError, "bad number '" + tok.text + "'");
            }
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            tok.kind = Token::Kind::Ident;
            tok.text = std::string(src.substr(i, j - i));
            i = j;
        } else {
            static constexpr std::array<std::string_view, 5> two = {"==", "!=", "<=", ">=", "&&"};
            tok.kind = Token::Kind::Op;
            std::string_view rest = src.substr(i);
            auto it = std::find_if(two.begin(), two.end(), [&](std::string_view op) { return rest.starts_with(op); });
            if (it != two.end()) {
                tok.text = std::string(*it);
                i += 2;
            } else if (std::string_view("+-*/()[],<>;|=:").find(c) != std::string_view::npos) {
                tok.text = std::string(1, c);
                ++i;
            } else {
                fail(ErrorCode::SyntaxError, std::string("unexpected character '") + c + "'");
            }
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.pos = src.size();
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------------------
// Parse tree, prior to coefficient classification and linearization.

struct Node {
    enum class Kind { Num, Index, Scalar, Seq, Pi, Func, Self, Neg, Add, Sub, Mul, Div, Paren };
    Kind kind = Kind::Num;
    double number = 0.0;
    bool integer = false;
    std::string name;
    int slot = -1;
    std::vector<int> shifts;
    std::vector<Node> kids;
};

Node make(Node::Kind k, std::vector<Node> kids = {}) {
    Node n;
    n.kind = k;
    n.kids = std::move(kids);
    return n;
}

bool has_call(const Node& n) {
    if (n.kind == Node::Kind::Self) return true;
    return std::any_of(n.kids.begin(), n.kids.end(), has_call);
}

bool contains_index(const Node& n) {
    if (n.kind == Node::Kind::Index) return true;
    return std::any_of(n.kids.begin(), n.kids.end(), contains_index);
}

bool index_only(const Node& n) {
    switch (n.kind) {
    case Node::Kind::Num: return n.integer;
    case Node::Kind::Index: return true;
    case Node::Kind::Neg:
    case Node::Kind::Add:
    case Node::Kind::Sub:
    case Node::Kind::Mul:
    case Node::Kind::Paren:
        return std::all_of(n.kids.begin(), n.kids.end(), index_only);
    default: return false;
    }
}

IntExpr to_int(const Node& n) {
    switch (n.kind) {
    case Node::Kind::Num: return IntExpr::literal(static_cast<std::int64_t>(n.number));
    case Node::Kind::Index: return IntExpr::symbol_ref(n.name, n.slot);
    case Node::Kind::Paren: return to_int(n.kids[0]);
    case Node::Kind::Neg: {
        const Node& inner = n.kids[0];
        if (inner.kind == Node::Kind::Num) return IntExpr::literal(-static_cast<std::int64_t>(inner.number));
        return IntExpr::binary(IntExpr::Kind::Mul, IntExpr::literal(-1), to_int(inner));
    }
    case Node::Kind::Add: return IntExpr::binary(IntExpr::Kind::Add, to_int(n.kids[0]), to_int(n.kids[1]));
    case Node::Kind::Sub: return IntExpr::binary(IntExpr::Kind::Sub, to_int(n.kids[0]), to_int(n.kids[1]));
    case Node::Kind::Mul: return IntExpr::binary(IntExpr::Kind::Mul, to_int(n.kids[0]), to_int(n.kids[1]));
    default: break;
    }
    fail(ErrorCode::SyntaxError, "expected an integer index expression");
}

CoeffExpr negate(CoeffExpr c) {
    if (c.kind == CoeffExpr::Kind::Literal) return CoeffExpr::literal(-c.value);
    return CoeffExpr::binary(CoeffExpr::Kind::Mul, CoeffExpr::literal(-1.0), std::move(c));
}

CoeffExpr classify(const Node& n) {
    if (index_only(n) && contains_index(n)) return CoeffExpr::index_coeff(to_int(n));
    switch (n.kind) {
    case Node::Kind::Num: return CoeffExpr::literal(n.number);
    case Node::Kind::Scalar: return CoeffExpr::scalar(n.name, n.slot);
    case Node::Kind::Pi: return CoeffExpr::pi();
    case Node::Kind::Seq: return CoeffExpr::seq(n.name, n.slot, to_int(n.kids[0]));
    case Node::Kind::Func: return CoeffExpr::func(n.name, classify(n.kids[0]));
    case Node::Kind::Paren: return classify(n.kids[0]);
    case Node::Kind::Neg: return negate(classify(n.kids[0]));
    case Node::Kind::Add: return CoeffExpr::binary(CoeffExpr::Kind::Add, classify(n.kids[0]), classify(n.kids[1]));
    case Node::Kind::Sub: return CoeffExpr::binary(CoeffExpr::Kind::Sub, classify(n.kids[0]), classify(n.kids[1]));
    case Node::Kind::Mul: return CoeffExpr::binary(CoeffExpr::Kind::Mul, classify(n.kids[0]), classify(n.kids[1]));
    case Node::Kind::Div: return CoeffExpr::binary(CoeffExpr::Kind::Div, classify(n.kids[0]), classify(n.kids[1]));
    case Node::Kind::Index:
    case Node::Kind::Self: break;
    }
    fail(ErrorCode::SyntaxError, "unexpected recursive reference inside a coefficient");
}

CoeffExpr times(CoeffExpr lhs, CoeffExpr rhs) {
    if (lhs.is_literal(1.0)) return rhs;
    if (rhs.is_literal(1.0)) return lhs;
    return CoeffExpr::binary(CoeffExpr::Kind::Mul, std::move(lhs), std::move(rhs));
}

std::vector<Term> linearize(const Node& n) {
    using K = Node::Kind;
    auto negated = [](std::vector<Term> terms) {
        for (Term& t : terms) t.coefficient = negate(std::move(t.coefficient));
        return terms;
    };
    switch (n.kind) {
    case K::Self: return {Term{CoeffExpr::literal(1.0), RecCall{n.shifts}}};
    case K::Add: {
        auto out = linearize(n.kids[0]);
        auto rhs = linearize(n.kids[1]);
        out.insert(out.end(), rhs.begin(), rhs.end());
        return out;
    }
    case K::Sub: {
        auto out = linearize(n.kids[0]);
        auto rhs = negated(linearize(n.kids[1]));
        out.insert(out.end(), rhs.begin(), rhs.end());
        return out;
    }
    case K::Neg: return negated(linearize(n.kids[0]));
    case K::Paren:
        if (has_call(n.kids[0])) return linearize(n.kids[0]);
        return {Term{classify(n.kids[0]), std::nullopt}};
    case K::Mul: {
        const bool left = has_call(n.kids[0]);
        const bool right = has_call(n.kids[1]);
        if (left && right) fail(ErrorCode::SyntaxError, "product of two recursive references is not linear");
        if (!left && !right) return {Term{classify(n), std::nullopt}};
        if (left) {
            auto terms = linearize(n.kids[0]);
            const CoeffExpr factor = classify(n.kids[1]);
            for (Term& t : terms) t.coefficient = times(std::move(t.coefficient), factor);
            return terms;
        }
        auto terms = linearize(n.kids[1]);
        const CoeffExpr factor = classify(n.kids[0]);
        for (Term& t : terms) t.coefficient = times(factor, std::move(t.coefficient));
        return terms;
    }
    case K::Div: {
        if (has_call(n.kids[1])) fail(ErrorCode::SyntaxError, "division by a recursive reference");
        if (!has_call(n.kids[0])) return {Term{classify(n), std::nullopt}};
        auto terms = linearize(n.kids[0]);
        const CoeffExpr divisor = classify(n.kids[1]);
        for (Term& t : terms) {
            t.coefficient = CoeffExpr::binary(CoeffExpr::Kind::Div, std::move(t.coefficient), divisor);
        }
        return terms;
    }
    default: return {Term{classify(n), std::nullopt}};
    }
}

// ---------------------------------------------------------------------------
// Recursive-descent parser over tokens.

enum class Mode { Rule, Value, Coefficient, Index };

class Parser {
public:
    Parser(std::vector<Token> tokens, const RecurrenceSpec& ctx, Mode mode)
        : toks_(std::move(tokens)), ctx_(ctx), mode_(mode) {}

    Node expression() {
        Node lhs = term();
        while (peek_op("+") || peek_op("-")) {
            const bool add = next().text == "+";
            Node rhs = term();
            lhs = make(add ? Node::Kind::Add : Node::Kind::Sub, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    bool at_end() const { return toks_[pos_].kind == Token::Kind::End; }
    const Token& peek() const { return toks_[pos_]; }
    bool peek_op(std::string_view op) const {
        return toks_[pos_].kind == Token::Kind::Op && toks_[pos_].text == op;
    }
    const Token& next() { return toks_[pos_++]; }

    void expect_op(std::string_view op) {
        if (!peek_op(op)) {
            fail(ErrorCode::SyntaxError, "expected '" + std::string(op) + "' at column " +
                                             std::to_string(peek().pos + 1) + describe(peek()));
        }
        ++pos_;
    }

private:
    static std::string describe(const Token& t) {
        if (t.kind == Token::Kind::End) return " (end of input)";
        return " (found '" + t.text + "')";
    }

    Node term() {
        Node lhs = unary();
        while (peek_op("*") || peek_op("/")) {
            const bool mul = next().text == "*";
            Node rhs = unary();
            lhs = make(mul ? Node::Kind::Mul : Node::Kind::Div, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Node unary() {
        if (peek_op("-")) {
            next();
            return make(Node::Kind::Neg, {unary()});
        }
        if (peek_op("+")) {
            next();
            return unary();
        }
        return primary();
    }

    Node primary() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Number) {
            next();
            Node n;
            n.kind = Node::Kind::Num;
            n.number = t.number;
            n.integer = t.integer;
            if (mode_ == Mode::Index && !t.integer) {
                fail(ErrorCode::SyntaxError, "non-integer literal '" + t.text + "' in an index expression");
            }
            return n;
        }
        if (peek_op("(")) {
            next();
            Node inner = expression();
            expect_op(")");
            return make(Node::Kind::Paren, {std::move(inner)});
        }
        if (t.kind == Token::Kind::Ident) return identifier();
        if (t.kind == Token::Kind::End) fail(ErrorCode::SyntaxError, "unexpected end of expression");
        fail(ErrorCode::SyntaxError, "unexpected '" + t.text + "' at column " + std::to_string(t.pos + 1));
    }

    Node identifier() {
        const std::string name = next().text;
        if (name == "E" && peek_op("[")) return self_reference();
        if (const int slot = ctx_.index_of(name); slot >= 0) {
            Node n;
            n.kind = Node::Kind::Index;
            n.name = name;
            n.slot = slot;
            return n;
        }
        if (mode_ == Mode::Index) fail(ErrorCode::UndeclaredSymbol, "'" + name + "' is not a declared index");
        if (const int slot = ctx_.scalar_of(name); slot >= 0) {
            Node n;
            n.kind = Node::Kind::Scalar;
            n.name = name;
            n.slot = slot;
            return n;
        }
        if (const int slot = ctx_.sequence_of(name); slot >= 0) {
            if (!peek_op("[")) fail(ErrorCode::SyntaxError, "sequence '" + name + "' needs a subscript");
            next();
            Node sub = expression();
            expect_op("]");
            if (!index_only(sub)) {
                fail(ErrorCode::SyntaxError, "subscript of '" + name + "' must be an integer index expression");
            }
            Node n = make(Node::Kind::Seq, {std::move(sub)});
            n.name = name;
            n.slot = slot;
            return n;
        }
        if (name == "pi" || (is_function_name(name) && peek_op("("))) {
            if (mode_ != Mode::Value) {
                fail(ErrorCode::SyntaxError, "'" + name + "' is only allowed in base-case values");
            }
            if (name == "pi") return make(Node::Kind::Pi);
            expect_op("(");
            Node arg = expression();
            expect_op(")");
            Node n = make(Node::Kind::Func, {std::move(arg)});
            n.name = name;
            return n;
        }
        fail(ErrorCode::UndeclaredSymbol, "undeclared symbol '" + name + "'");
    }

    Node self_reference() {
        if (mode_ != Mode::Rule) fail(ErrorCode::SyntaxError, "recursive reference E[...] is only allowed in rules");
        expect_op("[");
        std::vector<Node> args;
        args.push_back(expression());
        while (peek_op(",")) {
            next();
            args.push_back(expression());
        }
        expect_op("]");
        if (args.size() != ctx_.indices.size()) {
            fail(ErrorCode::MalformedShift, "E[...] takes " + std::to_string(ctx_.indices.size()) +
                                                " arguments, got " + std::to_string(args.size()));
        }
        Node n = make(Node::Kind::Self);
        for (std::size_t k = 0; k < args.size(); ++k) n.shifts.push_back(shift_of(args[k], static_cast<int>(k)));
        return n;
    }

    // Accepts `idx`, `idx + int`, `idx - int` where idx is the index at `slot`.
    int shift_of(const Node& arg, int slot) const {
        auto is_own_index = [&](const Node& n) { return n.kind == Node::Kind::Index && n.slot == slot; };
        auto is_int = [](const Node& n) { return n.kind == Node::Kind::Num && n.integer; };
        if (is_own_index(arg)) return 0;
        if ((arg.kind == Node::Kind::Add || arg.kind == Node::Kind::Sub) && is_own_index(arg.kids[0]) &&
            is_int(arg.kids[1])) {
            const int offset = static_cast<int>(arg.kids[1].number);
            return arg.kind == Node::Kind::Add ? offset : -offset;
        }
        fail(ErrorCode::MalformedShift, "argument " + std::to_string(slot + 1) + " of E[...] must be '" +
                                            ctx_.indices[static_cast<std::size_t>(slot)] +
                                            "' optionally shifted by an integer literal");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const RecurrenceSpec& ctx_;
    Mode mode_;
};

Node parse_whole(std::string_view text, const RecurrenceSpec& ctx, Mode mode) {
    Parser p(tokenize(text), ctx, mode);
    if (p.at_end()) fail(ErrorCode::SyntaxError, "empty expression");
    Node n = p.expression();
    if (!p.at_end()) {
        fail(ErrorCode::SyntaxError, "unexpected '" + p.peek().text + "' at column " + std::to_string(p.peek().pos + 1));
    }
    return n;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

CompareOp compare_op(std::string_view text) {
    if (text == "==") return CompareOp::Eq;
    if (text == "!=") return CompareOp::Ne;
    if (text == "<") return CompareOp::Lt;
    if (text == "<=") return CompareOp::Le;
    if (text == ">") return CompareOp::Gt;
    return CompareOp::Ge;
}

bool is_compare(const Token& t) {
    static constexpr std::array<std::string_view, 6> ops = {"==", "!=", "<", "<=", ">", ">="};
    return t.kind == Token::Kind::Op && std::find(ops.begin(), ops.end(), t.text) != ops.end();
}

// Splits `text` on top-level occurrences of `sep` (bracket depth 0).
std::vector<std::string> split_top_level(std::string_view text, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == sep && depth == 0) {
            parts.push_back(std::string(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.push_back(std::string(text.substr(start)));
    return parts;
}

}  // namespace

// ---------------------------------------------------------------------------

Sum parse_expression(std::string_view text, const RecurrenceSpec& ctx) {
    Sum sum;
    sum.terms = linearize(parse_whole(text, ctx, Mode::Rule));
    return sum;
}

CoeffExpr parse_value(std::string_view text, const RecurrenceSpec& ctx) {
    return classify(parse_whole(text, ctx, Mode::Value));
}

CoeffExpr parse_coefficient(std::string_view text, const RecurrenceSpec& ctx) {
    return classify(parse_whole(text, ctx, Mode::Coefficient));
}

std::vector<Constraint> parse_constraints(std::string_view text, const RecurrenceSpec& ctx) {
    std::vector<Token> toks = tokenize(text);
    // Split the token stream into conjuncts.
    std::vector<std::vector<Token>> groups(1);
    for (Token& t : toks) {
        const bool sep = (t.kind == Token::Kind::Op && (t.text == "&&" || t.text == ";")) ||
                         (t.kind == Token::Kind::Ident && t.text == "and");
        if (sep) {
            groups.emplace_back();
        } else if (t.kind != Token::Kind::End) {
            groups.back().push_back(std::move(t));
        }
    }
    std::vector<Constraint> out;
    for (auto& group : groups) {
        if (group.empty()) fail(ErrorCode::SyntaxError, "empty constraint in '" + std::string(text) + "'");
        auto cmp = std::find_if(group.begin(), group.end(), is_compare);
        if (cmp == group.end()) fail(ErrorCode::SyntaxError, "constraint without comparison operator");
        if (std::find_if(cmp + 1, group.end(), is_compare) != group.end()) {
            fail(ErrorCode::SyntaxError, "chained comparison in constraint");
        }
        const CompareOp op = compare_op(cmp->text);
        auto side = [&](std::vector<Token> part) {
            if (part.empty()) fail(ErrorCode::SyntaxError, "missing operand of '" + std::string(compare_op_text(op)) + "'");
            Token end;
            part.push_back(end);
            Parser p(std::move(part), ctx, Mode::Index);
            Node n = p.expression();
            if (!p.at_end()) fail(ErrorCode::SyntaxError, "unexpected '" + p.peek().text + "' in constraint");
            return to_int(n);
        };
        Constraint c;
        c.lhs = side(std::vector<Token>(group.begin(), cmp));
        c.op = op;
        c.rhs = side(std::vector<Token>(cmp + 1, group.end()));
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spec files

namespace {

std::string strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

std::vector<std::string> words(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

std::pair<std::string, std::string> split_keyword(const std::string& line) {
    const std::size_t sp = line.find_first_of(" \t");
    if (sp == std::string::npos) return {line, ""};
    return {line.substr(0, sp), trim(std::string_view(line).substr(sp + 1))};
}

struct RuleHeader {
    std::string name;
    std::string guards;
    std::string body;
};

// `"name" [when <guards>] : <body>`
RuleHeader split_rule(const std::string& rest) {
    RuleHeader h;
    if (rest.empty() || rest[0] != '"') fail(ErrorCode::SyntaxError, "rule name must be a double-quoted string");
    const std::size_t close = rest.find('"', 1);
    if (close == std::string::npos) fail(ErrorCode::SyntaxError, "unterminated rule name");
    h.name = rest.substr(1, close - 1);
    std::string tail = trim(std::string_view(rest).substr(close + 1));
    const std::size_t colon = tail.find(':');
    if (colon == std::string::npos) fail(ErrorCode::SyntaxError, "missing ':' before rule expression");
    std::string head = trim(std::string_view(tail).substr(0, colon));
    h.body = trim(std::string_view(tail).substr(colon + 1));
    if (!head.empty()) {
        if (!head.starts_with("when") || (head.size() > 4 && !std::isspace(static_cast<unsigned char>(head[4])))) {
            fail(ErrorCode::SyntaxError, "expected 'when' before rule guards");
        }
        h.guards = trim(std::string_view(head).substr(4));
        if (h.guards.empty()) fail(ErrorCode::SyntaxError, "'when' without guards");
    }
    if (h.body.empty()) fail(ErrorCode::SyntaxError, "empty rule expression");
    return h;
}

// Locates the top-level `scale` keyword in a rule body.
std::size_t find_scale_keyword(const std::string& body) {
    int depth = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (depth == 0 && body.compare(i, 5, "scale") == 0) {
            const bool left_ok = i == 0 || !(std::isalnum(static_cast<unsigned char>(body[i - 1])) || body[i - 1] == '_');
            const bool right_ok = i + 5 >= body.size() ||
                                  !(std::isalnum(static_cast<unsigned char>(body[i + 5])) || body[i + 5] == '_');
            if (left_ok && right_ok) return i;
        }
    }
    return std::string::npos;
}

}  // namespace

RecurrenceSpec parse_spec_file(std::string_view text) {
    struct Line {
        int number;
        std::string keyword;
        std::string rest;
    };
    std::vector<Line> lines;
    {
        std::istringstream in{std::string(text)};
        int number = 0;
        for (std::string raw; std::getline(in, raw);) {
            ++number;
            std::string line = trim(strip_comment(raw));
            if (line.empty()) continue;
            auto [kw, rest] = split_keyword(line);
            lines.push_back({number, kw, rest});
        }
    }

    RecurrenceSpec spec;
    bool seen_name = false;
    bool seen_ns = false;

    // Pass 1: declarations.
    for (const Line& l : lines) {
        try {
            if (l.keyword == "recurrence") {
                if (seen_name) throw ParseError(l.number, "duplicate 'recurrence' line");
                const auto w = words(l.rest);
                if (w.size() != 1) throw ParseError(l.number, "'recurrence' takes exactly one name");
                spec.name = w[0];
                seen_name = true;
            } else if (l.keyword == "namespace") {
                if (seen_ns) throw ParseError(l.number, "duplicate 'namespace' line");
                const auto w = words(l.rest);
                if (w.size() != 1) throw ParseError(l.number, "'namespace' takes exactly one name");
                spec.ns = w[0];
                seen_ns = true;
            } else if (l.keyword == "indices") {
                const auto w = words(l.rest);
                spec.indices.insert(spec.indices.end(), w.begin(), w.end());
            } else if (l.keyword == "scalars") {
                const auto w = words(l.rest);
                spec.scalars.insert(spec.scalars.end(), w.begin(), w.end());
            } else if (l.keyword == "sequences") {
                const auto w = words(l.rest);
                spec.sequences.insert(spec.sequences.end(), w.begin(), w.end());
            } else if (l.keyword == "layered") {
                const auto w = words(l.rest);
                if (w.size() < 4 || w[0] != "axis" || w[2] != "descend") {
                    throw ParseError(l.number, "expected 'layered axis <index> descend <index>...'");
                }
                if (spec.layered) throw ParseError(l.number, "duplicate 'layered' line");
                spec.layered = LayeredAnnotation{w[1], std::vector<std::string>(w.begin() + 3, w.end())};
            } else if (l.keyword == "direction") {
                const auto w = words(l.rest);
                if (w.size() != 1) throw ParseError(l.number, "'direction' takes one of upward, downward");
                if (w[0] == "upward") {
                    spec.direction = Direction::Upward;
                } else if (w[0] == "downward") {
                    spec.direction = Direction::Downward;
                } else if (w[0] == "unspecified") {
                    spec.direction = Direction::Unspecified;
                } else {
                    throw ParseError(l.number, "unknown direction '" + w[0] + "'");
                }
            } else if (l.keyword != "validity" && l.keyword != "base" && l.keyword != "rule" &&
                       l.keyword != "average") {
                throw ParseError(l.number, "unknown directive '" + l.keyword + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(l.number, e.what());
        }
    }
    if (!seen_name) throw ParseError(lines.empty() ? 1 : lines.front().number, "missing 'recurrence' line");
    if (spec.indices.empty()) throw ParseError(lines.front().number, "missing 'indices' line");

    // Pass 2: everything that references declared symbols.
    for (const Line& l : lines) {
        try {
            if (l.keyword == "validity") {
                auto cs = parse_constraints(l.rest, spec);
                spec.validity.insert(spec.validity.end(), cs.begin(), cs.end());
            } else if (l.keyword == "base") {
                const std::size_t colon = l.rest.find(':');
                if (colon == std::string::npos) throw ParseError(l.number, "missing ':' in base case");
                BaseCase base;
                base.assignment.assign(spec.indices.size(), 0);
                std::vector<bool> seen(spec.indices.size(), false);
                for (const std::string& w : words(std::string_view(l.rest).substr(0, colon))) {
                    const std::size_t eq = w.find('=');
                    if (eq == std::string::npos) throw ParseError(l.number, "expected index=value, got '" + w + "'");
                    const std::string sym = w.substr(0, eq);
                    const int slot = spec.index_of(sym);
                    if (slot < 0) throw ParseError(l.number, "undeclared index '" + sym + "' in base case");
                    if (seen[static_cast<std::size_t>(slot)]) {
                        throw ParseError(l.number, "index '" + sym + "' assigned twice");
                    }
                    std::int64_t v = 0;
                    const std::string num = w.substr(eq + 1);
                    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
                    if (ec != std::errc() || ptr != num.data() + num.size()) {
                        throw ParseError(l.number, "base assignment needs an integer, got '" + num + "'");
                    }
                    base.assignment[static_cast<std::size_t>(slot)] = v;
                    seen[static_cast<std::size_t>(slot)] = true;
                }
                for (std::size_t k = 0; k < seen.size(); ++k) {
                    if (!seen[k]) {
                        throw ParseError(l.number, "base case does not assign index '" + spec.indices[k] + "'");
                    }
                }
                base.value = parse_value(trim(std::string_view(l.rest).substr(colon + 1)), spec);
                spec.bases.push_back(std::move(base));
            } else if (l.keyword == "rule" || l.keyword == "average") {
                RuleHeader h = split_rule(l.rest);
                Rule rule;
                rule.name = h.name;
                if (!h.guards.empty()) rule.guards = parse_constraints(h.guards, spec);
                if (l.keyword == "rule") {
                    rule.body.kind = RuleBody::Kind::Single;
                    std::string body = h.body;
                    if (const std::size_t at = find_scale_keyword(body); at != std::string::npos) {
                        const std::string scale = trim(std::string_view(body).substr(at + 5));
                        if (scale.empty()) throw ParseError(l.number, "'scale' without expression");
                        rule.body.scale = parse_coefficient(scale, spec);
                        body = trim(std::string_view(body).substr(0, at));
                    }
                    rule.body.branches.push_back(parse_expression(body, spec));
                } else {
                    rule.body.kind = RuleBody::Kind::BranchAverage;
                    for (const std::string& branch : split_top_level(h.body, '|')) {
                        rule.body.branches.push_back(parse_expression(trim(branch), spec));
                    }
                    if (rule.body.branches.size() < 2) {
                        throw ParseError(l.number, "'average' needs at least two branches separated by '|'");
                    }
                }
                spec.rules.push_back(std::move(rule));
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(l.number, e.what());
        }
    }
    return spec;
}

RecurrenceSpec load_spec_file(std::string_view text) {
    RecurrenceSpec spec = parse_spec_file(text);
    const auto diags = validate_spec(spec);
    if (!diags.empty()) {
        std::string msg = "invalid recurrence '" + spec.name + "':";
        for (const Diagnostic& d : diags) msg += "\n  " + d.code + ": " + d.message;
        fail(ErrorCode::ValidationError, msg);
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";  // 'n' covers inf/nan
    return s;
}

namespace {

bool int_is_atom(const IntExpr& e) {
    return e.kind == IntExpr::Kind::Symbol || (e.kind == IntExpr::Kind::Literal && e.value >= 0);
}

std::string int_atom(const IntExpr& e) {
    return int_is_atom(e) ? render_int(e) : "(" + render_int(e) + ")";
}

bool coeff_is_atom(const CoeffExpr& e) {
    switch (e.kind) {
    case CoeffExpr::Kind::Literal: return !std::signbit(e.value);
    case CoeffExpr::Kind::Pi:
    case CoeffExpr::Kind::Scalar:
    case CoeffExpr::Kind::Seq:
    case CoeffExpr::Kind::Func: return true;
    case CoeffExpr::Kind::Index: return e.index.kind == IntExpr::Kind::Symbol;
    default: return false;
    }
}

std::string coeff_atom(const CoeffExpr& e) {
    return coeff_is_atom(e) ? render_coeff(e) : "(" + render_coeff(e) + ")";
}

}  // namespace

std::string render_int(const IntExpr& e) {
    switch (e.kind) {
    case IntExpr::Kind::Literal: return std::to_string(e.value);
    case IntExpr::Kind::Symbol: return e.symbol;
    case IntExpr::Kind::Add: return int_atom(e.args[0]) + " + " + int_atom(e.args[1]);
    case IntExpr::Kind::Sub: return int_atom(e.args[0]) + " - " + int_atom(e.args[1]);
    case IntExpr::Kind::Mul: return int_atom(e.args[0]) + " * " + int_atom(e.args[1]);
    }
    return "";
}

std::string render_coeff(const CoeffExpr& e) {
    using K = CoeffExpr::Kind;
    switch (e.kind) {
    case K::Literal: return format_real(e.value);
    case K::Pi: return "pi";
    case K::Scalar: return e.name;
    case K::Index: return render_int(e.index);
    case K::Seq: return e.name + "[" + render_int(e.index) + "]";
    case K::Func: return e.name + "(" + render_coeff(e.args[0]) + ")";
    case K::Add: return coeff_atom(e.args[0]) + " + " + coeff_atom(e.args[1]);
    case K::Sub: return coeff_atom(e.args[0]) + " - " + coeff_atom(e.args[1]);
    case K::Mul: return coeff_atom(e.args[0]) + " * " + coeff_atom(e.args[1]);
    case K::Div: return coeff_atom(e.args[0]) + " / " + coeff_atom(e.args[1]);
    }
    return "";
}

std::string render_constraints(const std::vector<Constraint>& cs, const RecurrenceSpec&) {
    std::string out;
    for (std::size_t k = 0; k < cs.size(); ++k) {
        if (k) out += " && ";
        out += render_int(cs[k].lhs) + " " + std::string(compare_op_text(cs[k].op)) + " " + render_int(cs[k].rhs);
    }
    return out;
}

std::string render_sum(const Sum& sum, const RecurrenceSpec& spec) {
    std::string out;
    for (std::size_t k = 0; k < sum.terms.size(); ++k) {
        const Term& t = sum.terms[k];
        if (k) out += " + ";
        if (!t.call) {
            out += coeff_atom(t.coefficient);
            continue;
        }
        if (!t.coefficient.is_literal(1.0)) out += coeff_atom(t.coefficient) + " * ";
        out += "E[";
        for (std::size_t i = 0; i < spec.indices.size(); ++i) {
            if (i) out += ",";
            out += spec.indices[i];
            const int s = t.call->shifts[i];
            if (s > 0) out += "+" + std::to_string(s);
            if (s < 0) out += "-" + std::to_string(-s);
        }
        out += "]";
    }
    return out;
}

std::string render_spec(const RecurrenceSpec& spec) {
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + v[k];
        return s;
    };
    std::string out;
    out += "recurrence " + spec.name + "\n";
    if (!spec.ns.empty()) out += "namespace " + spec.ns + "\n";
    out += "indices " + join(spec.indices) + "\n";
    if (!spec.scalars.empty()) out += "scalars " + join(spec.scalars) + "\n";
    if (!spec.sequences.empty()) out += "sequences " + join(spec.sequences) + "\n";
    if (!spec.validity.empty()) out += "validity " + render_constraints(spec.validity, spec) + "\n";
    for (const BaseCase& b : spec.bases) {
        out += "base";
        for (std::size_t k = 0; k < spec.indices.size(); ++k) {
            out += " " + spec.indices[k] + "=" + std::to_string(b.assignment[k]);
        }
        out += " : " + render_coeff(b.value) + "\n";
    }
    for (const Rule& r : spec.rules) {
        const bool avg = r.body.kind == RuleBody::Kind::BranchAverage;
        out += std::string(avg ? "average" : "rule") + " \"" + r.name + "\"";
        if (!r.guards.empty()) out += " when " + render_constraints(r.guards, spec);
        out += " : ";
        for (std::size_t b = 0; b < r.body.branches.size(); ++b) {
            if (b) out += " | ";
            out += render_sum(r.body.branches[b], spec);
        }
        if (r.body.scale) out += " scale " + render_coeff(*r.body.scale);
        out += "\n";
    }
    if (spec.layered) {
        out += "layered axis " + spec.layered->output_axis + " descend " + join(spec.layered->descent_indices) + "\n";
    }
    if (spec.direction != Direction::Unspecified) out += "direction " + std::string(direction_text(spec.direction)) + "\n";
    return out;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_reserved_name(std::string_view s) {
    static constexpr std::array<std::string_view, 8> reserved = {"E", "pi", "sqrt", "exp", "erf", "and", "scale", "when"};
    return std::find(reserved.begin(), reserved.end(), s) != reserved.end();
}

}  // namespace recursum
