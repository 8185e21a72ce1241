#include "recursum/spec.hpp"

#include "recursum/error.hpp"

#include <algorithm>

namespace recursum {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::SyntaxError: return "SYNTAX_ERROR";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::UndeclaredSymbol: return "UNDECLARED_SYMBOL";
    case ErrorCode::MalformedShift: return "MALFORMED_SHIFT";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
    case ErrorCode::NoApplicableRule: return "NO_APPLICABLE_RULE";
    case ErrorCode::DivisionByZero: return "DIVISION_BY_ZERO";
    case ErrorCode::SequenceOutOfRange: return "SEQUENCE_OUT_OF_RANGE";
    case ErrorCode::CycleDetected: return "CYCLE_DETECTED";
    case ErrorCode::MissingBinding: return "MISSING_BINDING";
    case ErrorCode::NotLayerDescent: return "NOT_LAYER_DESCENT";
    case ErrorCode::BoundsTooLarge: return "BOUNDS_TOO_LARGE";
    case ErrorCode::TableBoundExceeded: return "TABLE_BOUND_EXCEEDED";
    case ErrorCode::UnsupportedConstruct: return "UNSUPPORTED_CONSTRUCT";
    case ErrorCode::UnknownBuiltin: return "UNKNOWN_BUILTIN";
    case ErrorCode::NoOracle: return "NO_ORACLE";
    case ErrorCode::DomainError: return "DOMAIN_ERROR";
    case ErrorCode::NegativeUnderRoot: return "NEGATIVE_UNDER_ROOT";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::IoError: return "IO_ERROR";
    }
    return "UNKNOWN";
}

IntExpr IntExpr::literal(std::int64_t v) {
    IntExpr e;
    e.kind = Kind::Literal;
    e.value = v;
    return e;
}

IntExpr IntExpr::symbol_ref(std::string name, int slot) {
    IntExpr e;
    e.kind = Kind::Symbol;
    e.symbol = std::move(name);
    e.slot = slot;
    return e;
}

IntExpr IntExpr::binary(Kind op, IntExpr lhs, IntExpr rhs) {
    IntExpr e;
    e.kind = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

CoeffExpr CoeffExpr::literal(double v) {
    CoeffExpr e;
    e.kind = Kind::Literal;
    e.value = v;
    return e;
}

CoeffExpr CoeffExpr::pi() {
    CoeffExpr e;
    e.kind = Kind::Pi;
    return e;
}

CoeffExpr CoeffExpr::scalar(std::string name, int slot) {
    CoeffExpr e;
    e.kind = Kind::Scalar;
    e.name = std::move(name);
    e.slot = slot;
    return e;
}

CoeffExpr CoeffExpr::index_coeff(IntExpr ie) {
    CoeffExpr e;
    e.kind = Kind::Index;
    e.index = std::move(ie);
    return e;
}

CoeffExpr CoeffExpr::seq(std::string name, int slot, IntExpr subscript) {
    CoeffExpr e;
    e.kind = Kind::Seq;
    e.name = std::move(name);
    e.slot = slot;
    e.index = std::move(subscript);
    return e;
}

CoeffExpr CoeffExpr::func(std::string name, CoeffExpr arg) {
    CoeffExpr e;
    e.kind = Kind::Func;
    e.name = std::move(name);
    e.args.push_back(std::move(arg));
    return e;
}

CoeffExpr CoeffExpr::binary(Kind op, CoeffExpr lhs, CoeffExpr rhs) {
    CoeffExpr e;
    e.kind = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

namespace {

int position(const std::vector<std::string>& names, const std::string& symbol) {
    auto it = std::find(names.begin(), names.end(), symbol);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

}  // namespace

int RecurrenceSpec::index_of(const std::string& symbol) const { return position(indices, symbol); }
int RecurrenceSpec::scalar_of(const std::string& symbol) const { return position(scalars, symbol); }
int RecurrenceSpec::sequence_of(const std::string& symbol) const { return position(sequences, symbol); }

std::int64_t eval_int(const IntExpr& e, const IndexPoint& point) {
    switch (e.kind) {
    case IntExpr::Kind::Literal: return e.value;
    case IntExpr::Kind::Symbol: return point.at(static_cast<std::size_t>(e.slot));
    case IntExpr::Kind::Add: return eval_int(e.args[0], point) + eval_int(e.args[1], point);
    case IntExpr::Kind::Sub: return eval_int(e.args[0], point) - eval_int(e.args[1], point);
    case IntExpr::Kind::Mul: return eval_int(e.args[0], point) * eval_int(e.args[1], point);
    }
    return 0;
}

bool eval_constraint(const Constraint& c, const IndexPoint& point) {
    const std::int64_t a = eval_int(c.lhs, point);
    const std::int64_t b = eval_int(c.rhs, point);
    switch (c.op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
    }
    return false;
}

bool all_hold(const std::vector<Constraint>& cs, const IndexPoint& point) {
    return std::all_of(cs.begin(), cs.end(), [&](const Constraint& c) { return eval_constraint(c, point); });
}

bool in_domain(const RecurrenceSpec& spec, const IndexPoint& point) {
    return all_hold(spec.validity, point);
}

IndexPoint shifted(const IndexPoint& point, const RecCall& call) {
    IndexPoint out = point;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += call.shifts[k];
    return out;
}

std::string_view compare_op_text(CompareOp op) {
    switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    }
    return "?";
}

std::string_view direction_text(Direction d) {
    switch (d) {
    case Direction::Unspecified: return "unspecified";
    case Direction::Upward: return "upward";
    case Direction::Downward: return "downward";
    }
    return "unspecified";
}

}  // namespace recursum
