#pragma once

// Data model for declarative recurrence specifications.
//
// All types are plain values: trees are held by value in std::vector children
// so that structural equality is the defaulted operator==.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace recursum {

/// Integer arithmetic over index symbols: literal | symbol | a (+|-|*) b.
struct IntExpr {
    enum class Kind { Literal, Symbol, Add, Sub, Mul };

    Kind kind = Kind::Literal;
    std::int64_t value = 0;
    std::string symbol;
    int slot = -1;  // position of `symbol` among the spec's indices
    std::vector<IntExpr> args;

    static IntExpr literal(std::int64_t v);
    static IntExpr symbol_ref(std::string name, int slot);
    static IntExpr binary(Kind op, IntExpr lhs, IntExpr rhs);

    bool operator==(const IntExpr&) const = default;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Constraint {
    IntExpr lhs;
    CompareOp op = CompareOp::Eq;
    IntExpr rhs;

    bool operator==(const Constraint&) const = default;
};

/// Real-valued coefficient expression. Index-only subtrees are collapsed into
/// a single `Index` node holding an IntExpr.
struct CoeffExpr {
    enum class Kind { Literal, Pi, Scalar, Index, Seq, Func, Add, Sub, Mul, Div };

    Kind kind = Kind::Literal;
    double value = 0.0;
    std::string name;  // scalar, sequence or function name
    int slot = -1;     // position among the spec's scalars or sequences
    IntExpr index;     // Index payload, or Seq subscript
    std::vector<CoeffExpr> args;

    static CoeffExpr literal(double v);
    static CoeffExpr pi();
    static CoeffExpr scalar(std::string name, int slot);
    static CoeffExpr index_coeff(IntExpr e);
    static CoeffExpr seq(std::string name, int slot, IntExpr subscript);
    static CoeffExpr func(std::string name, CoeffExpr arg);
    static CoeffExpr binary(Kind op, CoeffExpr lhs, CoeffExpr rhs);

    bool is_literal(double v) const { return kind == Kind::Literal && value == v; }

    bool operator==(const CoeffExpr&) const = default;
};

/// Self-reference with constant per-index offsets, in declared index order.
struct RecCall {
    std::vector<int> shifts;

    bool operator==(const RecCall&) const = default;
};

struct Term {
    CoeffExpr coefficient;
    std::optional<RecCall> call;

    bool operator==(const Term&) const = default;
};

struct Sum {
    std::vector<Term> terms;

    bool operator==(const Sum&) const = default;
};

struct RuleBody {
    enum class Kind { Single, BranchAverage };

    Kind kind = Kind::Single;
    std::vector<Sum> branches;       // exactly one for Single
    std::optional<CoeffExpr> scale;  // Single only; multiplies the sum

    bool operator==(const RuleBody&) const = default;
};

struct Rule {
    std::string name;
    std::vector<Constraint> guards;
    RuleBody body;

    bool operator==(const Rule&) const = default;
};

struct BaseCase {
    std::vector<std::int64_t> assignment;  // one value per declared index
    CoeffExpr value;

    bool operator==(const BaseCase&) const = default;
};

struct LayeredAnnotation {
    std::string output_axis;
    std::vector<std::string> descent_indices;

    bool operator==(const LayeredAnnotation&) const = default;
};

enum class Direction { Unspecified, Upward, Downward };

struct RecurrenceSpec {
    std::string name;
    std::string ns;
    std::vector<std::string> indices;
    std::vector<std::string> scalars;
    std::vector<std::string> sequences;
    std::vector<Constraint> validity;
    std::vector<BaseCase> bases;
    std::vector<Rule> rules;
    std::optional<LayeredAnnotation> layered;
    Direction direction = Direction::Unspecified;

    int index_of(const std::string& symbol) const;  // -1 when absent
    int scalar_of(const std::string& symbol) const;
    int sequence_of(const std::string& symbol) const;
    std::size_t arity() const { return indices.size(); }

    bool operator==(const RecurrenceSpec&) const = default;
};

/// Integer assignment for every index of a spec, in declared order.
using IndexPoint = std::vector<std::int64_t>;

struct Diagnostic {
    std::string code;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

// Evaluation helpers shared by the interpreter and the generators.
std::int64_t eval_int(const IntExpr& e, const IndexPoint& point);
bool eval_constraint(const Constraint& c, const IndexPoint& point);
bool all_hold(const std::vector<Constraint>& cs, const IndexPoint& point);
bool in_domain(const RecurrenceSpec& spec, const IndexPoint& point);

IndexPoint shifted(const IndexPoint& point, const RecCall& call);

std::string_view compare_op_text(CompareOp op);
std::string_view direction_text(Direction d);

}  // namespace recursum
