#pragma once

// Backend-neutral kernel IR. Straight bodies are three-address code over
// single-assignment locals; the runtime backend keeps the spec and is
// rendered as a table-filling loop.

#include "recursum/interp.hpp"
#include "recursum/spec.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace recursum::codegen {

/// Upper limit on the sum of a subset of indices.
struct Cap {
    std::vector<int> slots;
    std::int64_t limit = 0;

    bool operator==(const Cap&) const = default;
};

/// Inclusive per-index upper limits (lower limit 0) plus optional sum caps.
struct Bounds {
    std::vector<std::int64_t> upper;
    std::vector<Cap> caps;

    bool contains(const IndexPoint& p) const;
    /// Every index limited to n, no caps.
    static Bounds box(const RecurrenceSpec& spec, std::int64_t n);

    bool operator==(const Bounds&) const = default;
};

enum class Backend { Unrolled, Layered, Runtime };
std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);  // throws UnsupportedConstruct

enum class Op { Copy, Add, Sub, Mul, Div, Neg, Sqrt, Exp, Erf };

struct Operand {
    enum class Kind { Const, Param, SeqLoad, Local, RegionRead };
    Kind kind = Kind::Const;
    double value = 0.0;      // Const
    int id = 0;              // scalar slot, sequence slot, local or region number
    std::int64_t index = 0;  // SeqLoad / RegionRead element

    static Operand constant(double v) { return {Kind::Const, v, 0, 0}; }
    static Operand param(int slot) { return {Kind::Param, 0.0, slot, 0}; }
    static Operand seq_load(int slot, std::int64_t k) { return {Kind::SeqLoad, 0.0, slot, k}; }
    static Operand local(int id) { return {Kind::Local, 0.0, id, 0}; }
    static Operand region_read(int region, std::int64_t k) { return {Kind::RegionRead, 0.0, region, k}; }

    bool is_const(double v) const { return kind == Kind::Const && value == v; }
    bool operator==(const Operand&) const = default;
};

struct Stmt {
    enum class Kind { Assign, StoreOut, CallLayer, Return };
    Kind kind = Kind::Assign;
    Op op = Op::Copy;          // Assign
    int dst = -1;              // Assign: local id
    std::vector<Operand> args; // Assign operands; StoreOut / Return value
    std::int64_t index = 0;    // StoreOut element
    int callee = -1;           // CallLayer: function index in the KernelIR
    int region = -1;           // CallLayer: region receiving the callee output
};

struct Region {
    std::int64_t length = 0;
};

struct StraightBody {
    std::vector<Stmt> stmts;
    int num_locals = 0;
    std::vector<Region> regions;
};

/// Dense-table dynamic programming over a caller bound; filled in descending
/// lexicographic order when `descending`.
struct RuntimeBody {
    bool descending = false;
};

enum class OutputKind { Scalar, Region };

struct Function {
    std::string name;
    IndexPoint tuple;  // full point (unrolled) or descent tuple (layered); empty for runtime
    OutputKind output = OutputKind::Scalar;
    std::int64_t output_length = 1;
    bool inline_hint = false;
    std::vector<int> calls;
    std::variant<StraightBody, RuntimeBody> body;
    std::vector<std::int64_t> min_seq_len;  // per sequence, elements read
};

/// Parameters of every function are the spec's scalars then its sequences.
struct KernelIR {
    RecurrenceSpec spec;
    Backend backend = Backend::Unrolled;
    Bounds bounds;
    std::vector<Function> functions;

    int find(const IndexPoint& tuple) const;  // -1 when absent
};

struct OpCount {
    std::int64_t adds = 0;
    std::int64_t muls = 0;
    std::int64_t divs = 0;
    std::int64_t loads = 0;
    std::int64_t stores = 0;
    std::int64_t funcs = 0;

    std::int64_t arithmetic() const { return adds + muls + divs + funcs; }
    OpCount& operator+=(const OpCount& o);
    bool operator==(const OpCount&) const = default;
};

struct GenOptions {
    std::size_t max_instances = 10000;
};

/// Valid points inside the bounds, in lexicographic order.
std::vector<IndexPoint> enumerate_instances(const RecurrenceSpec& spec, const Bounds& bounds);

/// Descent tuples of a layered spec whose layer meets the domain inside the bounds.
std::vector<IndexPoint> enumerate_layers(const RecurrenceSpec& spec, const Bounds& bounds);

KernelIR lower_unrolled(const RecurrenceSpec& spec, const Bounds& bounds, const GenOptions& opts = {});
KernelIR lower_layered(const RecurrenceSpec& spec, const Bounds& bounds, const GenOptions& opts = {});
KernelIR lower_runtime(const RecurrenceSpec& spec);

/// Ops of one straight-line function. For layered IR the count covers the
/// function and every function it transitively calls, each once.
OpCount count_ops(const KernelIR& ir, int function);

/// Structural checks: single assignment, in-range region writes, no
/// recursion. Returns the first violation or an empty string.
std::string check_ir(const KernelIR& ir);

/// Snake-case form of a recurrence name (HermiteCoeffX -> hermite_coeff_x).
std::string snake_case(std::string_view name);

// ---------------------------------------------------------------------------
// IR execution, used for validating specs that have no compiled kernels.

double run_scalar(const KernelIR& ir, int function, const BoundEnv& env);
void run_layer(const KernelIR& ir, int function, const BoundEnv& env, double* out);

enum class RuntimeStatus { Ok = 0, TableBoundExceeded = 1, NoRule = 2, SequenceOutOfRange = 3 };

struct RuntimeResult {
    RuntimeStatus status = RuntimeStatus::Ok;
    double value = 0.0;
    OpCount ops;  // arithmetic actually performed while filling the table
};

/// Reference implementation of the generated runtime kernel.
RuntimeResult run_runtime(const KernelIR& ir, const IndexPoint& idx, const std::vector<std::int64_t>& bound,
                          const BoundEnv& env);

}  // namespace recursum::codegen
