#include "recursum/codegen/ir.hpp"

#include "recursum/error.hpp"
#include "recursum/parse.hpp"
#include "recursum/validate.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

namespace recursum::codegen {

bool Bounds::contains(const IndexPoint& p) const {
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < 0 || (k < upper.size() && p[k] > upper[k])) return false;
    }
    for (const Cap& c : caps) {
        std::int64_t s = 0;
        for (int slot : c.slots) s += p[static_cast<std::size_t>(slot)];
        if (s > c.limit) return false;
    }
    return true;
}

Bounds Bounds::box(const RecurrenceSpec& spec, std::int64_t n) {
    Bounds b;
    b.upper.assign(spec.indices.size(), n);
    return b;
}

std::string_view backend_name(Backend b) {
    switch (b) {
    case Backend::Unrolled: return "unrolled";
    case Backend::Layered: return "layered";
    case Backend::Runtime: return "runtime";
    }
    return "unrolled";
}

Backend parse_backend(std::string_view name) {
    if (name == "unrolled") return Backend::Unrolled;
    if (name == "layered") return Backend::Layered;
    if (name == "runtime") return Backend::Runtime;
    fail(ErrorCode::UnsupportedConstruct, "unknown backend '" + std::string(name) + "'");
}

int KernelIR::find(const IndexPoint& tuple) const {
    for (std::size_t k = 0; k < functions.size(); ++k) {
        if (functions[k].tuple == tuple) return static_cast<int>(k);
    }
    return -1;
}

OpCount& OpCount::operator+=(const OpCount& o) {
    adds += o.adds;
    muls += o.muls;
    divs += o.divs;
    loads += o.loads;
    stores += o.stores;
    funcs += o.funcs;
    return *this;
}

std::string snake_case(std::string_view name) {
    std::string out;
    for (std::size_t k = 0; k < name.size(); ++k) {
        const auto c = static_cast<unsigned char>(name[k]);
        if (std::isupper(c)) {
            const bool prev_lower = k > 0 && (std::islower(static_cast<unsigned char>(name[k - 1])) ||
                                              std::isdigit(static_cast<unsigned char>(name[k - 1])));
            const bool next_lower = k + 1 < name.size() && std::islower(static_cast<unsigned char>(name[k + 1]));
            const bool prev_upper = k > 0 && std::isupper(static_cast<unsigned char>(name[k - 1]));
            if (!out.empty() && out.back() != '_' && (prev_lower || (prev_upper && next_lower))) out += '_';
            out += static_cast<char>(std::tolower(c));
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

namespace {

void iterate_box(const std::vector<std::int64_t>& upper, const std::function<void(const IndexPoint&)>& visit) {
    const std::size_t k = upper.size();
    for (std::int64_t u : upper) {
        if (u < 0) return;
    }
    IndexPoint p(k, 0);
    while (true) {
        visit(p);
        std::size_t d = k;
        while (d > 0) {
            --d;
            if (p[d] < upper[d]) {
                ++p[d];
                break;
            }
            p[d] = 0;
            if (d == 0) return;
        }
        if (k == 0) return;
    }
}

void require_valid(const RecurrenceSpec& spec) {
    const auto diags = validate_spec(spec);
    if (diags.empty()) return;
    std::string msg = "spec '" + spec.name + "' does not validate:";
    for (const Diagnostic& d : diags) msg += "\n  " + d.code + ": " + d.message;
    fail(ErrorCode::ValidationError, msg);
}

bool has_runtime_input(const CoeffExpr& e) {
    if (e.kind == CoeffExpr::Kind::Scalar || e.kind == CoeffExpr::Kind::Seq) return true;
    return std::any_of(e.args.begin(), e.args.end(), has_runtime_input);
}

std::string point_text(const IndexPoint& p) {
    std::string s = "(";
    for (std::size_t k = 0; k < p.size(); ++k) s += (k ? "," : "") + std::to_string(p[k]);
    return s + ")";
}

using Value = std::optional<Operand>;  // nullopt: exactly zero, term dropped
using Resolver = std::function<Value(const IndexPoint&)>;

// Emits three-address code for one function with value numbering.
class BodyBuilder {
public:
    BodyBuilder(const RecurrenceSpec& spec, const std::vector<Rule>& ordered, std::vector<std::int64_t>& min_seq)
        : spec_(spec), ordered_(ordered), min_seq_(min_seq) {}

    StraightBody body;

    Operand emit(Op op, std::vector<Operand> args) {
        Key key{static_cast<int>(op), {}};
        for (const Operand& a : args) {
            key.second.emplace_back(static_cast<int>(a.kind), std::bit_cast<std::uint64_t>(a.value), a.id, a.index);
        }
        if (auto it = numbering_.find(key); it != numbering_.end()) return Operand::local(it->second);
        Stmt s;
        s.kind = Stmt::Kind::Assign;
        s.op = op;
        s.dst = body.num_locals++;
        s.args = std::move(args);
        body.stmts.push_back(std::move(s));
        numbering_.emplace(std::move(key), body.stmts.back().dst);
        return Operand::local(body.stmts.back().dst);
    }

    Operand coeff(const CoeffExpr& e, const IndexPoint& p) {
        using K = CoeffExpr::Kind;
        if (!has_runtime_input(e)) {
            try {
                return Operand::constant(eval_coeff(e, p, BoundEnv{}));
            } catch (const Error& err) {
                fail(err.code(), std::string(err.what()) + " at " + spec_.name + point_text(p));
            }
        }
        switch (e.kind) {
        case K::Scalar: return Operand::param(e.slot);
        case K::Seq: {
            const std::int64_t k = eval_int(e.index, p);
            if (k < 0) fail(ErrorCode::SequenceOutOfRange, e.name + "[" + std::to_string(k) + "] read at " + point_text(p));
            auto& m = min_seq_[static_cast<std::size_t>(e.slot)];
            m = std::max(m, k + 1);
            return Operand::seq_load(e.slot, k);
        }
        case K::Func: {
            const Op op = e.name == "sqrt" ? Op::Sqrt : e.name == "exp" ? Op::Exp : Op::Erf;
            return emit(op, {coeff(e.args[0], p)});
        }
        case K::Add: return emit(Op::Add, {coeff(e.args[0], p), coeff(e.args[1], p)});
        case K::Sub: return emit(Op::Sub, {coeff(e.args[0], p), coeff(e.args[1], p)});
        case K::Mul: return emit(Op::Mul, {coeff(e.args[0], p), coeff(e.args[1], p)});
        case K::Div: {
            Operand a = coeff(e.args[0], p);
            Operand b = coeff(e.args[1], p);
            if (b.is_const(0.0)) fail(ErrorCode::DivisionByZero, "constant division by zero at " + point_text(p));
            return emit(Op::Div, {a, b});
        }
        default: break;
        }
        fail(ErrorCode::UnsupportedConstruct, "cannot lower coefficient");
    }

    // Value of the recurrence at `p`, reading recursive references through `resolve`.
    Value lower_point(const IndexPoint& p, const Resolver& resolve) {
        const Selection sel = select_rule(spec_, ordered_, p);
        switch (sel.kind) {
        case Selection::Kind::OutOfDomain: return std::nullopt;
        case Selection::Kind::Base: return coeff(sel.base->value, p);
        case Selection::Kind::NoRule:
            fail(ErrorCode::NoApplicableRule, "no base case or rule applies at " + spec_.name + point_text(p));
        case Selection::Kind::Matched: break;
        }
        const RuleBody& rb = sel.rule->body;
        if (rb.kind == RuleBody::Kind::Single) {
            Value s = lower_sum(rb.branches[0], p, resolve);
            if (!s || !rb.scale) return s;
            const CoeffExpr& sc = *rb.scale;
            if (sc.kind == CoeffExpr::Kind::Div && sc.args[0].is_literal(1.0)) {
                Operand d = coeff(sc.args[1], p);
                if (d.is_const(0.0)) fail(ErrorCode::DivisionByZero, "rule scale divides by zero at " + point_text(p));
                return emit(Op::Div, {*s, d});
            }
            Operand f = coeff(sc, p);
            if (f.is_const(0.0)) return std::nullopt;
            if (f.is_const(1.0)) return s;
            return emit(Op::Mul, {*s, f});
        }
        Value acc;
        for (const Sum& branch : rb.branches) {
            Value b = lower_sum(branch, p, resolve);
            if (!b) continue;
            acc = acc ? emit(Op::Add, {*acc, *b}) : *b;
        }
        if (!acc) return std::nullopt;
        return emit(Op::Mul, {*acc, Operand::constant(1.0 / static_cast<double>(rb.branches.size()))});
    }

private:
    using Key = std::pair<int, std::vector<std::tuple<int, std::uint64_t, int, std::int64_t>>>;

    Value lower_sum(const Sum& sum, const IndexPoint& p, const Resolver& resolve) {
        Value acc;
        for (const Term& t : sum.terms) {
            Operand term;
            bool negate = false;
            if (!t.call) {
                term = coeff(t.coefficient, p);
                if (term.is_const(0.0)) continue;
            } else {
                const IndexPoint target = shifted(p, *t.call);
                if (!in_domain(spec_, target)) continue;
                const Operand c = coeff(t.coefficient, p);
                if (c.is_const(0.0)) continue;
                const Value v = resolve(target);
                if (!v) continue;
                // An in-domain zero is still added when no multiply is involved.
                if (v->is_const(0.0) && !c.is_const(1.0)) continue;
                if (c.is_const(1.0)) {
                    term = *v;
                } else if (v->is_const(1.0)) {
                    term = c;
                } else if (c.is_const(-1.0)) {
                    term = *v;
                    negate = true;
                } else {
                    term = emit(Op::Mul, {c, *v});
                }
            }
            if (!acc) {
                if (!negate) {
                    acc = term;
                } else if (term.kind == Operand::Kind::Const) {
                    acc = Operand::constant(-term.value);
                } else {
                    acc = emit(Op::Neg, {term});
                }
            } else {
                acc = emit(negate ? Op::Sub : Op::Add, {*acc, term});
            }
        }
        return acc;
    }

    const RecurrenceSpec& spec_;
    const std::vector<Rule>& ordered_;
    std::vector<std::int64_t>& min_seq_;
    std::map<Key, int> numbering_;
};

// Drops assignments nothing reads (coefficients of terms folded away after
// the coefficient was built), renumbers locals densely and recomputes the
// sequence lengths the surviving loads need.
void eliminate_dead(StraightBody& body, std::vector<std::int64_t>& min_seq) {
    std::vector<bool> live(static_cast<std::size_t>(body.num_locals), false);
    auto mark = [&](const std::vector<Operand>& args) {
        for (const Operand& a : args) {
            if (a.kind == Operand::Kind::Local) live[static_cast<std::size_t>(a.id)] = true;
        }
    };
    for (auto it = body.stmts.rbegin(); it != body.stmts.rend(); ++it) {
        if (it->kind != Stmt::Kind::Assign || live[static_cast<std::size_t>(it->dst)]) mark(it->args);
    }
    std::vector<int> renumber(static_cast<std::size_t>(body.num_locals), -1);
    std::vector<Stmt> kept;
    int next = 0;
    std::fill(min_seq.begin(), min_seq.end(), 0);
    for (Stmt& st : body.stmts) {
        if (st.kind == Stmt::Kind::Assign) {
            if (!live[static_cast<std::size_t>(st.dst)]) continue;
            renumber[static_cast<std::size_t>(st.dst)] = next;
            st.dst = next++;
        }
        for (Operand& a : st.args) {
            if (a.kind == Operand::Kind::Local) a.id = renumber[static_cast<std::size_t>(a.id)];
            if (a.kind == Operand::Kind::SeqLoad) {
                auto& m = min_seq[static_cast<std::size_t>(a.id)];
                m = std::max(m, a.index + 1);
            }
        }
        kept.push_back(std::move(st));
    }
    body.stmts = std::move(kept);
    body.num_locals = next;
}

std::string tuple_suffix(const IndexPoint& p) {
    std::string s;
    for (std::int64_t v : p) s += "_" + std::to_string(v);
    return s;
}

}  // namespace

std::vector<IndexPoint> enumerate_instances(const RecurrenceSpec& spec, const Bounds& bounds) {
    std::vector<IndexPoint> out;
    std::vector<std::int64_t> upper = bounds.upper;
    upper.resize(spec.indices.size(), 0);
    iterate_box(upper, [&](const IndexPoint& p) {
        if (bounds.contains(p) && in_domain(spec, p)) out.push_back(p);
    });
    return out;
}

std::vector<IndexPoint> enumerate_layers(const RecurrenceSpec& spec, const Bounds& bounds) {
    if (!spec.layered) fail(ErrorCode::NotLayerDescent, spec.name + ": not layer-descent (no layered annotation)");
    const LayeredAnnotation& la = *spec.layered;
    const auto axis = static_cast<std::size_t>(spec.index_of(la.output_axis));
    std::vector<std::size_t> slots;
    std::vector<std::int64_t> upper;
    for (const std::string& d : la.descent_indices) {
        slots.push_back(static_cast<std::size_t>(spec.index_of(d)));
        upper.push_back(slots.back() < bounds.upper.size() ? bounds.upper[slots.back()] : 0);
    }
    std::vector<IndexPoint> out;
    iterate_box(upper, [&](const IndexPoint& d) {
        IndexPoint p(spec.indices.size(), 0);
        std::int64_t total = 0;
        for (std::size_t k = 0; k < slots.size(); ++k) {
            p[slots[k]] = d[k];
            total += d[k];
        }
        Bounds descent_only = bounds;
        if (axis < descent_only.upper.size()) descent_only.upper[axis] = 0;
        if (!descent_only.contains(p)) return;
        for (std::int64_t t = 0; t <= total; ++t) {
            p[axis] = t;
            if (in_domain(spec, p)) {
                out.push_back(d);
                return;
            }
        }
    });
    std::stable_sort(out.begin(), out.end(), [](const IndexPoint& a, const IndexPoint& b) {
        return std::accumulate(a.begin(), a.end(), std::int64_t{0}) < std::accumulate(b.begin(), b.end(), std::int64_t{0});
    });
    return out;
}

KernelIR lower_unrolled(const RecurrenceSpec& spec, const Bounds& bounds, const GenOptions& opts) {
    require_valid(spec);
    KernelIR ir;
    ir.spec = spec;
    ir.backend = Backend::Unrolled;
    ir.bounds = bounds;
    const auto points = enumerate_instances(spec, bounds);
    if (points.size() > opts.max_instances) {
        fail(ErrorCode::BoundsTooLarge, std::to_string(points.size()) + " instances exceed the cap of " +
                                            std::to_string(opts.max_instances));
    }
    const std::vector<Rule> ordered = order_rules(spec);
    const std::string stem = snake_case(spec.name);
    for (const IndexPoint& p : points) {
        Function f;
        f.name = stem + tuple_suffix(p);
        f.tuple = p;
        f.output = OutputKind::Scalar;
        f.output_length = 1;
        f.min_seq_len.assign(spec.sequences.size(), 0);
        BodyBuilder b(spec, ordered, f.min_seq_len);
        std::map<IndexPoint, Value> memo;
        std::set<IndexPoint> active;
        Resolver resolve = [&](const IndexPoint& q) -> Value {
            if (auto it = memo.find(q); it != memo.end()) return it->second;
            if (!active.insert(q).second) fail(ErrorCode::CycleDetected, spec.name + point_text(q) + " depends on itself");
            if (active.size() > 4000) fail(ErrorCode::CycleDetected, "recursion does not terminate at " + point_text(q));
            Value v = b.lower_point(q, resolve);
            active.erase(q);
            memo.emplace(q, v);
            return v;
        };
        const Value result = resolve(p);
        Stmt ret;
        ret.kind = Stmt::Kind::Return;
        ret.args.push_back(result.value_or(Operand::constant(0.0)));
        b.body.stmts.push_back(std::move(ret));
        eliminate_dead(b.body, f.min_seq_len);
        f.body = std::move(b.body);
        ir.functions.push_back(std::move(f));
    }
    return ir;
}

KernelIR lower_layered(const RecurrenceSpec& spec, const Bounds& bounds, const GenOptions& opts) {
    if (!spec.layered) fail(ErrorCode::NotLayerDescent, spec.name + " is not layer-descent: no layered annotation");
    for (const Diagnostic& d : validate_spec(spec)) {
        if (d.code == "not layer-descent" || d.code == "bad-layered") {
            fail(ErrorCode::NotLayerDescent, spec.name + " is not layer-descent: " + d.message);
        }
    }
    require_valid(spec);
    KernelIR ir;
    ir.spec = spec;
    ir.backend = Backend::Layered;
    ir.bounds = bounds;
    const auto layers = enumerate_layers(spec, bounds);
    if (layers.size() > opts.max_instances) {
        fail(ErrorCode::BoundsTooLarge, std::to_string(layers.size()) + " layers exceed the cap of " +
                                            std::to_string(opts.max_instances));
    }
    const LayeredAnnotation& la = *spec.layered;
    const auto axis = static_cast<std::size_t>(spec.index_of(la.output_axis));
    std::vector<std::size_t> slots;
    for (const std::string& d : la.descent_indices) slots.push_back(static_cast<std::size_t>(spec.index_of(d)));
    const std::vector<Rule> ordered = order_rules(spec);
    const std::string stem = snake_case(spec.name) + "_layer";

    std::map<IndexPoint, int> index_of_layer;
    for (const IndexPoint& d : layers) {
        const std::int64_t total = std::accumulate(d.begin(), d.end(), std::int64_t{0});
        Function f;
        f.name = stem + tuple_suffix(d);
        f.tuple = d;
        f.output = OutputKind::Region;
        f.output_length = total + 1;
        f.inline_hint = true;
        f.min_seq_len.assign(spec.sequences.size(), 0);
        BodyBuilder b(spec, ordered, f.min_seq_len);

        std::optional<IndexPoint> pred;
        std::int64_t pred_len = 0;
        Resolver resolve = [&](const IndexPoint& q) -> Value {
            IndexPoint qd;
            for (std::size_t s : slots) qd.push_back(q[s]);
            if (qd == d) {
                fail(ErrorCode::NotLayerDescent, spec.name + ": reference to the same layer at " + point_text(q));
            }
            if (pred && *pred != qd) {
                fail(ErrorCode::NotLayerDescent, spec.name + ": layer " + point_text(d) + " reads layers " +
                                                     point_text(*pred) + " and " + point_text(qd));
            }
            if (!pred) {
                pred = qd;
                pred_len = std::accumulate(qd.begin(), qd.end(), std::int64_t{0}) + 1;
            }
            const std::int64_t t = q[axis];
            if (t < 0 || t >= pred_len) {
                fail(ErrorCode::NotLayerDescent, spec.name + ": " + point_text(q) + " lies outside its layer");
            }
            // A predecessor element that is a literal or a bare parameter is
            // used directly instead of being read back from the layer.
            if (auto it = index_of_layer.find(qd); it != index_of_layer.end()) {
                const auto& callee = std::get<StraightBody>(ir.functions[static_cast<std::size_t>(it->second)].body);
                for (const Stmt& st : callee.stmts) {
                    if (st.kind != Stmt::Kind::StoreOut || st.index != t) continue;
                    const Operand& v = st.args[0];
                    if (v.kind == Operand::Kind::Const || v.kind == Operand::Kind::Param) return v;
                }
            }
            if (b.body.regions.empty()) b.body.regions.push_back(Region{pred_len});
            return Operand::region_read(0, t);
        };

        IndexPoint p(spec.indices.size(), 0);
        for (std::size_t k = 0; k < slots.size(); ++k) p[slots[k]] = d[k];
        for (std::int64_t t = 0; t <= total; ++t) {
            p[axis] = t;
            const Value v = b.lower_point(p, resolve);
            Stmt st;
            st.kind = Stmt::Kind::StoreOut;
            st.index = t;
            st.args.push_back(v.value_or(Operand::constant(0.0)));
            b.body.stmts.push_back(std::move(st));
        }
        if (pred && !b.body.regions.empty()) {
            auto it = index_of_layer.find(*pred);
            if (it == index_of_layer.end()) {
                fail(ErrorCode::NotLayerDescent, spec.name + ": predecessor layer " + point_text(*pred) +
                                                     " of " + point_text(d) + " is not generated");
            }
            Stmt call;
            call.kind = Stmt::Kind::CallLayer;
            call.callee = it->second;
            call.region = 0;
            b.body.stmts.insert(b.body.stmts.begin(), std::move(call));
            f.calls.push_back(it->second);
        }
        eliminate_dead(b.body, f.min_seq_len);
        f.body = std::move(b.body);
        index_of_layer.emplace(d, static_cast<int>(ir.functions.size()));
        ir.functions.push_back(std::move(f));
    }
    return ir;
}

KernelIR lower_runtime(const RecurrenceSpec& spec) {
    require_valid(spec);
    const bool descending = spec.direction == Direction::Downward;
    for (const Rule& r : spec.rules) {
        for (const Sum& s : r.body.branches) {
            for (const Term& t : s.terms) {
                if (!t.call) continue;
                std::vector<int> v = t.call->shifts;
                if (descending) {
                    for (int& x : v) x = -x;
                }
                if (!lex_negative(v)) {
                    fail(ErrorCode::UnsupportedConstruct,
                         "rule \"" + r.name + "\" reads a point the " + std::string(descending ? "descending" : "ascending") +
                             " table fill has not reached; declare the recurrence direction");
                }
            }
        }
    }
    KernelIR ir;
    ir.spec = spec;
    ir.backend = Backend::Runtime;
    Function f;
    f.name = snake_case(spec.name) + "_runtime";
    f.output = OutputKind::Scalar;
    f.body = RuntimeBody{descending};
    f.min_seq_len.assign(spec.sequences.size(), 0);
    ir.functions.push_back(std::move(f));
    return ir;
}

namespace {

void count_body(const KernelIR& ir, int fn, OpCount& ops, std::set<int>& seen) {
    if (!seen.insert(fn).second) return;
    const auto* body = std::get_if<StraightBody>(&ir.functions[static_cast<std::size_t>(fn)].body);
    if (!body) return;
    auto loads = [&](const std::vector<Operand>& args) {
        for (const Operand& a : args) {
            if (a.kind == Operand::Kind::SeqLoad || a.kind == Operand::Kind::RegionRead) ++ops.loads;
        }
    };
    for (const Stmt& s : body->stmts) {
        switch (s.kind) {
        case Stmt::Kind::Assign:
            loads(s.args);
            switch (s.op) {
            case Op::Add:
            case Op::Sub: ++ops.adds; break;
            case Op::Mul: ++ops.muls; break;
            case Op::Div: ++ops.divs; break;
            case Op::Sqrt:
            case Op::Exp:
            case Op::Erf: ++ops.funcs; break;
            case Op::Copy:
            case Op::Neg: break;
            }
            break;
        case Stmt::Kind::StoreOut:
            loads(s.args);
            ++ops.stores;
            break;
        case Stmt::Kind::Return: loads(s.args); break;
        case Stmt::Kind::CallLayer: count_body(ir, s.callee, ops, seen); break;
        }
    }
}

}  // namespace

OpCount count_ops(const KernelIR& ir, int function) {
    OpCount ops;
    std::set<int> seen;
    count_body(ir, function, ops, seen);
    return ops;
}

std::string check_ir(const KernelIR& ir) {
    for (std::size_t fi = 0; fi < ir.functions.size(); ++fi) {
        const Function& f = ir.functions[fi];
        const auto* body = std::get_if<StraightBody>(&f.body);
        if (!body) continue;
        std::vector<bool> assigned(static_cast<std::size_t>(body->num_locals), false);
        auto check_args = [&](const std::vector<Operand>& args) -> std::string {
            for (const Operand& a : args) {
                if (a.kind == Operand::Kind::Local &&
                    (a.id < 0 || a.id >= body->num_locals || !assigned[static_cast<std::size_t>(a.id)])) {
                    return f.name + ": local used before assignment";
                }
                if (a.kind == Operand::Kind::RegionRead &&
                    (a.id < 0 || static_cast<std::size_t>(a.id) >= body->regions.size() || a.index < 0 ||
                     a.index >= body->regions[static_cast<std::size_t>(a.id)].length)) {
                    return f.name + ": region read out of range";
                }
            }
            return {};
        };
        for (const Stmt& s : body->stmts) {
            if (auto e = check_args(s.args); !e.empty()) return e;
            switch (s.kind) {
            case Stmt::Kind::Assign:
                if (s.dst < 0 || s.dst >= body->num_locals || assigned[static_cast<std::size_t>(s.dst)]) {
                    return f.name + ": local assigned twice";
                }
                assigned[static_cast<std::size_t>(s.dst)] = true;
                break;
            case Stmt::Kind::StoreOut:
                if (f.output != OutputKind::Region || s.index < 0 || s.index >= f.output_length) {
                    return f.name + ": output write out of range";
                }
                break;
            case Stmt::Kind::CallLayer: {
                if (ir.backend != Backend::Layered) return f.name + ": call in non-layered IR";
                if (s.callee < 0 || static_cast<std::size_t>(s.callee) >= fi) return f.name + ": call is not a descent";
                if (s.region < 0 || static_cast<std::size_t>(s.region) >= body->regions.size()) {
                    return f.name + ": call into undeclared region";
                }
                const Function& callee = ir.functions[static_cast<std::size_t>(s.callee)];
                if (callee.output_length != body->regions[static_cast<std::size_t>(s.region)].length) {
                    return f.name + ": predecessor region is not exactly sized";
                }
                break;
            }
            case Stmt::Kind::Return:
                if (f.output != OutputKind::Scalar) return f.name + ": region function returns a value";
                break;
            }
        }
    }
    return {};
}

}  // namespace recursum::codegen
