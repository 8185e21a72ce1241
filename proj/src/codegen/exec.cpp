#include "recursum/codegen/ir.hpp"

#include "recursum/error.hpp"
#include "recursum/validate.hpp"

#include <cmath>
#include <numbers>

namespace recursum::codegen {

namespace {

struct Frame {
    std::vector<double> locals;
    std::vector<std::vector<double>> regions;
};

double read(const Operand& a, const Frame& fr, const BoundEnv& env) {
    switch (a.kind) {
    case Operand::Kind::Const: return a.value;
    case Operand::Kind::Param: return env.scalars[static_cast<std::size_t>(a.id)];
    case Operand::Kind::SeqLoad: {
        const auto& s = env.sequences[static_cast<std::size_t>(a.id)];
        if (a.index >= static_cast<std::int64_t>(s.size())) {
            fail(ErrorCode::SequenceOutOfRange, "kernel reads element " + std::to_string(a.index) +
                                                    " of a sequence of length " + std::to_string(s.size()));
        }
        return s[static_cast<std::size_t>(a.index)];
    }
    case Operand::Kind::Local: return fr.locals[static_cast<std::size_t>(a.id)];
    case Operand::Kind::RegionRead:
        return fr.regions[static_cast<std::size_t>(a.id)][static_cast<std::size_t>(a.index)];
    }
    return 0.0;
}

double exec(const KernelIR& ir, int fn, const BoundEnv& env, double* out) {
    const Function& f = ir.functions.at(static_cast<std::size_t>(fn));
    const auto* body = std::get_if<StraightBody>(&f.body);
    if (!body) fail(ErrorCode::UnsupportedConstruct, f.name + " is not a straight-line function");
    Frame fr;
    fr.locals.resize(static_cast<std::size_t>(body->num_locals));
    for (const Region& r : body->regions) fr.regions.emplace_back(static_cast<std::size_t>(r.length), 0.0);
    for (const Stmt& s : body->stmts) {
        switch (s.kind) {
        case Stmt::Kind::Assign: {
            const double a = read(s.args[0], fr, env);
            const double b = s.args.size() > 1 ? read(s.args[1], fr, env) : 0.0;
            double v = 0.0;
            switch (s.op) {
            case Op::Copy: v = a; break;
            case Op::Add: v = a + b; break;
            case Op::Sub: v = a - b; break;
            case Op::Mul: v = a * b; break;
            case Op::Div: v = a / b; break;
            case Op::Neg: v = -a; break;
            case Op::Sqrt: v = std::sqrt(a); break;
            case Op::Exp: v = std::exp(a); break;
            case Op::Erf: v = std::erf(a); break;
            }
            fr.locals[static_cast<std::size_t>(s.dst)] = v;
            break;
        }
        case Stmt::Kind::StoreOut: out[s.index] = read(s.args[0], fr, env); break;
        case Stmt::Kind::CallLayer:
            exec(ir, s.callee, env, fr.regions[static_cast<std::size_t>(s.region)].data());
            break;
        case Stmt::Kind::Return: return read(s.args[0], fr, env);
        }
    }
    return 0.0;
}

enum State : unsigned char { Pending, Ready, Unavailable, NoRuleState, SeqError };

// Coefficient evaluation as the generated runtime kernel performs it.
struct RuntimeCoeff {
    const BoundEnv& env;
    OpCount& ops;
    unsigned char* state = nullptr;  // set to SeqError on an out-of-range read

    double operator()(const CoeffExpr& e, const IndexPoint& p) {
        using K = CoeffExpr::Kind;
        switch (e.kind) {
        case K::Literal: return e.value;
        case K::Pi: return std::numbers::pi;
        case K::Scalar: return env.scalars[static_cast<std::size_t>(e.slot)];
        case K::Index: return static_cast<double>(eval_int(e.index, p));
        case K::Seq: {
            const auto& s = env.sequences[static_cast<std::size_t>(e.slot)];
            const std::int64_t k = eval_int(e.index, p);
            ++ops.loads;
            if (k < 0 || k >= static_cast<std::int64_t>(s.size())) {
                if (*state == Ready) *state = SeqError;
                return 0.0;
            }
            return s[static_cast<std::size_t>(k)];
        }
        case K::Func: {
            const double a = (*this)(e.args[0], p);
            ++ops.funcs;
            if (e.name == "sqrt") return std::sqrt(a);
            if (e.name == "exp") return std::exp(a);
            return std::erf(a);
        }
        default: break;
        }
        const double a = (*this)(e.args[0], p);
        const double b = (*this)(e.args[1], p);
        switch (e.kind) {
        case K::Add: ++ops.adds; return a + b;
        case K::Sub: ++ops.adds; return a - b;
        case K::Mul: ++ops.muls; return a * b;
        default: ++ops.divs; return a / b;
        }
    }
};

}  // namespace

double run_scalar(const KernelIR& ir, int function, const BoundEnv& env) { return exec(ir, function, env, nullptr); }

void run_layer(const KernelIR& ir, int function, const BoundEnv& env, double* out) { exec(ir, function, env, out); }

RuntimeResult run_runtime(const KernelIR& ir, const IndexPoint& idx, const std::vector<std::int64_t>& bound,
                          const BoundEnv& env) {
    const RecurrenceSpec& spec = ir.spec;
    const auto* rb = std::get_if<RuntimeBody>(&ir.functions.at(0).body);
    if (!rb) fail(ErrorCode::UnsupportedConstruct, "not a runtime kernel");
    const std::size_t k = spec.indices.size();
    RuntimeResult res;
    for (std::int64_t b : bound) {
        if (b < 0) {
            res.status = RuntimeStatus::TableBoundExceeded;
            return res;
        }
    }
    if (!in_domain(spec, idx)) return res;
    auto in_box = [&](const IndexPoint& p) {
        for (std::size_t d = 0; d < k; ++d) {
            if (p[d] < 0 || p[d] > bound[d]) return false;
        }
        return true;
    };
    if (!in_box(idx)) {
        res.status = RuntimeStatus::TableBoundExceeded;
        return res;
    }
    auto offset = [&](const IndexPoint& p) {
        std::int64_t at = 0;
        for (std::size_t d = 0; d < k; ++d) at = at * (bound[d] + 1) + p[d];
        return static_cast<std::size_t>(at);
    };
    std::size_t size = 1;
    for (std::int64_t b : bound) size *= static_cast<std::size_t>(b + 1);
    std::vector<double> val(size, 0.0);
    std::vector<unsigned char> st(size, Pending);
    const std::vector<Rule> ordered = order_rules(spec);
    OpCount& ops = res.ops;
    RuntimeCoeff coeff{env, ops};

    IndexPoint p(k, 0);
    if (rb->descending) p = bound;
    while (true) {
        double v = 0.0;
        unsigned char s = Ready;
        coeff.state = &s;
        if (in_domain(spec, p)) {
            const BaseCase* base = nullptr;
            for (const BaseCase& b : spec.bases) {
                if (b.assignment == p) {
                    base = &b;
                    break;
                }
            }
            const Rule* rule = nullptr;
            if (!base) {
                for (const Rule& r : ordered) {
                    if (all_hold(r.guards, p)) {
                        rule = &r;
                        break;
                    }
                }
            }
            auto sum_of = [&](const Sum& sum) {
                double acc = 0.0;
                for (const Term& t : sum.terms) {
                    if (!t.call) {
                        acc += coeff(t.coefficient, p);
                        ++ops.adds;
                        continue;
                    }
                    const IndexPoint q = shifted(p, *t.call);
                    if (!in_domain(spec, q)) continue;
                    if (!in_box(q)) {
                        if (s == Ready) s = Unavailable;
                        continue;
                    }
                    const unsigned char qs = st[offset(q)];
                    if (qs != Ready) {
                        if (s == Ready) s = qs == Pending ? static_cast<unsigned char>(Unavailable) : qs;
                        continue;
                    }
                    ++ops.loads;
                    if (t.coefficient.is_literal(1.0)) {
                        acc += val[offset(q)];
                    } else {
                        acc += coeff(t.coefficient, p) * val[offset(q)];
                        ++ops.muls;
                    }
                    ++ops.adds;
                }
                return acc;
            };
            if (base) {
                v = coeff(base->value, p);
            } else if (rule) {
                const RuleBody& body = rule->body;
                if (body.kind == RuleBody::Kind::Single) {
                    v = sum_of(body.branches[0]);
                    if (body.scale) {
                        const CoeffExpr& sc = *body.scale;
                        if (sc.kind == CoeffExpr::Kind::Div && sc.args[0].is_literal(1.0)) {
                            v = v / coeff(sc.args[1], p);
                            ++ops.divs;
                        } else {
                            v = v * coeff(sc, p);
                            ++ops.muls;
                        }
                    }
                } else {
                    v = sum_of(body.branches[0]);
                    for (std::size_t b = 1; b < body.branches.size(); ++b) {
                        v += sum_of(body.branches[b]);
                        ++ops.adds;
                    }
                    v = v * (1.0 / static_cast<double>(body.branches.size()));
                    ++ops.muls;
                }
            } else {
                s = NoRuleState;
            }
        }
        val[offset(p)] = v;
        st[offset(p)] = s;
        ++ops.stores;

        // advance in lexicographic order
        std::size_t d = k;
        bool done = true;
        while (d > 0) {
            --d;
            if (!rb->descending && p[d] < bound[d]) {
                ++p[d];
                done = false;
                break;
            }
            if (rb->descending && p[d] > 0) {
                --p[d];
                done = false;
                break;
            }
            p[d] = rb->descending ? bound[d] : 0;
        }
        if (done) break;
    }
    switch (st[offset(idx)]) {
    case Ready: res.value = val[offset(idx)]; break;
    case NoRuleState: res.status = RuntimeStatus::NoRule; break;
    case SeqError: res.status = RuntimeStatus::SequenceOutOfRange; break;
    default: res.status = RuntimeStatus::TableBoundExceeded; break;
    }
    return res;
}

}  // namespace recursum::codegen
