#include "recursum/codegen/render.hpp"

#include "recursum/error.hpp"
#include "recursum/validate.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>
#include <sstream>

namespace recursum::codegen {

namespace {

Profile make_cpp20() {
    Profile p;
    p.id = "cpp20";
    p.header_ext = ".hpp";
    p.namespaces = true;
    p.abi_adapter = true;
    p.function_qualifier = "inline";
    p.inline_macro =
        "#ifndef RECURSUM_FORCEINLINE\n"
        "#if defined(_MSC_VER)\n"
        "#define RECURSUM_FORCEINLINE __forceinline\n"
        "#else\n"
        "#define RECURSUM_FORCEINLINE inline __attribute__((always_inline))\n"
        "#endif\n"
        "#endif\n";
    p.restrict_kw = "";
    p.cast_prefix = "static_cast<double>";
    p.malloc_fn = "std::malloc";
    p.calloc_fn = "std::calloc";
    p.free_fn = "std::free";
    p.includes = {"<cmath>", "<cstdlib>"};
    p.functions = {{"sqrt", "std::sqrt"}, {"exp", "std::exp"}, {"erf", "std::erf"}};
    return p;
}

Profile make_c99() {
    Profile p;
    p.id = "c99";
    p.header_ext = ".h";
    p.namespaces = false;
    p.abi_adapter = false;
    p.function_qualifier = "static inline";
    p.inline_macro =
        "#ifndef RECURSUM_FORCEINLINE\n"
        "#if defined(_MSC_VER)\n"
        "#define RECURSUM_FORCEINLINE static __forceinline\n"
        "#else\n"
        "#define RECURSUM_FORCEINLINE static inline __attribute__((always_inline))\n"
        "#endif\n"
        "#endif\n";
    p.restrict_kw = "restrict";
    p.cast_prefix = "(double)";
    p.malloc_fn = "malloc";
    p.calloc_fn = "calloc";
    p.free_fn = "free";
    p.includes = {"<math.h>", "<stdlib.h>"};
    p.functions = {{"sqrt", "sqrt"}, {"exp", "exp"}, {"erf", "erf"}};
    return p;
}

const std::array<Profile, 2>& profiles() {
    static const std::array<Profile, 2> all = {make_cpp20(), make_c99()};
    return all;
}

bool is_reserved_in_output(const std::string& n) {
    static const std::set<std::string> words = {
        "out", "idx", "bound", "result", "auto", "break", "case", "char", "const", "continue", "default", "do",
        "double", "else", "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
        "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
        "unsigned", "void", "volatile", "while", "bool", "class", "new", "delete", "this", "namespace", "template",
        "typename", "using", "private", "public", "protected", "virtual", "operator", "true", "false", "std"};
    return n.starts_with("rv_") || words.count(n) > 0;
}

struct Param {
    std::string decl_type;
    std::string name;
    bool used;
};

class Writer {
public:
    Writer(const KernelIR& ir, const Profile& prof) : ir_(ir), spec_(ir.spec), prof_(prof) {
        for (const auto* names : {&spec_.scalars, &spec_.sequences, &spec_.indices}) {
            for (const std::string& n : *names) {
                if (is_reserved_in_output(n)) {
                    fail(ErrorCode::UnsupportedConstruct,
                         "name '" + n + "' collides with an identifier reserved by the " + prof.id + " profile");
                }
            }
        }
    }

    std::string qualified(const std::string& name) const {
        if (prof_.namespaces || spec_.ns.empty()) return name;
        return spec_.ns + "_" + name;
    }

    std::string func(const std::string& name) const {
        auto it = prof_.functions.find(name);
        if (it == prof_.functions.end()) {
            fail(ErrorCode::UnsupportedConstruct, "profile " + prof_.id + " has no spelling for '" + name + "'");
        }
        return it->second;
    }

    std::string operand(const Operand& a) const {
        switch (a.kind) {
        case Operand::Kind::Const: return double_literal(a.value);
        case Operand::Kind::Param: return spec_.scalars[static_cast<std::size_t>(a.id)];
        case Operand::Kind::SeqLoad:
            return spec_.sequences[static_cast<std::size_t>(a.id)] + "[" + std::to_string(a.index) + "]";
        case Operand::Kind::Local: return "rv_" + std::to_string(a.id);
        case Operand::Kind::RegionRead: return "rv_prev" + std::to_string(a.id) + "[" + std::to_string(a.index) + "]";
        }
        return "";
    }

    std::string assign_rhs(const Stmt& s) const {
        const std::string a = operand(s.args[0]);
        switch (s.op) {
        case Op::Copy: return a;
        case Op::Neg: return "-" + a;
        case Op::Sqrt: return func("sqrt") + "(" + a + ")";
        case Op::Exp: return func("exp") + "(" + a + ")";
        case Op::Erf: return func("erf") + "(" + a + ")";
        default: break;
        }
        const std::string b = operand(s.args[1]);
        const char* op = s.op == Op::Add ? " + " : s.op == Op::Sub ? " - " : s.op == Op::Mul ? " * " : " / ";
        return a + op + b;
    }

    // Parameters in declaration order; `with_lengths` adds an int length per sequence.
    std::vector<Param> params(const std::set<int>& used_scalars, const std::set<int>& used_seqs,
                              bool with_lengths) const {
        std::vector<Param> out;
        for (std::size_t k = 0; k < spec_.scalars.size(); ++k) {
            out.push_back({"double", spec_.scalars[k], used_scalars.count(static_cast<int>(k)) > 0});
        }
        for (std::size_t k = 0; k < spec_.sequences.size(); ++k) {
            const bool used = used_seqs.count(static_cast<int>(k)) > 0;
            out.push_back({"const double*", spec_.sequences[k], used});
            if (with_lengths) out.push_back({"int", spec_.sequences[k] + "_len", used});
        }
        return out;
    }

    std::string param_list(const std::vector<Param>& ps) const {
        std::string s;
        for (const Param& p : ps) {
            s += ", " + p.decl_type + " ";
            s += (p.used || !prof_.namespaces) ? p.name : "/*" + p.name + "*/";
        }
        return s;
    }

    // C has no unnamed parameters; silence unused ones in the body instead.
    std::string void_unused(const std::vector<Param>& ps) const {
        if (prof_.namespaces) return {};
        std::string s;
        for (const Param& p : ps) {
            if (!p.used) s += "    (void)" + p.name + ";\n";
        }
        return s;
    }

    std::string call_args() const {
        std::string s;
        for (const std::string& n : spec_.scalars) s += ", " + n;
        for (const std::string& n : spec_.sequences) s += ", " + n;
        return s;
    }

    std::string straight(const Function& f) const {
        const auto& body = std::get<StraightBody>(f.body);
        std::set<int> us, uq;
        bool calls = false;
        for (const Stmt& s : body.stmts) {
            if (s.kind == Stmt::Kind::CallLayer) calls = true;
            for (const Operand& a : s.args) {
                if (a.kind == Operand::Kind::Param) us.insert(a.id);
                if (a.kind == Operand::Kind::SeqLoad) uq.insert(a.id);
            }
        }
        if (calls) {
            for (std::size_t k = 0; k < spec_.scalars.size(); ++k) us.insert(static_cast<int>(k));
            for (std::size_t k = 0; k < spec_.sequences.size(); ++k) uq.insert(static_cast<int>(k));
        }
        const auto ps = params(us, uq, false);
        std::string list = param_list(ps);
        std::ostringstream o;
        if (f.output == OutputKind::Scalar) {
            o << prof_.function_qualifier << " double " << qualified(f.name) << "("
              << (list.empty() ? (prof_.namespaces ? "" : "void") : list.substr(2)) << ") {\n";
        } else {
            o << "RECURSUM_FORCEINLINE void " << qualified(f.name) << "(double* "
              << (prof_.restrict_kw.empty() ? "" : prof_.restrict_kw + " ") << "out" << list << ") {\n";
        }
        o << void_unused(ps);
        for (const Stmt& s : body.stmts) {
            switch (s.kind) {
            case Stmt::Kind::Assign: o << "    const double rv_" << s.dst << " = " << assign_rhs(s) << ";\n"; break;
            case Stmt::Kind::StoreOut: o << "    out[" << s.index << "] = " << operand(s.args[0]) << ";\n"; break;
            case Stmt::Kind::CallLayer: {
                const Function& callee = ir_.functions[static_cast<std::size_t>(s.callee)];
                o << "    double rv_prev" << s.region << "[" << callee.output_length << "];\n";
                o << "    " << qualified(callee.name) << "(rv_prev" << s.region << call_args() << ");\n";
                break;
            }
            case Stmt::Kind::Return: o << "    return " << operand(s.args[0]) << ";\n"; break;
            }
        }
        o << "}\n";
        return o.str();
    }

    // ---- runtime backend ------------------------------------------------

    std::string int_c(const IntExpr& e, const std::vector<std::string>& names) const {
        switch (e.kind) {
        case IntExpr::Kind::Literal: return e.value < 0 ? "(" + std::to_string(e.value) + ")" : std::to_string(e.value);
        case IntExpr::Kind::Symbol: return names[static_cast<std::size_t>(e.slot)];
        case IntExpr::Kind::Add: return "(" + int_c(e.args[0], names) + " + " + int_c(e.args[1], names) + ")";
        case IntExpr::Kind::Sub: return "(" + int_c(e.args[0], names) + " - " + int_c(e.args[1], names) + ")";
        case IntExpr::Kind::Mul: return "(" + int_c(e.args[0], names) + " * " + int_c(e.args[1], names) + ")";
        }
        return "0";
    }

    std::string constraints_c(const std::vector<Constraint>& cs, const std::vector<std::string>& names) const {
        if (cs.empty()) return "1";
        std::string s;
        for (std::size_t k = 0; k < cs.size(); ++k) {
            if (k) s += " && ";
            s += int_c(cs[k].lhs, names) + " " + std::string(compare_op_text(cs[k].op)) + " " + int_c(cs[k].rhs, names);
        }
        return s;
    }

    std::string coeff_c(const CoeffExpr& e, const std::vector<std::string>& names) const {
        using K = CoeffExpr::Kind;
        switch (e.kind) {
        case K::Literal: return double_literal(e.value);
        case K::Pi: return double_literal(std::numbers::pi);
        case K::Scalar: return e.name;
        case K::Index: return prof_.cast_prefix + "(" + int_c(e.index, names) + ")";
        case K::Seq:
            return qualified(seq_helper()) + "(" + e.name + ", " + e.name + "_len, " + int_c(e.index, names) + ", &rv_s)";
        case K::Func: return func(e.name) + "(" + coeff_c(e.args[0], names) + ")";
        case K::Add: return "(" + coeff_c(e.args[0], names) + " + " + coeff_c(e.args[1], names) + ")";
        case K::Sub: return "(" + coeff_c(e.args[0], names) + " - " + coeff_c(e.args[1], names) + ")";
        case K::Mul: return "(" + coeff_c(e.args[0], names) + " * " + coeff_c(e.args[1], names) + ")";
        case K::Div: return "(" + coeff_c(e.args[0], names) + " / " + coeff_c(e.args[1], names) + ")";
        }
        return "0.0";
    }

    std::string seq_helper() const { return snake_case(spec_.name) + "_rt_seq"; }

    void collect(const CoeffExpr& e, std::set<int>& us, std::set<int>& uq) const {
        if (e.kind == CoeffExpr::Kind::Scalar) us.insert(e.slot);
        if (e.kind == CoeffExpr::Kind::Seq) uq.insert(e.slot);
        for (const CoeffExpr& a : e.args) collect(a, us, uq);
    }

    std::string offset_c(const std::vector<std::string>& names) const {
        std::string s = names[0];
        for (std::size_t d = 1; d < names.size(); ++d) s = "(" + s + ") * rv_n[" + std::to_string(d) + "] + " + names[d];
        return s;
    }

    std::string sum_c(const Sum& sum, const std::string& acc, const std::vector<std::string>& names,
                      const std::string& indent) const {
        const std::size_t k = spec_.indices.size();
        std::ostringstream o;
        o << indent << "double " << acc << " = 0.0;\n";
        for (const Term& t : sum.terms) {
            if (!t.call) {
                o << indent << acc << " += " << coeff_c(t.coefficient, names) << ";\n";
                continue;
            }
            std::vector<std::string> q;
            for (std::size_t d = 0; d < k; ++d) q.push_back("rv_q" + std::to_string(d));
            o << indent << "{\n";
            const std::string in = indent + "    ";
            for (std::size_t d = 0; d < k; ++d) {
                const int sh = t.call->shifts[d];
                o << in << "const long " << q[d] << " = " << names[d];
                if (sh > 0) o << " + " << sh;
                if (sh < 0) o << " - " << -sh;
                o << ";\n";
            }
            o << in << "if (" << constraints_c(spec_.validity, q) << ") {\n";
            std::string outside;
            for (std::size_t d = 0; d < k; ++d) {
                if (d) outside += " || ";
                outside += q[d] + " < 0 || " + q[d] + " > bound[" + std::to_string(d) + "]";
            }
            o << in << "    if (" << outside << ") {\n";
            o << in << "        if (rv_s == 1) rv_s = 2;\n";
            o << in << "    } else {\n";
            o << in << "        const long rv_qa = " << offset_c(q) << ";\n";
            o << in << "        if (rv_st[rv_qa] != 1) {\n";
            o << in << "            if (rv_s == 1) rv_s = rv_st[rv_qa] == 0 ? 2 : rv_st[rv_qa];\n";
            o << in << "        } else {\n";
            if (t.coefficient.is_literal(1.0)) {
                o << in << "            " << acc << " += rv_val[rv_qa];\n";
            } else {
                o << in << "            " << acc << " += " << coeff_c(t.coefficient, names) << " * rv_val[rv_qa];\n";
            }
            o << in << "        }\n";
            o << in << "    }\n";
            o << in << "}\n";
            o << indent << "}\n";
        }
        return o.str();
    }

    std::string runtime(const Function& f) const {
        const auto& rb = std::get<RuntimeBody>(f.body);
        const std::size_t k = spec_.indices.size();
        const std::vector<std::string>& names = spec_.indices;
        std::set<int> us, uq;
        for (const BaseCase& b : spec_.bases) collect(b.value, us, uq);
        for (const Rule& r : spec_.rules) {
            for (const Sum& s : r.body.branches) {
                for (const Term& t : s.terms) collect(t.coefficient, us, uq);
            }
            if (r.body.scale) collect(*r.body.scale, us, uq);
        }
        const auto ps = params(us, uq, true);
        const std::string K = std::to_string(k);
        std::ostringstream o;
        if (!spec_.sequences.empty()) {
            o << prof_.function_qualifier << " double " << qualified(seq_helper())
              << "(const double* s, int n, long k, int* st) {\n"
              << "    if (k < 0 || k >= n) {\n"
              << "        if (*st == 1) *st = 4;\n"
              << "        return 0.0;\n"
              << "    }\n"
              << "    return s[k];\n"
              << "}\n\n";
        }
        o << "/* Returns 0 on success, 1 when the table bound is too small, 2 when no rule\n"
             "   applies, 3 on an out-of-range sequence read. */\n";
        o << prof_.function_qualifier << " int " << qualified(f.name)
          << "(const int* idx, const int* bound, double* result" << param_list(ps) << ") {\n";
        o << void_unused(ps);
        o << "    long rv_n[" << K << "];\n"
          << "    long rv_size = 1;\n"
          << "    for (int rv_d = 0; rv_d < " << K << "; ++rv_d) {\n"
          << "        if (bound[rv_d] < 0) return 1;\n"
          << "        rv_n[rv_d] = (long)bound[rv_d] + 1;\n"
          << "        rv_size *= rv_n[rv_d];\n"
          << "    }\n"
          << "    *result = 0.0;\n"
          << "    {\n";
        for (std::size_t d = 0; d < k; ++d) {
            o << "        const long " << names[d] << " = idx[" << d << "];\n";
            o << "        (void)" << names[d] << ";\n";
        }
        o << "        if (!(" << constraints_c(spec_.validity, names) << ")) return 0;\n";
        o << "        for (int rv_d = 0; rv_d < " << K << "; ++rv_d) {\n"
          << "            if (idx[rv_d] < 0 || idx[rv_d] > bound[rv_d]) return 1;\n"
          << "        }\n"
          << "    }\n";
        if (prof_.namespaces) {
            o << "    double* rv_val = static_cast<double*>(" << prof_.malloc_fn << "(sizeof(double) * static_cast<std::size_t>(rv_size)));\n"
              << "    unsigned char* rv_st = static_cast<unsigned char*>(" << prof_.calloc_fn << "(static_cast<std::size_t>(rv_size), 1));\n";
        } else {
            o << "    double* rv_val = (double*)malloc(sizeof(double) * (size_t)rv_size);\n"
              << "    unsigned char* rv_st = (unsigned char*)calloc((size_t)rv_size, 1);\n";
        }
        o << "    if (!rv_val || !rv_st) {\n"
          << "        " << prof_.free_fn << "(rv_val);\n"
          << "        " << prof_.free_fn << "(rv_st);\n"
          << "        return 1;\n"
          << "    }\n";
        std::string indent = "    ";
        for (std::size_t d = 0; d < k; ++d) {
            const std::string& n = names[d];
            if (rb.descending) {
                o << indent << "for (long " << n << " = bound[" << d << "]; " << n << " >= 0; --" << n << ") {\n";
            } else {
                o << indent << "for (long " << n << " = 0; " << n << " <= bound[" << d << "]; ++" << n << ") {\n";
            }
            indent += "    ";
        }
        const std::string& in = indent;
        o << in << "const long rv_at = " << offset_c(names) << ";\n";
        o << in << "double rv_v = 0.0;\n";
        o << in << "int rv_s = 1;\n";
        o << in << "if (" << constraints_c(spec_.validity, names) << ") {\n";
        const std::string in2 = in + "    ";
        const std::string in3 = in2 + "    ";
        bool first = true;
        for (const BaseCase& b : spec_.bases) {
            std::string cond;
            for (std::size_t d = 0; d < k; ++d) {
                if (d) cond += " && ";
                cond += names[d] + " == " + (b.assignment[d] < 0 ? "(" + std::to_string(b.assignment[d]) + ")"
                                                                   : std::to_string(b.assignment[d]));
            }
            o << in2 << (first ? "if (" : "} else if (") << cond << ") {\n";
            o << in3 << "rv_v = " << coeff_c(b.value, names) << ";\n";
            first = false;
        }
        for (const Rule& r : order_rules(spec_)) {
            o << in2 << (first ? "if (" : "} else if (") << constraints_c(r.guards, names) << ") {\n";
            first = false;
            o << in3 << "/* " << r.name << " */\n";
            const RuleBody& body = r.body;
            for (std::size_t b = 0; b < body.branches.size(); ++b) {
                o << sum_c(body.branches[b], "rv_b" + std::to_string(b), names, in3);
            }
            if (body.kind == RuleBody::Kind::Single) {
                if (!body.scale) {
                    o << in3 << "rv_v = rv_b0;\n";
                } else if (body.scale->kind == CoeffExpr::Kind::Div && body.scale->args[0].is_literal(1.0)) {
                    o << in3 << "rv_v = rv_b0 / " << coeff_c(body.scale->args[1], names) << ";\n";
                } else {
                    o << in3 << "rv_v = rv_b0 * " << coeff_c(*body.scale, names) << ";\n";
                }
            } else {
                o << in3 << "rv_v = rv_b0;\n";
                for (std::size_t b = 1; b < body.branches.size(); ++b) o << in3 << "rv_v += rv_b" << b << ";\n";
                o << in3 << "rv_v = rv_v * " << double_literal(1.0 / static_cast<double>(body.branches.size())) << ";\n";
            }
        }
        if (first) {
            o << in2 << "rv_s = 3;\n";
        } else {
            o << in2 << "} else {\n" << in3 << "rv_s = 3;\n" << in2 << "}\n";
        }
        o << in << "}\n";
        o << in << "rv_val[rv_at] = rv_v;\n";
        o << in << "rv_st[rv_at] = (unsigned char)rv_s;\n";
        for (std::size_t d = 0; d < k; ++d) {
            indent.resize(indent.size() - 4);
            o << indent << "}\n";
        }
        std::vector<std::string> idx_names;
        for (std::size_t d = 0; d < k; ++d) idx_names.push_back("(long)idx[" + std::to_string(d) + "]");
        o << "    const long rv_at = " << offset_c(idx_names) << ";\n"
          << "    const int rv_state = rv_st[rv_at];\n"
          << "    int rv_code = 0;\n"
          << "    if (rv_state == 1) {\n"
          << "        *result = rv_val[rv_at];\n"
          << "    } else if (rv_state == 3) {\n"
          << "        rv_code = 2;\n"
          << "    } else if (rv_state == 4) {\n"
          << "        rv_code = 3;\n"
          << "    } else {\n"
          << "        rv_code = 1;\n"
          << "    }\n"
          << "    " << prof_.free_fn << "(rv_val);\n"
          << "    " << prof_.free_fn << "(rv_st);\n"
          << "    return rv_code;\n"
          << "}\n";
        return o.str();
    }

private:
    const KernelIR& ir_;
    const RecurrenceSpec& spec_;
    const Profile& prof_;
};

std::string tuple_list(const IndexPoint& p) {
    std::string s;
    for (std::size_t k = 0; k < p.size(); ++k) s += (k ? ", " : "") + std::to_string(p[k]);
    return s;
}

std::string adapter_file(const KernelIR& ir, const Writer& w, const std::string& name, const std::string& stem,
                         const std::string& header) {
    const RecurrenceSpec& spec = ir.spec;
    const std::string ns = spec.ns.empty() ? "" : spec.ns + "::";
    std::string scal_args, seq_args;
    for (std::size_t k = 0; k < spec.scalars.size(); ++k) scal_args += ", a.scalars[" + std::to_string(k) + "]";
    for (std::size_t k = 0; k < spec.sequences.size(); ++k) seq_args += ", a.seqs[" + std::to_string(k) + "]";
    auto args = [&](bool lengths) {
        std::string s = scal_args;
        for (std::size_t k = 0; k < spec.sequences.size(); ++k) {
            s += ", a.seqs[" + std::to_string(k) + "]";
            if (lengths) s += ", a.seq_lens[" + std::to_string(k) + "]";
        }
        return s.empty() ? s : s.substr(2);
    };
    const bool uses_args = !spec.scalars.empty() || !spec.sequences.empty();
    const std::string a_decl = uses_args ? "const KernelArgs& a" : "const KernelArgs& /*a*/";
    std::ostringstream o;
    o << "// Registry adapter for " << stem << ". Generated; do not edit.\n";
    o << "#include \"" << header << "\"\n";
    o << "#include \"recursum/kernel_abi.hpp\"\n\n";
    o << "namespace {\n\n";
    o << "using recursum::kernels::KernelArgs;\n\n";
    std::vector<std::int64_t> min_seq(spec.sequences.size(), 0);
    for (const Function& f : ir.functions) {
        for (std::size_t k = 0; k < f.min_seq_len.size(); ++k) min_seq[k] = std::max(min_seq[k], f.min_seq_len[k]);
    }
    const std::string set_name = "recursum_kernels_" + stem;
    switch (ir.backend) {
    case Backend::Unrolled: {
        for (std::size_t k = 0; k < ir.functions.size(); ++k) {
            const Function& f = ir.functions[k];
            o << "const int rk_t" << k << "[] = {" << tuple_list(f.tuple) << "};\n";
            o << "double rk_f" << k << "(" << a_decl << ") { return " << ns << f.name << "(" << args(false)
              << "); }\n";
        }
        o << "\nconst recursum::kernels::UnrolledEntry rk_entries[] = {\n";
        for (std::size_t k = 0; k < ir.functions.size(); ++k) o << "    {rk_t" << k << ", rk_f" << k << "},\n";
        o << "};\n\n";
        break;
    }
    case Backend::Layered: {
        for (std::size_t k = 0; k < ir.functions.size(); ++k) {
            const Function& f = ir.functions[k];
            o << "const int rk_t" << k << "[] = {" << tuple_list(f.tuple) << "};\n";
            o << "void rk_f" << k << "(" << a_decl << ", double* out) { " << ns << f.name << "(out"
              << (uses_args ? ", " + args(false) : "") << "); }\n";
        }
        o << "\nconst recursum::kernels::LayerEntry rk_entries[] = {\n";
        for (std::size_t k = 0; k < ir.functions.size(); ++k) {
            o << "    {rk_t" << k << ", " << ir.functions[k].output_length << ", rk_f" << k << "},\n";
        }
        o << "};\n\n";
        break;
    }
    case Backend::Runtime:
        o << "int rk_runtime(" << a_decl << ", const int* idx, const int* bound, double* result) {\n"
          << "    return " << ns << ir.functions[0].name << "(idx, bound, result" << (uses_args ? ", " + args(true) : "")
          << ");\n}\n\n";
        break;
    }
    if (!spec.sequences.empty()) {
        o << "const int rk_min_seq[] = {";
        for (std::size_t k = 0; k < min_seq.size(); ++k) o << (k ? ", " : "") << min_seq[k];
        o << "};\n\n";
    }
    o << "}  // namespace\n\n";
    o << "extern const recursum::kernels::KernelSet " << set_name << ";\n";
    o << "const recursum::kernels::KernelSet " << set_name << " = {\n";
    o << "    \"" << name << "\",\n";
    o << "    \"" << backend_name(ir.backend) << "\",\n";
    o << "    " << spec.indices.size() << ",\n";
    o << "    " << spec.scalars.size() << ",\n";
    o << "    " << spec.sequences.size() << ",\n";
    o << "    " << (spec.sequences.empty() ? "nullptr" : "rk_min_seq") << ",\n";
    const bool unrolled = ir.backend == Backend::Unrolled;
    const bool layered = ir.backend == Backend::Layered;
    o << "    " << (unrolled ? "rk_entries" : "nullptr") << ",\n";
    o << "    " << (unrolled ? ir.functions.size() : 0) << ",\n";
    o << "    " << (layered ? "rk_entries" : "nullptr") << ",\n";
    o << "    " << (layered ? ir.functions.size() : 0) << ",\n";
    o << "    " << (layered ? spec.layered->descent_indices.size() : 0) << ",\n";
    o << "    " << (ir.backend == Backend::Runtime ? "rk_runtime" : "nullptr") << ",\n";
    o << "};\n";
    (void)w;
    return o.str();
}

}  // namespace

const Profile& profile(std::string_view id) {
    for (const Profile& p : profiles()) {
        if (p.id == id) return p;
    }
    fail(ErrorCode::UnsupportedConstruct, "unknown target profile '" + std::string(id) + "'");
}

std::vector<std::string> profile_ids() {
    std::vector<std::string> out;
    for (const Profile& p : profiles()) out.push_back(p.id);
    return out;
}

const Profile& default_profile() {
    const char* env = std::getenv("RECURSUM_PROFILE");
    return profile(env && *env ? env : "cpp20");
}

std::string double_literal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    if (s == "inf" || s == "-inf" || s.find("nan") != std::string::npos) {
        fail(ErrorCode::UnsupportedConstruct, "non-finite constant in generated code");
    }
    return v < 0 || std::signbit(v) ? "(" + s + ")" : s;
}

nlohmann::json ops_json(const OpCount& ops) {
    return {{"adds", ops.adds}, {"muls", ops.muls}, {"divs", ops.divs},
            {"loads", ops.loads}, {"stores", ops.stores}, {"funcs", ops.funcs}};
}

nlohmann::json bounds_json(const RecurrenceSpec& spec, const Bounds& bounds) {
    nlohmann::json upper = nlohmann::json::object();
    for (std::size_t k = 0; k < spec.indices.size() && k < bounds.upper.size(); ++k) {
        upper[spec.indices[k]] = bounds.upper[k];
    }
    nlohmann::json caps = nlohmann::json::array();
    for (const Cap& c : bounds.caps) {
        nlohmann::json idx = nlohmann::json::array();
        for (int s : c.slots) idx.push_back(spec.indices[static_cast<std::size_t>(s)]);
        caps.push_back({{"indices", idx}, {"limit", c.limit}});
    }
    return {{"upper", upper}, {"caps", caps}};
}

SourceArtifact render(const KernelIR& ir, const Profile& prof, std::string name) {
    if (name.empty()) name = snake_case(ir.spec.name);
    const Writer w(ir, prof);
    const std::string stem = name + "_" + std::string(backend_name(ir.backend));
    const std::string header = stem + prof.header_ext;
    const RecurrenceSpec& spec = ir.spec;

    std::ostringstream o;
    o << "// " << spec.name << " kernels, " << backend_name(ir.backend) << " backend, profile " << prof.id
      << ". Generated; do not edit.\n";
    if (prof.namespaces) {
        o << "#pragma once\n\n";
    } else {
        std::string guard = stem;
        std::transform(guard.begin(), guard.end(), guard.begin(), [](unsigned char c) { return std::toupper(c); });
        o << "#ifndef " << guard << "_H\n#define " << guard << "_H\n\n";
    }
    for (const std::string& inc : prof.includes) o << "#include " << inc << "\n";
    o << "\n";
    if (ir.backend == Backend::Layered) o << prof.inline_macro << "\n";
    if (prof.namespaces && !spec.ns.empty()) o << "namespace " << spec.ns << " {\n\n";
    for (const Function& f : ir.functions) {
        if (std::holds_alternative<StraightBody>(f.body)) {
            o << w.straight(f) << "\n";
        } else {
            o << w.runtime(f) << "\n";
        }
    }
    if (prof.namespaces && !spec.ns.empty()) o << "}  // namespace " << spec.ns << "\n";
    if (!prof.namespaces) o << "#endif\n";

    SourceArtifact art;
    art.profile_id = prof.id;
    art.files[header] = o.str();
    if (prof.abi_adapter) art.files[stem + "_abi.cpp"] = adapter_file(ir, w, name, stem, header);

    nlohmann::json fns = nlohmann::json::array();
    for (std::size_t k = 0; k < ir.functions.size(); ++k) {
        const Function& f = ir.functions[k];
        nlohmann::json jf;
        jf["name"] = w.qualified(f.name);
        jf["tuple"] = f.tuple.empty() ? nlohmann::json(nullptr) : nlohmann::json(f.tuple);
        jf["output_length"] = ir.backend == Backend::Runtime ? nlohmann::json(nullptr) : nlohmann::json(f.output_length);
        if (std::holds_alternative<StraightBody>(f.body)) {
            jf["ops"] = ops_json(count_ops(ir, static_cast<int>(k)));
            nlohmann::json seqs = nlohmann::json::object();
            for (std::size_t s = 0; s < spec.sequences.size(); ++s) seqs[spec.sequences[s]] = f.min_seq_len[s];
            jf["min_seq_lengths"] = seqs;
        }
        fns.push_back(jf);
    }
    art.manifest = {{"spec", name},
                    {"recurrence", spec.name},
                    {"backend", backend_name(ir.backend)},
                    {"bounds", ir.backend == Backend::Runtime ? nlohmann::json(nullptr) : bounds_json(spec, ir.bounds)},
                    {"profile", prof.id},
                    {"files", nlohmann::json::array()},
                    {"functions", fns}};
    for (const auto& [path, text] : art.files) art.manifest["files"].push_back(path);
    return art;
}

SourceArtifact emit_unrolled(const RecurrenceSpec& spec, const Bounds& bounds, const Profile& prof,
                             const GenOptions& opts) {
    return render(lower_unrolled(spec, bounds, opts), prof);
}

SourceArtifact emit_layered(const RecurrenceSpec& spec, const Bounds& bounds, const Profile& prof,
                            const GenOptions& opts) {
    return render(lower_layered(spec, bounds, opts), prof);
}

SourceArtifact emit_runtime(const RecurrenceSpec& spec, const Profile& prof) {
    return render(lower_runtime(spec), prof);
}

}  // namespace recursum::codegen
