#include "recursum/validate.hpp"

#include "recursum/parse.hpp"

#include <algorithm>
#include <set>

namespace recursum {

namespace {

class Checker {
public:
    explicit Checker(const RecurrenceSpec& spec) : spec_(spec) {}

    std::vector<Diagnostic> run() {
        check_names();
        if (spec_.indices.empty()) return diags_;
        for (const Constraint& c : spec_.validity) check_constraint(c, "validity");
        check_bases();
        check_rules();
        if (spec_.layered) check_layered();
        check_direction();
        return diags_;
    }

private:
    void add(std::string code, std::string message) { diags_.push_back({std::move(code), std::move(message)}); }

    void check_names() {
        if (!is_identifier(spec_.name)) add("bad-name", "recurrence name '" + spec_.name + "' is not an identifier");
        if (!spec_.ns.empty() && !is_identifier(spec_.ns)) {
            add("bad-name", "namespace '" + spec_.ns + "' is not an identifier");
        }
        if (spec_.indices.empty()) add("no-indices", "at least one index is required");
        std::set<std::string> seen;
        auto visit = [&](const std::vector<std::string>& names, const char* what) {
            for (const std::string& n : names) {
                if (!is_identifier(n)) add("bad-name", std::string(what) + " '" + n + "' is not an identifier");
                if (is_reserved_name(n)) add("reserved-name", std::string(what) + " '" + n + "' is a reserved word");
                if (!seen.insert(n).second) add("duplicate-name", "name '" + n + "' is declared more than once");
            }
        };
        visit(spec_.indices, "index");
        visit(spec_.scalars, "scalar");
        visit(spec_.sequences, "sequence");
    }

    bool check_int(const IntExpr& e, const std::string& where) {
        switch (e.kind) {
        case IntExpr::Kind::Literal: return true;
        case IntExpr::Kind::Symbol:
            if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= spec_.indices.size() ||
                spec_.indices[static_cast<std::size_t>(e.slot)] != e.symbol) {
                add("undeclared-symbol", where + ": '" + e.symbol + "' is not a declared index");
                return false;
            }
            return true;
        default: {
            bool ok = true;
            for (const IntExpr& a : e.args) ok = check_int(a, where) && ok;
            if (e.args.size() != 2) {
                add("malformed-expression", where + ": binary integer node without two operands");
                ok = false;
            }
            return ok;
        }
        }
    }

    void check_constraint(const Constraint& c, const std::string& where) {
        check_int(c.lhs, where);
        check_int(c.rhs, where);
    }

    // Returns true when the expression contains a function call or pi.
    bool check_coeff(const CoeffExpr& e, const std::string& where) {
        using K = CoeffExpr::Kind;
        switch (e.kind) {
        case K::Literal: return false;
        case K::Pi: return true;
        case K::Scalar:
            if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= spec_.scalars.size() ||
                spec_.scalars[static_cast<std::size_t>(e.slot)] != e.name) {
                add("undeclared-symbol", where + ": '" + e.name + "' is not a declared scalar");
            }
            return false;
        case K::Index: check_int(e.index, where); return false;
        case K::Seq:
            if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= spec_.sequences.size() ||
                spec_.sequences[static_cast<std::size_t>(e.slot)] != e.name) {
                add("undeclared-symbol", where + ": '" + e.name + "' is not a declared sequence");
            }
            check_int(e.index, where);
            return false;
        case K::Func:
            if (e.name != "sqrt" && e.name != "exp" && e.name != "erf") {
                add("unknown-function", where + ": unknown function '" + e.name + "'");
            }
            if (e.args.size() == 1) check_coeff(e.args[0], where);
            return true;
        default: {
            bool f = false;
            for (const CoeffExpr& a : e.args) f = check_coeff(a, where) || f;
            if (e.args.size() != 2) add("malformed-expression", where + ": binary node without two operands");
            return f;
        }
        }
    }

    void check_bases() {
        std::set<std::vector<std::int64_t>> seen;
        for (const BaseCase& b : spec_.bases) {
            const std::string where = "base " + render_point(b.assignment);
            if (b.assignment.size() != spec_.indices.size()) {
                add("partial-base", where + ": assignment must cover every index");
                continue;
            }
            if (!in_domain(spec_, b.assignment)) add("base outside domain", where + " violates the validity constraints");
            if (!seen.insert(b.assignment).second) add("duplicate base", where + " is assigned more than once");
            check_coeff(b.value, where);
        }
    }

    void check_sum(const Sum& sum, const std::string& where) {
        if (sum.terms.empty()) add("empty-sum", where + ": expression has no terms");
        for (const Term& t : sum.terms) {
            if (check_coeff(t.coefficient, where)) {
                add("function in rule", where + ": functions and pi are only allowed in base values");
            }
            if (t.call && t.call->shifts.size() != spec_.indices.size()) {
                add("malformed-shift", where + ": E[...] arity does not match the index count");
            }
        }
    }

    void check_rules() {
        if (spec_.rules.empty() && spec_.bases.empty()) add("empty-spec", "spec defines no base case and no rule");
        for (const Rule& r : spec_.rules) {
            const std::string where = "rule \"" + r.name + "\"";
            for (const Constraint& c : r.guards) check_constraint(c, where);
            if (r.body.kind == RuleBody::Kind::Single) {
                if (r.body.branches.size() != 1) add("malformed-rule", where + ": expected exactly one expression");
            } else {
                if (r.body.branches.size() < 2) add("malformed-rule", where + ": averaging needs at least two branches");
                if (r.body.scale) add("malformed-rule", where + ": averaged rules take no scale");
            }
            for (const Sum& s : r.body.branches) check_sum(s, where);
            if (r.body.scale && check_coeff(*r.body.scale, where)) {
                add("function in rule", where + ": functions and pi are not allowed in scales");
            }
            if (!guards_satisfiable(r.guards)) {
                add("unsatisfiable guards", where + ": no point in [-2, 8]^k satisfies the guards");
            }
        }
    }

    bool guards_satisfiable(const std::vector<Constraint>& guards) const {
        const std::size_t k = spec_.indices.size();
        IndexPoint p(k, -2);
        while (true) {
            if (all_hold(guards, p)) return true;
            std::size_t d = 0;
            while (d < k && p[d] == 8) p[d++] = -2;
            if (d == k) return false;
            ++p[d];
        }
    }

    void check_layered() {
        const LayeredAnnotation& la = *spec_.layered;
        const int axis = spec_.index_of(la.output_axis);
        if (axis < 0) add("bad-layered", "layered axis '" + la.output_axis + "' is not a declared index");
        std::vector<int> descent;
        std::set<int> covered;
        if (axis >= 0) covered.insert(axis);
        for (const std::string& d : la.descent_indices) {
            const int slot = spec_.index_of(d);
            if (slot < 0) {
                add("bad-layered", "descent index '" + d + "' is not declared");
                continue;
            }
            if (slot == axis) add("bad-layered", "output axis '" + d + "' cannot also be a descent index");
            if (!covered.insert(slot).second && slot != axis) add("bad-layered", "descent index '" + d + "' repeated");
            descent.push_back(slot);
        }
        if (covered.size() != spec_.indices.size()) {
            add("bad-layered", "output axis and descent indices must cover every index");
        }
        for (const Rule& r : spec_.rules) {
            for (const Sum& s : r.body.branches) {
                int branch_dir = -1;
                for (const Term& t : s.terms) {
                    if (!t.call || t.call->shifts.size() != spec_.indices.size()) continue;
                    const int moved = descent_step(t.call->shifts, descent);
                    if (moved < 0 || (branch_dir >= 0 && moved != branch_dir)) {
                        add("not layer-descent", "rule \"" + r.name + "\": every reference must lower exactly one "
                                                 "descent index by one and vary only the output axis");
                        break;
                    }
                    branch_dir = moved;
                }
            }
        }
    }

    // Slot of the single descent index lowered by one, or -1.
    static int descent_step(const std::vector<int>& shifts, const std::vector<int>& descent) {
        int moved = -1;
        for (int d : descent) {
            const int s = shifts[static_cast<std::size_t>(d)];
            if (s == 0) continue;
            if (s != -1 || moved >= 0) return -1;
            moved = d;
        }
        return moved;
    }

    void check_direction() {
        if (spec_.direction == Direction::Unspecified) return;
        const bool up = spec_.direction == Direction::Upward;
        auto consistent = [&](const Rule& r) {
            for (const Sum& s : r.body.branches) {
                for (const Term& t : s.terms) {
                    if (!t.call) continue;
                    std::vector<int> v = t.call->shifts;
                    if (!up) {
                        for (int& x : v) x = -x;
                    }
                    if (!lex_negative(v)) return false;
                }
            }
            return true;
        };
        for (const Rule& r : spec_.rules) {
            if (!consistent(r)) {
                add("direction-inconsistent", "rule \"" + r.name + "\": reference does not move " +
                                                  std::string(up ? "down" : "up") + " in lexicographic index order");
            }
        }
    }

    static std::string render_point(const std::vector<std::int64_t>& p) {
        std::string s = "(";
        for (std::size_t k = 0; k < p.size(); ++k) s += (k ? "," : "") + std::to_string(p[k]);
        return s + ")";
    }

    const RecurrenceSpec& spec_;
    std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> validate_spec(const RecurrenceSpec& spec) { return Checker(spec).run(); }

std::vector<Rule> order_rules(const RecurrenceSpec& spec) {
    std::vector<Rule> rules = spec.rules;
    auto key = [](const Rule& r) {
        const auto eqs = std::count_if(r.guards.begin(), r.guards.end(),
                                       [](const Constraint& c) { return c.op == CompareOp::Eq; });
        return std::pair<long, long>(-static_cast<long>(eqs), -static_cast<long>(r.guards.size()));
    };
    std::stable_sort(rules.begin(), rules.end(), [&](const Rule& a, const Rule& b) { return key(a) < key(b); });
    return rules;
}

bool lex_negative(const std::vector<int>& vec) {
    for (int v : vec) {
        if (v != 0) return v < 0;
    }
    return false;
}

}  // namespace recursum
