#include "recursum/interp.hpp"

#include "recursum/error.hpp"
#include "recursum/validate.hpp"

#include <cmath>
#include <numbers>

namespace recursum {

BoundEnv BoundEnv::bind(const RecurrenceSpec& spec, const EvalEnv& env) {
    BoundEnv out;
    for (const std::string& s : spec.scalars) {
        auto it = env.scalars.find(s);
        if (it == env.scalars.end()) fail(ErrorCode::MissingBinding, "no value bound for scalar '" + s + "'");
        out.scalars.push_back(it->second);
    }
    for (const std::string& s : spec.sequences) {
        auto it = env.sequences.find(s);
        if (it == env.sequences.end()) fail(ErrorCode::MissingBinding, "no values bound for sequence '" + s + "'");
        out.sequences.push_back(it->second);
    }
    return out;
}

double eval_coeff(const CoeffExpr& e, const IndexPoint& point, const BoundEnv& env) {
    using K = CoeffExpr::Kind;
    switch (e.kind) {
    case K::Literal: return e.value;
    case K::Pi: return std::numbers::pi;
    case K::Scalar: return env.scalars[static_cast<std::size_t>(e.slot)];
    case K::Index: return static_cast<double>(eval_int(e.index, point));
    case K::Seq: {
        const auto& seq = env.sequences[static_cast<std::size_t>(e.slot)];
        const std::int64_t k = eval_int(e.index, point);
        if (k < 0 || k >= static_cast<std::int64_t>(seq.size())) {
            fail(ErrorCode::SequenceOutOfRange, e.name + "[" + std::to_string(k) + "] is outside a sequence of length " +
                                                    std::to_string(seq.size()));
        }
        return seq[static_cast<std::size_t>(k)];
    }
    case K::Func: {
        const double a = eval_coeff(e.args[0], point, env);
        if (e.name == "sqrt") return std::sqrt(a);
        if (e.name == "exp") return std::exp(a);
        return std::erf(a);
    }
    case K::Add: return eval_coeff(e.args[0], point, env) + eval_coeff(e.args[1], point, env);
    case K::Sub: return eval_coeff(e.args[0], point, env) - eval_coeff(e.args[1], point, env);
    case K::Mul: return eval_coeff(e.args[0], point, env) * eval_coeff(e.args[1], point, env);
    case K::Div: {
        const double num = eval_coeff(e.args[0], point, env);
        const double den = eval_coeff(e.args[1], point, env);
        if (den == 0.0) fail(ErrorCode::DivisionByZero, "division by zero in coefficient");
        return num / den;
    }
    }
    return 0.0;
}

double apply_scale(double sum, const CoeffExpr& scale, const IndexPoint& point, const BoundEnv& env) {
    if (scale.kind == CoeffExpr::Kind::Div && scale.args[0].is_literal(1.0)) {
        const double den = eval_coeff(scale.args[1], point, env);
        if (den == 0.0) fail(ErrorCode::DivisionByZero, "rule scale divides by zero");
        return sum / den;
    }
    return sum * eval_coeff(scale, point, env);
}

Selection select_rule(const RecurrenceSpec& spec, const std::vector<Rule>& ordered, const IndexPoint& point) {
    Selection sel;
    if (!in_domain(spec, point)) {
        sel.kind = Selection::Kind::OutOfDomain;
        return sel;
    }
    for (const BaseCase& b : spec.bases) {
        if (b.assignment == point) {
            sel.kind = Selection::Kind::Base;
            sel.base = &b;
            return sel;
        }
    }
    for (const Rule& r : ordered) {
        if (all_hold(r.guards, point)) {
            sel.kind = Selection::Kind::Matched;
            sel.rule = &r;
            return sel;
        }
    }
    return sel;
}

namespace {

// Guards against rules that walk away from every base case.
constexpr std::size_t kMaxDepth = 4000;

std::string point_text(const RecurrenceSpec& spec, const IndexPoint& p) {
    std::string s = spec.name + "[";
    for (std::size_t k = 0; k < p.size(); ++k) s += (k ? "," : "") + std::to_string(p[k]);
    return s + "]";
}

}  // namespace

Evaluator::Evaluator(const RecurrenceSpec& spec, const EvalEnv& env, bool memoize)
    : spec_(spec), ordered_(order_rules(spec)), env_(BoundEnv::bind(spec, env)), memoize_(memoize) {}

double Evaluator::eval(const IndexPoint& point) {
    if (point.size() != spec_.indices.size()) {
        fail(ErrorCode::DimensionMismatch, "point has " + std::to_string(point.size()) + " indices, spec has " +
                                               std::to_string(spec_.indices.size()));
    }
    if (memoize_) {
        if (auto it = memo_.find(point); it != memo_.end()) return it->second;
    }
    if (!active_.insert(point).second) {
        fail(ErrorCode::CycleDetected, point_text(spec_, point) + " depends on itself");
    }
    if (active_.size() > kMaxDepth) {
        active_.erase(point);
        fail(ErrorCode::CycleDetected, "recursion deeper than " + std::to_string(kMaxDepth) + " at " +
                                           point_text(spec_, point) + "; the rules do not terminate");
    }
    double v = 0.0;
    try {
        v = compute(point);
    } catch (...) {
        active_.erase(point);
        throw;
    }
    active_.erase(point);
    if (memoize_) memo_.emplace(point, v);
    return v;
}

double Evaluator::eval_sum(const Sum& sum, const IndexPoint& point) {
    double s = 0.0;
    for (const Term& t : sum.terms) {
        if (!t.call) {
            s += eval_coeff(t.coefficient, point, env_);
            continue;
        }
        const IndexPoint target = shifted(point, *t.call);
        if (!in_domain(spec_, target)) continue;
        const double c = eval_coeff(t.coefficient, point, env_);
        s += c * eval(target);
    }
    return s;
}

double Evaluator::compute(const IndexPoint& point) {
    const Selection sel = select(point);
    switch (sel.kind) {
    case Selection::Kind::OutOfDomain: return 0.0;
    case Selection::Kind::Base: return eval_coeff(sel.base->value, point, env_);
    case Selection::Kind::NoRule:
        fail(ErrorCode::NoApplicableRule, "no base case or rule applies at " + point_text(spec_, point));
    case Selection::Kind::Matched: break;
    }
    const RuleBody& body = sel.rule->body;
    if (body.kind == RuleBody::Kind::Single) {
        const double s = eval_sum(body.branches[0], point);
        return body.scale ? apply_scale(s, *body.scale, point, env_) : s;
    }
    double acc = eval_sum(body.branches[0], point);
    for (std::size_t b = 1; b < body.branches.size(); ++b) acc += eval_sum(body.branches[b], point);
    return acc * (1.0 / static_cast<double>(body.branches.size()));
}

std::vector<double> Evaluator::branch_values(const IndexPoint& point) {
    const Selection sel = select(point);
    if (sel.kind != Selection::Kind::Matched) return {};
    std::vector<double> out;
    for (const Sum& s : sel.rule->body.branches) out.push_back(eval_sum(s, point));
    return out;
}

std::vector<double> Evaluator::eval_layer(const std::vector<std::int64_t>& layer) {
    if (!spec_.layered) fail(ErrorCode::NotLayerDescent, spec_.name + " has no layered annotation");
    const LayeredAnnotation& la = *spec_.layered;
    if (layer.size() != la.descent_indices.size()) {
        fail(ErrorCode::DimensionMismatch, "layer needs " + std::to_string(la.descent_indices.size()) + " values");
    }
    std::int64_t total = 0;
    IndexPoint point(spec_.indices.size(), 0);
    for (std::size_t k = 0; k < layer.size(); ++k) {
        total += layer[k];
        point[static_cast<std::size_t>(spec_.index_of(la.descent_indices[k]))] = layer[k];
    }
    const auto axis = static_cast<std::size_t>(spec_.index_of(la.output_axis));
    std::vector<double> out;
    for (std::int64_t t = 0; t <= total; ++t) {
        point[axis] = t;
        out.push_back(eval(point));
    }
    return out;
}

double eval(const RecurrenceSpec& spec, const IndexPoint& point, const EvalEnv& env) {
    return Evaluator(spec, env).eval(point);
}

std::vector<double> eval_layer(const RecurrenceSpec& spec, const std::vector<std::int64_t>& layer, const EvalEnv& env) {
    return Evaluator(spec, env).eval_layer(layer);
}

}  // namespace recursum
