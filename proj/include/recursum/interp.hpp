#pragma once

// Memoized top-down reference evaluator. Every backend is checked against it.

#include "recursum/spec.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace recursum {

struct EvalEnv {
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> sequences;
};

/// EvalEnv resolved against one spec: values in declaration order.
struct BoundEnv {
    std::vector<double> scalars;
    std::vector<std::vector<double>> sequences;

    /// Throws MissingBinding when a declared input is not bound.
    static BoundEnv bind(const RecurrenceSpec& spec, const EvalEnv& env);
};

/// Evaluates a call-free coefficient at `point`. Throws DivisionByZero and
/// SequenceOutOfRange.
double eval_coeff(const CoeffExpr& e, const IndexPoint& point, const BoundEnv& env);

/// Multiplies `sum` by the scale, except that a reciprocal scale `1/d` divides
/// by `d` so that `scale 1/n` is an exact division.
double apply_scale(double sum, const CoeffExpr& scale, const IndexPoint& point, const BoundEnv& env);

struct Selection {
    enum class Kind { Base, Matched, OutOfDomain, NoRule };
    Kind kind = Kind::NoRule;
    const BaseCase* base = nullptr;
    const Rule* rule = nullptr;
};

/// `ordered` must come from order_rules(spec); pointers refer into it or spec.
Selection select_rule(const RecurrenceSpec& spec, const std::vector<Rule>& ordered, const IndexPoint& point);

class Evaluator {
public:
    Evaluator(const RecurrenceSpec& spec, const EvalEnv& env, bool memoize = true);

    double eval(const IndexPoint& point);

    /// Values along the output axis for one layer; `layer` lists the descent
    /// index values in annotation order. Length is their sum plus one.
    std::vector<double> eval_layer(const std::vector<std::int64_t>& layer);

    /// Unscaled value of every branch of the rule selected at `point`.
    std::vector<double> branch_values(const IndexPoint& point);

    Selection select(const IndexPoint& point) const { return select_rule(spec_, ordered_, point); }
    const BoundEnv& env() const { return env_; }

private:
    double compute(const IndexPoint& point);
    double eval_sum(const Sum& sum, const IndexPoint& point);

    const RecurrenceSpec& spec_;
    std::vector<Rule> ordered_;
    BoundEnv env_;
    bool memoize_;
    std::map<IndexPoint, double> memo_;
    std::set<IndexPoint> active_;
};

double eval(const RecurrenceSpec& spec, const IndexPoint& point, const EvalEnv& env);
std::vector<double> eval_layer(const RecurrenceSpec& spec, const std::vector<std::int64_t>& layer, const EvalEnv& env);

}  // namespace recursum
