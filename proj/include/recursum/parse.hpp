#pragma once

// Textual front end: rule expressions, constraint lists and the line-oriented
// spec-file format, plus the inverse renderers.
//
// Spec-file grammar (one directive per line, `#` starts a comment):
//
//   recurrence NAME
//   namespace NS
//   indices i j t
//   scalars a b            (optional)
//   sequences c            (optional)
//   validity <constraints>
//   base i=0 j=0 t=0 : <value>
//   rule "name" when <constraints> : <expr> [scale <coeff>]
//   average "name" when <constraints> : <expr> | <expr> [| ...]
//   layered axis t descend i j
//   direction upward|downward

#include "recursum/spec.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace recursum {

/// Parses a rule body. `E[...]` terms become RecCalls; top-level `+`/`-`
/// split terms and products/quotients distribute over them.
Sum parse_expression(std::string_view text, const RecurrenceSpec& ctx);

/// Parses a call-free value (base values): functions and `pi` are allowed.
CoeffExpr parse_value(std::string_view text, const RecurrenceSpec& ctx);

/// Parses a call-free coefficient as used in rule scales (no functions).
CoeffExpr parse_coefficient(std::string_view text, const RecurrenceSpec& ctx);

/// Conjunction split on `&&`, `and` or `;`.
std::vector<Constraint> parse_constraints(std::string_view text, const RecurrenceSpec& ctx);

/// Structural parse without validation; throws ParseError with a line number.
RecurrenceSpec parse_spec_file(std::string_view text);

/// parse_spec_file followed by validate_spec; throws ValidationError when
/// diagnostics are produced.
RecurrenceSpec load_spec_file(std::string_view text);

std::string render_int(const IntExpr& e);
std::string render_coeff(const CoeffExpr& e);
std::string render_constraints(const std::vector<Constraint>& cs, const RecurrenceSpec& spec);
std::string render_sum(const Sum& sum, const RecurrenceSpec& spec);
std::string render_spec(const RecurrenceSpec& spec);

/// Shortest decimal text that reads back to the same double, always carrying
/// a '.' or exponent so it is never taken for an integer literal.
std::string format_real(double v);

bool is_identifier(std::string_view s);
bool is_reserved_name(std::string_view s);

}  // namespace recursum
