#pragma once

#include "recursum/spec.hpp"

#include <vector>

namespace recursum {

/// Checks every structural invariant of a parsed spec. Never throws; an empty
/// result means the spec is usable by the interpreter and all generators.
std::vector<Diagnostic> validate_spec(const RecurrenceSpec& spec);

/// Rules sorted most-specific first: more `==` guards, then more guards.
/// Stable, so ties keep declaration order.
std::vector<Rule> order_rules(const RecurrenceSpec& spec);

/// True when `vec` is lexicographically negative (first nonzero entry < 0).
bool lex_negative(const std::vector<int>& vec);

}  // namespace recursum
