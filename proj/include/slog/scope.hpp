#pragma once

#include <vector>

#include "slog/core_ir.hpp"

namespace slog {

// Range restriction for core rules: head variables, negated variables and
// builtin inputs must all be bound by positive body clauses (or by builtins
// whose own inputs are). Wildcards under negation are existential.
std::vector<Diagnostic> check_scope(const CoreProgram& program);

}  // namespace slog
