#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "slog/core_ir.hpp"
#include "slog/parser.hpp"
#include "slog/surface.hpp"

namespace slog {

// Every rule written `head <-- body`, nested rules lifted out (inheriting the
// enclosing body), disjunctions split, and unrelated heads given separate rules.
std::vector<SurfaceRule> canonicalize(const SurfaceProgram& program);

// Rewrites list forms into `$cons`/`$nil` clauses. Returns true when the rule
// splices a non-final list element and so needs the generated append rules.
bool desugar_lists(SurfaceRule& rule);

// A rule with all nesting removed, before it is split at `!` clauses.
// Clauses are grouped into trees: the head, one tree per top-level body item,
// one per `?` clause, and one per `{}` lookup made from head position.
struct FlatRule {
    enum class TreeKind : uint8_t { Head, Trigger, Positive, Filter };
    struct Tree {
        TreeKind kind;
        std::vector<int> bangs;  // `!` units referenced from inside this tree
    };
    struct Entry {
        CoreClause clause;
        int tree = -1;  // -1 when the clause belongs to a `!` unit
        int bang = -1;
        int order = 0;  // pre-order position: a clause precedes its subclauses
    };
    struct Bang {
        std::string id;
    };

    std::vector<Entry> clauses;
    std::vector<Tree> trees;
    std::vector<Bang> bangs;
    std::vector<std::string> var_order;  // variables by first source appearance
    Span span;
};

FlatRule flatten_rule(const SurfaceRule& rule);

// Resolves `=` constraints and merges clauses that must denote the same
// fact. Returns false if the rule can never fire (a warning is added).
bool static_unify(FlatRule& rule, std::vector<Diagnostic>& warnings);

// Splits a rule at its `!` clauses into stage rules chained by
// `$<label>-midN` relations. Rules without `!` come back unchanged.
std::vector<CoreRule> split_on_bang(const FlatRule& rule, const std::string& label);

// Full pipeline: canonicalize, lists, flatten, unify, split, scope check.
// Throws CompileError.
CoreProgram compile_to_core(const SurfaceProgram& program);
CoreProgram compile_source(std::string_view text, const ParseOptions& opts = {});

}  // namespace slog
