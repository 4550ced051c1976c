#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "slog/builtins.hpp"
#include "slog/core_ir.hpp"
#include "slog/database.hpp"

namespace slog {

using RelKey = std::pair<std::string, uint32_t>;  // (tag, arity)

// Strongly connected components of the relation dependence graph, in
// evaluation order. Edges run from every body relation of a rule to its root
// head relations and from the roots to the nested heads; a rule belongs to
// the component of its root heads.
struct CoreScc {
    std::vector<uint32_t> rules;  // indices into CoreProgram::rules
    std::vector<RelKey> writes;   // every head relation, nested ones included
    std::vector<RelKey> reads;    // positive and negated body relations
};

// When the nested edges put a negation inside its own component, the nested
// edges are dropped and a warning is added. Throws CompileError if a
// component still negates a relation it writes.
std::vector<CoreScc> stratify_core(const CoreProgram& program, std::vector<Diagnostic>* warnings = nullptr);

// Index over columns 0..arity of a relation, where column 0 is the fact id.
// The first key_len columns of `order` determine the bucket.
struct IndexSpec {
    RelId rel = 0;
    std::vector<uint32_t> order;
    uint32_t key_len = 0;
    bool canonical = false;

    friend bool operator==(const IndexSpec&, const IndexSpec&) = default;
};

struct PTerm {
    enum class Kind : uint8_t { Var, Lit, Ignore, HeadRef };
    Kind kind = Kind::Ignore;
    uint32_t slot = 0;  // variable slot, or head position for HeadRef
    Literal lit;
};

// A positive body clause; cols[0] is the id column.
struct PlanAtom {
    RelId rel = 0;
    std::vector<PTerm> cols;
    uint32_t index = 0;
};

struct PlanFilter {
    ClauseKind kind = ClauseKind::Builtin;
    BuiltinId builtin = BuiltinId::Eq;
    RelId rel = 0;             // negation only
    std::vector<PTerm> args;   // builtin args, or negated columns 1..arity
    uint32_t index = 0;        // negation probe index
    uint32_t probe_len = 0;    // leading index columns fixed by the probe
};

struct PlanHead {
    RelId rel = 0;
    std::vector<PTerm> args;  // columns 1..arity; HeadRef names an earlier head
};

// At most two positive body clauses.
struct BinaryRule {
    std::string label;
    uint32_t core_rule = 0;
    std::vector<PlanAtom> body;
    std::vector<PlanFilter> filters;
    std::vector<PlanHead> heads;
    std::vector<std::string> slots;
    bool cross_product = false;
};

enum class Version : uint8_t { Total, Delta };

struct RuleVariant {
    uint32_t rule = 0;
    Version v[2] = {Version::Total, Version::Total};
};

struct PlanScc {
    std::vector<uint32_t> rules;    // binary rules
    std::vector<RelId> writes;      // dynamic relations
    std::vector<RelId> reads;
    std::vector<RuleVariant> seed;  // first superstep: everything against totals
    std::vector<RuleVariant> delta; // later supersteps: semi-naive variants
};

struct PlanRelation {
    std::string tag;
    uint32_t arity = 0;
    bool intermediate = false;  // join intermediate introduced by the planner
    uint32_t canonical_index = 0;
    std::vector<uint32_t> indices;
};

struct Plan {
    std::vector<PlanRelation> relations;
    std::vector<IndexSpec> indices;
    std::vector<BinaryRule> rules;
    std::vector<PlanScc> sccs;
    std::vector<Diagnostic> warnings;

    RelId declare(const std::string& tag, uint32_t arity, bool intermediate = false);
    // Throws std::out_of_range for unknown relations.
    RelId relation_id(const std::string& tag, uint32_t arity) const;
    std::string dump() const;

private:
    absl::flat_hash_map<RelKey, RelId> ids_;
};

// Splits a core rule into binary rules, introducing join intermediates.
// Exposed for testing; plan_program applies it to every rule.
std::vector<BinaryRule> partition_rule(const CoreRule& rule, uint32_t core_index, Plan& plan);

// Chooses an index for each body clause and negation probe of `rules`,
// adding to the plan's catalog, and makes sure every relation has its
// canonical index.
void select_indices(Plan& plan);

std::vector<RuleVariant> incrementalize(const Plan& plan, const PlanScc& scc, bool seed);

Plan plan_program(const CoreProgram& program);

}  // namespace slog
