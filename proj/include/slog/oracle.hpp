#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "slog/core_ir.hpp"
#include "slog/fact_text.hpp"
#include "slog/planner.hpp"

namespace slog {

// A set of structural facts with per-column lookup. The reference semantics
// works on trees directly and never assigns intern keys.
class FactSet {
public:
    struct Relation {
        std::vector<TreePtr> facts;
        // column -> child hash -> positions in `facts`
        std::vector<absl::flat_hash_map<size_t, std::vector<uint32_t>>> columns;
    };

    // Inserts `t` alone. Returns true if it was new.
    bool insert(const TreePtr& t);
    // Inserts `t` and every subfact of it.
    size_t insert_closed(const TreePtr& t);
    bool contains(const TreePtr& t) const { return all_.contains(t); }
    size_t size() const { return all_.size(); }

    const Relation* relation(const std::string& tag, uint32_t arity) const;
    size_t count(const RelKey& k) const;
    const absl::flat_hash_set<TreePtr, TreeHash, TreeEq>& all() const { return all_; }

    // Facts not nested inside an argument of the same set; the subfact
    // closure is reachable from these.
    bool subfact_closed() const;

private:
    absl::flat_hash_set<TreePtr, TreeHash, TreeEq> all_;
    std::map<RelKey, Relation> rels_;
};

// The fact and every fact nested inside it.
std::vector<TreePtr> unroll(const TreePtr& f);

// One application of the immediate-consequence operator for `rules` (all
// rules when empty). Negated clauses are tested against `db` itself.
FactSet immediate_consequence(const CoreProgram& program, const FactSet& db,
                              const std::vector<uint32_t>& rules = {});

struct NaiveResult {
    FactSet db;
    bool fuel_exhausted = false;
    size_t iterations = 0;
};

// Stratum by stratum least fixpoint. Components are revisited while facts
// written by a later component (as subfacts) feed an earlier one. `fuel`
// bounds the total number of operator applications.
NaiveResult naive_fixpoint(const CoreProgram& program, const std::vector<TreePtr>& edb, size_t fuel = 100000);

// True iff every substitution that satisfies the body of `rule` in `db` puts
// the instantiated head (with its subfacts) in `db`.
bool models(const FactSet& db, const CoreRule& rule);

// Label of the first rule not modelled by `db`, if any.
std::optional<std::string> check_models(const FactSet& db, const CoreProgram& program);

}  // namespace slog
