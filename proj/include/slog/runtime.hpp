#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slog/database.hpp"
#include "slog/planner.hpp"

namespace slog {

struct RuntimeConfig {
    uint32_t workers = 1;
    uint32_t buckets = 4096;        // power of two, at most 2^16
    double rho = 4.0;               // subbucket refinement threshold
    uint32_t max_subbuckets = 64;
    size_t fuel = 100000;           // supersteps
};

struct PhaseTimes {
    double gather = 0, join = 0, exchange = 0, intern = 0, advance = 0;
};

struct SccStats {
    size_t scc = 0;
    size_t runs = 0;        // times the component was (re)started
    size_t supersteps = 0;
};

struct RunStats {
    size_t supersteps = 0;
    size_t passes = 0;
    size_t derived = 0;     // facts interned or stored by rules
    bool fuel_exhausted = false;
    PhaseTimes times;
    std::vector<SccStats> sccs;
};

// Bucket and subbucket placement of a tuple given in index column order.
uint32_t bucket_of(const IndexSpec& index, std::span<const Value> ordered, uint32_t bucket_count);
uint32_t subbucket_of(const IndexSpec& index, std::span<const Value> ordered, uint32_t subbuckets);

// Worker that owns subbucket `s` of bucket `b`. Subbucket 0 lives with the
// bucket's canonical owner.
inline uint32_t owner_of(uint32_t b, uint32_t s, uint32_t workers) { return (b + s) % workers; }

class Runtime {
public:
    Runtime(const Plan& plan, Database& db, RuntimeConfig cfg);
    ~Runtime();
    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    // Places every fact already in the database into the shards of its
    // relation. Call after ingesting the input facts.
    void load_database();

    // Evaluates the plan to a fixpoint or until fuel runs out.
    RunStats run();

    // Storage invariants: disjoint versions, every stored tuple is present in
    // all indices of its relation, every fact of a planned relation is stored
    // at its canonical bucket. Returns the first violation.
    std::optional<std::string> verify_storage() const;

    // Number of tuples stored for a planned relation (canonical index).
    size_t stored(RelId plan_rel) const;
    // Current subbucket count of a bucket under an index.
    uint32_t subbuckets(uint32_t index, uint32_t bucket) const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace slog
