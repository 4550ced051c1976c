#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <absl/container/node_hash_map.h>

#include "slog/fact_text.hpp"
#include "slog/value.hpp"

namespace slog {

struct RelationInfo {
    std::string tag;
    uint32_t arity = 0;
};

struct FactRow {
    RelId rel = 0;
    InternKey key;
    Tuple args;
};

struct InternResult {
    InternKey key;
    bool inserted = false;
};

struct DatabaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural identity of a fact: relation plus argument values.
struct FactIdentity {
    RelId rel = 0;
    Tuple args;
};

struct FactIdentityView {
    RelId rel;
    std::span<const Value> args;
};

struct FactIdentityHash {
    using is_transparent = void;
    size_t operator()(const FactIdentity& f) const { return hash(f.rel, f.args); }
    size_t operator()(const FactIdentityView& f) const { return hash(f.rel, f.args); }
    static size_t hash(RelId rel, std::span<const Value> args) {
        return hash_values(args, kBucketSeed ^ (uint64_t{rel} * 0x9e3779b97f4a7c15ULL));
    }
};

struct FactIdentityEq {
    using is_transparent = void;
    template <typename A, typename B>
    bool operator()(const A& a, const B& b) const {
        return a.rel == b.rel && std::equal(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
    }
};

// One bucket of the intern table. Only the bucket's owning worker may touch it
// while a superstep is running.
class InternBucket {
public:
    InternResult intern(uint32_t bucket_id, RelId rel, std::span<const Value> args);
    std::optional<InternKey> find(RelId rel, std::span<const Value> args) const;
    const FactIdentity* lookup(uint64_t counter) const {
        return counter < by_counter_.size() ? by_counter_[counter] : nullptr;
    }
    size_t size() const { return by_counter_.size(); }

    // Visits facts in allocation order.
    template <typename F>
    void for_each(F&& f) const {
        for (size_t i = 0; i < by_counter_.size(); ++i) f(i, *by_counter_[i]);
    }

private:
    absl::node_hash_map<FactIdentity, InternKey, FactIdentityHash, FactIdentityEq> table_;
    std::vector<const FactIdentity*> by_counter_;
};

// Relation catalog, string pool and the intern table (the bijection between
// keys and structural facts). Every interned fact is a stored fact.
class Database {
public:
    explicit Database(uint32_t bucket_count = 4096);

    StringPool& strings() { return strings_; }
    const StringPool& strings() const { return strings_; }

    RelId declare(std::string_view tag, uint32_t arity);
    std::optional<RelId> find_relation(std::string_view tag, uint32_t arity) const;
    const RelationInfo& relation(RelId id) const { return relations_.at(id); }
    size_t relation_count() const { return relations_.size(); }

    uint32_t bucket_count() const { return static_cast<uint32_t>(buckets_.size()); }
    // Bucket of a fact under its canonical index, i.e. hashed over all arguments.
    uint32_t canonical_bucket(std::span<const Value> args) const {
        return static_cast<uint32_t>(hash_values(args, kBucketSeed) & (buckets_.size() - 1));
    }
    InternBucket& bucket(uint32_t b) { return buckets_[b]; }
    const InternBucket& bucket(uint32_t b) const { return buckets_[b]; }

    InternResult intern_fact(RelId rel, std::span<const Value> args);
    InternResult intern_fact(std::string_view tag, std::span<const Value> args);
    std::optional<InternKey> find_fact(RelId rel, std::span<const Value> args) const;

    FactRow resolve(InternKey key) const;
    const FactIdentity* try_resolve(InternKey key) const;

    TreePtr reify(InternKey key) const;
    TreeChild reify_value(Value v) const;
    Value literal_value(const Literal& lit);
    Literal value_literal(Value v) const;

    InternKey ingest(const FactTree& tree);
    Value ingest_child(const TreeChild& child);

    std::vector<InternKey> facts_of(RelId rel) const;
    size_t fact_count() const;

    template <typename F>
    void for_each_fact(F&& f) const {
        for (uint32_t b = 0; b < buckets_.size(); ++b)
            buckets_[b].for_each([&](uint64_t counter, const FactIdentity& id) {
                f(InternKey::make(b, counter), id);
            });
    }

    // Every argument key of every stored fact resolves to a stored fact.
    // Returns a description of the first violation, or nullopt.
    std::optional<std::string> check_subfact_closure() const;

private:
    StringPool strings_;
    std::vector<RelationInfo> relations_;
    absl::flat_hash_map<std::pair<std::string, uint32_t>, RelId> relation_ids_;
    std::vector<InternBucket> buckets_;
};

// Reifies many keys while sharing subtrees between calls.
class Reifier {
public:
    explicit Reifier(const Database& db) : db_(db) {}
    TreePtr operator()(InternKey key);
    TreeChild value(Value v);

private:
    const Database& db_;
    absl::flat_hash_map<uint64_t, TreePtr> memo_;
};

}  // namespace slog
