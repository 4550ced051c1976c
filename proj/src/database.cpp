#include "slog/database.hpp"

#include <bit>

namespace slog {

InternResult InternBucket::intern(uint32_t bucket_id, RelId rel, std::span<const Value> args) {
    if (auto it = table_.find(FactIdentityView{rel, args}); it != table_.end())
        return {it->second, false};
    uint64_t counter = by_counter_.size();
    if (counter > InternKey::kCounterMask)
        throw DatabaseError("intern counter exhausted in bucket " + std::to_string(bucket_id));
    InternKey key = InternKey::make(bucket_id, counter);
    auto [it, ok] = table_.emplace(FactIdentity{rel, Tuple(args.begin(), args.end())}, key);
    by_counter_.push_back(&it->first);
    return {key, true};
}

std::optional<InternKey> InternBucket::find(RelId rel, std::span<const Value> args) const {
    if (auto it = table_.find(FactIdentityView{rel, args}); it != table_.end()) return it->second;
    return std::nullopt;
}

Database::Database(uint32_t bucket_count) {
    if (bucket_count == 0 || !std::has_single_bit(bucket_count) || bucket_count > (1u << 16))
        throw DatabaseError("bucket count must be a power of two in [1, 65536]");
    buckets_.resize(bucket_count);
}

RelId Database::declare(std::string_view tag, uint32_t arity) {
    auto key = std::make_pair(std::string(tag), arity);
    if (auto it = relation_ids_.find(key); it != relation_ids_.end()) return it->second;
    RelId id = static_cast<RelId>(relations_.size());
    relations_.push_back({std::string(tag), arity});
    relation_ids_.emplace(std::move(key), id);
    return id;
}

std::optional<RelId> Database::find_relation(std::string_view tag, uint32_t arity) const {
    if (auto it = relation_ids_.find(std::make_pair(std::string(tag), arity)); it != relation_ids_.end())
        return it->second;
    return std::nullopt;
}

InternResult Database::intern_fact(RelId rel, std::span<const Value> args) {
    if (rel >= relations_.size()) throw DatabaseError("unknown relation id " + std::to_string(rel));
    const auto& info = relations_[rel];
    if (args.size() != info.arity)
        throw DatabaseError("arity mismatch for " + info.tag + ": declared " + std::to_string(info.arity) +
                            ", got " + std::to_string(args.size()));
    for (Value v : args)
        if (v.is_fact() && !try_resolve(v.as_fact()))
            throw DatabaseError("argument of " + info.tag + " references an unknown fact");
    uint32_t b = canonical_bucket(args);
    return buckets_[b].intern(b, rel, args);
}

InternResult Database::intern_fact(std::string_view tag, std::span<const Value> args) {
    return intern_fact(declare(tag, static_cast<uint32_t>(args.size())), args);
}

std::optional<InternKey> Database::find_fact(RelId rel, std::span<const Value> args) const {
    return buckets_[canonical_bucket(args)].find(rel, args);
}

const FactIdentity* Database::try_resolve(InternKey key) const {
    if (key.bucket() >= buckets_.size()) return nullptr;
    return buckets_[key.bucket()].lookup(key.counter());
}

FactRow Database::resolve(InternKey key) const {
    const FactIdentity* id = try_resolve(key);
    if (!id) throw DatabaseError("unknown intern key " + std::to_string(key.raw));
    return FactRow{id->rel, key, id->args};
}

Value Database::literal_value(const Literal& lit) {
    if (lit.is_int()) return Value::integer(lit.as_int());
    if (lit.is_bool()) return Value::boolean(lit.as_bool());
    return Value::string(strings_.intern(lit.as_str()));
}

Literal Database::value_literal(Value v) const {
    switch (v.kind()) {
        case ValueKind::Int: return Literal::integer(v.as_int());
        case ValueKind::Bool: return Literal::boolean(v.as_bool());
        case ValueKind::Str: return Literal::string(std::string(strings_.get(v.as_str())));
        default: throw DatabaseError("value is not a literal");
    }
}

TreeChild Database::reify_value(Value v) const { return Reifier(*this).value(v); }

TreePtr Database::reify(InternKey key) const { return Reifier(*this)(key); }

TreeChild Reifier::value(Value v) {
    if (v.is_fact()) return (*this)(v.as_fact());
    return db_.value_literal(v);
}

TreePtr Reifier::operator()(InternKey key) {
    if (auto it = memo_.find(key.raw); it != memo_.end()) return it->second;
    // Iterative post-order: fact graphs are DAGs that may be deep.
    std::vector<std::pair<InternKey, bool>> stack{{key, false}};
    while (!stack.empty()) {
        auto [k, expanded] = stack.back();
        stack.pop_back();
        if (memo_.contains(k.raw)) continue;
        const FactIdentity* id = db_.try_resolve(k);
        if (!id) throw DatabaseError("unknown intern key " + std::to_string(k.raw));
        if (!expanded) {
            stack.push_back({k, true});
            for (Value v : id->args)
                if (v.is_fact() && !memo_.contains(v.as_fact().raw)) stack.push_back({v.as_fact(), false});
            continue;
        }
        std::vector<TreeChild> kids;
        kids.reserve(id->args.size());
        for (Value v : id->args) {
            if (v.is_fact())
                kids.emplace_back(memo_.at(v.as_fact().raw));
            else
                kids.emplace_back(db_.value_literal(v));
        }
        memo_.emplace(k.raw, FactTree::make(db_.relation(id->rel).tag, std::move(kids)));
    }
    return memo_.at(key.raw);
}

Value Database::ingest_child(const TreeChild& child) {
    if (const auto* t = std::get_if<TreePtr>(&child)) return Value::fact(ingest(**t));
    return literal_value(std::get<Literal>(child));
}

InternKey Database::ingest(const FactTree& tree) {
    Tuple args;
    for (const auto& c : tree.children) args.push_back(ingest_child(c));
    return intern_fact(tree.tag, args).key;
}

std::vector<InternKey> Database::facts_of(RelId rel) const {
    std::vector<InternKey> out;
    for_each_fact([&](InternKey k, const FactIdentity& id) {
        if (id.rel == rel) out.push_back(k);
    });
    return out;
}

size_t Database::fact_count() const {
    size_t n = 0;
    for (const auto& b : buckets_) n += b.size();
    return n;
}

std::optional<std::string> Database::check_subfact_closure() const {
    std::optional<std::string> err;
    for_each_fact([&](InternKey k, const FactIdentity& id) {
        if (err) return;
        for (Value v : id.args)
            if (v.is_fact() && !try_resolve(v.as_fact())) {
                err = "fact " + std::to_string(k.raw) + " of " + relations_[id.rel].tag +
                      " references missing key " + std::to_string(v.as_fact().raw);
                return;
            }
    });
    return err;
}

}  // namespace slog
