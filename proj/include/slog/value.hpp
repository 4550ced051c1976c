#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <absl/container/flat_hash_map.h>
#include <absl/container/inlined_vector.h>

namespace slog {

using StrId = uint32_t;
using RelId = uint32_t;

// A fact's identity: high 16 bits name the owning bucket, low 48 bits are
// that bucket's allocation counter.
struct InternKey {
    uint64_t raw = 0;

    static constexpr int kCounterBits = 48;
    static constexpr uint64_t kCounterMask = (uint64_t{1} << kCounterBits) - 1;

    static constexpr InternKey make(uint32_t bucket, uint64_t counter) {
        return InternKey{(uint64_t{bucket} << kCounterBits) | (counter & kCounterMask)};
    }
    constexpr uint32_t bucket() const { return static_cast<uint32_t>(raw >> kCounterBits); }
    constexpr uint64_t counter() const { return raw & kCounterMask; }

    friend constexpr bool operator==(InternKey, InternKey) = default;
    friend constexpr auto operator<=>(InternKey, InternKey) = default;
};

// Source-level literal. Strings are owned here; the runtime uses pooled ids.
struct Literal {
    std::variant<int64_t, std::string, bool> v;

    static Literal integer(int64_t i) { return Literal{i}; }
    static Literal string(std::string s) { return Literal{std::move(s)}; }
    static Literal boolean(bool b) { return Literal{b}; }

    bool is_int() const { return std::holds_alternative<int64_t>(v); }
    bool is_str() const { return std::holds_alternative<std::string>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    int64_t as_int() const { return std::get<int64_t>(v); }
    const std::string& as_str() const { return std::get<std::string>(v); }
    bool as_bool() const { return std::get<bool>(v); }

    friend bool operator==(const Literal&, const Literal&) = default;
    friend auto operator<=>(const Literal& a, const Literal& b) { return a.v <=> b.v; }
};

std::string quote_string(std::string_view s);
std::string to_text(const Literal& lit);
size_t hash_literal(const Literal& lit);

enum class ValueKind : uint8_t { Min = 0, Bool = 1, Int = 2, Str = 3, Fact = 4 };

// Compact runtime value. Ordered by kind, then payload; integers are stored
// with the sign bit flipped so unsigned payload order matches numeric order.
class Value {
public:
    constexpr Value() = default;

    static constexpr Value boolean(bool b) { return Value(ValueKind::Bool, b ? 1 : 0); }
    static constexpr Value integer(int64_t i) {
        return Value(ValueKind::Int, static_cast<uint64_t>(i) ^ kSignBit);
    }
    static constexpr Value string(StrId s) { return Value(ValueKind::Str, s); }
    static constexpr Value fact(InternKey k) { return Value(ValueKind::Fact, k.raw); }
    // Sorts before every real value; used as a probe lower bound.
    static constexpr Value lowest() { return Value(ValueKind::Min, 0); }

    constexpr ValueKind kind() const { return kind_; }
    constexpr bool is_fact() const { return kind_ == ValueKind::Fact; }
    constexpr bool is_int() const { return kind_ == ValueKind::Int; }
    constexpr int64_t as_int() const { return static_cast<int64_t>(bits_ ^ kSignBit); }
    constexpr bool as_bool() const { return bits_ != 0; }
    constexpr StrId as_str() const { return static_cast<StrId>(bits_); }
    constexpr InternKey as_fact() const { return InternKey{bits_}; }
    constexpr uint64_t bits() const { return bits_; }

    friend constexpr bool operator==(Value a, Value b) {
        return a.kind_ == b.kind_ && a.bits_ == b.bits_;
    }
    friend constexpr std::strong_ordering operator<=>(Value a, Value b) {
        if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
        return a.bits_ <=> b.bits_;
    }

    template <typename H>
    friend H AbslHashValue(H h, Value v) {
        return H::combine(std::move(h), static_cast<uint8_t>(v.kind_), v.bits_);
    }

private:
    static constexpr uint64_t kSignBit = uint64_t{1} << 63;
    constexpr Value(ValueKind k, uint64_t bits) : bits_(bits), kind_(k) {}

    uint64_t bits_ = 0;
    ValueKind kind_ = ValueKind::Min;
};

using Tuple = absl::InlinedVector<Value, 4>;

// Fixed-seed 64-bit mixing (splitmix64 finalizer). Placement must not depend
// on process-level hash randomisation, so std::hash and absl::Hash are not used.
constexpr uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

constexpr uint64_t kBucketSeed = 0x736c6f672d62756bULL;
constexpr uint64_t kSubbucketSeed = 0x736c6f672d737562ULL;

inline uint64_t hash_values(std::span<const Value> vals, uint64_t seed) {
    uint64_t h = seed;
    for (Value v : vals) {
        h = mix64(h + 0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(v.kind()));
        h = mix64(h ^ v.bits());
    }
    return mix64(h ^ vals.size());
}

class StringPool {
public:
    StrId intern(std::string_view s);
    std::string_view get(StrId id) const { return strings_[id]; }
    size_t size() const { return strings_.size(); }

private:
    std::deque<std::string> strings_;
    absl::flat_hash_map<std::string_view, StrId> ids_;
};

}  // namespace slog

template <>
struct std::hash<slog::Literal> {
    size_t operator()(const slog::Literal& l) const { return slog::hash_literal(l); }
};
