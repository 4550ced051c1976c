#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace slog {

enum class BuiltinId : uint8_t { Add, Neq, Lt, Gt, Le, Ge, Eq };

struct BuiltinSig {
    BuiltinId id;
    std::string_view name;
    uint32_t arity;
};

const BuiltinSig* find_builtin(std::string_view name);
const BuiltinSig& builtin_sig(BuiltinId id);
inline bool is_builtin(std::string_view name) { return find_builtin(name) != nullptr; }

// Bit i of `bound` is set when argument i is ground. `+` needs any two of its
// three arguments, `=` needs one side, the comparisons need both.
bool builtin_mode_ok(BuiltinId id, uint32_t bound);
std::string builtin_mode_message(BuiltinId id);

struct BuiltinError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluates a builtin over a value type V. `Ops` provides
//   static std::optional<int64_t> as_int(const V&);
//   static V make_int(int64_t);
// and V must support ==. Unbound entries of `vals` are filled on success.
// Returns false when the binding set is empty.
template <typename Ops, typename V>
bool eval_builtin(BuiltinId id, std::span<V> vals, uint32_t bound) {
    auto has = [&](int i) { return (bound >> i) & 1u; };
    if (!builtin_mode_ok(id, bound)) throw BuiltinError(builtin_mode_message(id));
    switch (id) {
        case BuiltinId::Add: {
            int missing = !has(0) ? 0 : !has(1) ? 1 : !has(2) ? 2 : -1;
            std::optional<int64_t> x[3];
            for (int i = 0; i < 3; ++i)
                if (i != missing) {
                    x[i] = Ops::as_int(vals[i]);
                    if (!x[i]) return false;
                }
            int64_t r = 0;
            bool overflow = false;
            switch (missing) {
                case 2: overflow = __builtin_add_overflow(*x[0], *x[1], &r); break;
                case 1: overflow = __builtin_sub_overflow(*x[2], *x[0], &r); break;
                case 0: overflow = __builtin_sub_overflow(*x[2], *x[1], &r); break;
                default:
                    if (__builtin_add_overflow(*x[0], *x[1], &r)) throw BuiltinError("integer overflow in +");
                    return r == *x[2];
            }
            if (overflow) throw BuiltinError("integer overflow in +");
            vals[missing] = Ops::make_int(r);
            return true;
        }
        case BuiltinId::Eq:
            if (!has(0)) vals[0] = vals[1];
            else if (!has(1)) vals[1] = vals[0];
            return vals[0] == vals[1];
        case BuiltinId::Neq: return !(vals[0] == vals[1]);
        default: {
            auto a = Ops::as_int(vals[0]);
            auto b = Ops::as_int(vals[1]);
            if (!a || !b) return false;
            switch (id) {
                case BuiltinId::Lt: return *a < *b;
                case BuiltinId::Gt: return *a > *b;
                case BuiltinId::Le: return *a <= *b;
                default: return *a >= *b;
            }
        }
    }
}

}  // namespace slog
