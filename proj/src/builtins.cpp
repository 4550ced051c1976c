#include "slog/builtins.hpp"

#include <array>
#include <bit>

namespace slog {
namespace {

constexpr std::array<BuiltinSig, 7> kBuiltins{{
    {BuiltinId::Add, "+", 3},
    {BuiltinId::Neq, "=/=", 2},
    {BuiltinId::Lt, "<", 2},
    {BuiltinId::Gt, ">", 2},
    {BuiltinId::Le, "<=", 2},
    {BuiltinId::Ge, ">=", 2},
    {BuiltinId::Eq, "=", 2},
}};

}  // namespace

const BuiltinSig* find_builtin(std::string_view name) {
    for (const auto& b : kBuiltins)
        if (b.name == name) return &b;
    return nullptr;
}

const BuiltinSig& builtin_sig(BuiltinId id) { return kBuiltins[static_cast<size_t>(id)]; }

bool builtin_mode_ok(BuiltinId id, uint32_t bound) {
    int n = std::popcount(bound & 0b111u);
    switch (id) {
        case BuiltinId::Add: return n >= 2;
        case BuiltinId::Eq: return n >= 1;
        default: return (bound & 0b11u) == 0b11u;
    }
}

std::string builtin_mode_message(BuiltinId id) {
    switch (id) {
        case BuiltinId::Add: return "+ needs at least two ground arguments";
        case BuiltinId::Eq: return "= needs at least one ground argument";
        default: return std::string(builtin_sig(id).name) + " needs both arguments ground";
    }
}

}  // namespace slog
