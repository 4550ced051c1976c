#include "slog/value.hpp"

#include <absl/hash/hash.h>

namespace slog {

std::string quote_string(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string to_text(const Literal& lit) {
    if (lit.is_int()) return std::to_string(lit.as_int());
    if (lit.is_bool()) return lit.as_bool() ? "#t" : "#f";
    return quote_string(lit.as_str());
}

size_t hash_literal(const Literal& lit) {
    uint64_t h = lit.is_int()    ? static_cast<uint64_t>(lit.as_int())
                 : lit.is_bool() ? uint64_t{lit.as_bool()}
                                 : std::hash<std::string>{}(lit.as_str());
    return mix64(h + lit.v.index() * 0x9e3779b97f4a7c15ULL);
}

StrId StringPool::intern(std::string_view s) {
    if (auto it = ids_.find(s); it != ids_.end()) return it->second;
    StrId id = static_cast<StrId>(strings_.size());
    strings_.emplace_back(s);
    ids_.emplace(strings_.back(), id);
    return id;
}

}  // namespace slog
