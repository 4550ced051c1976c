#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slog/value.hpp"

namespace slog {

// Reserved tags used by list syntax.
inline constexpr std::string_view kConsTag = "$cons";
inline constexpr std::string_view kNilTag = "$nil";

struct FactTree;
using TreePtr = std::shared_ptr<const FactTree>;
using TreeChild = std::variant<Literal, TreePtr>;

// A ground fact written out structurally, with subfacts inline. Trees are
// immutable and share children freely.
struct FactTree {
    std::string tag;
    std::vector<TreeChild> children;
    size_t hash = 0;

    static TreePtr make(std::string tag, std::vector<TreeChild> children);
    size_t arity() const { return children.size(); }
};

bool tree_equal(const FactTree& a, const FactTree& b);
bool child_equal(const TreeChild& a, const TreeChild& b);
size_t child_hash(const TreeChild& c);

struct TreeHash {
    using is_transparent = void;
    size_t operator()(const TreePtr& t) const { return t->hash; }
};
struct TreeEq {
    using is_transparent = void;
    bool operator()(const TreePtr& a, const TreePtr& b) const {
        return a == b || tree_equal(*a, *b);
    }
};

// Text form: `(tag child ...)`; `$cons`/`$nil` chains print as `[a b]`, or
// `[a b tail ...]` when the chain does not end in `$nil`.
std::string to_text(const FactTree& t);
std::string to_text(const TreeChild& c);

struct FactParseError : std::runtime_error {
    FactParseError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

// Parses whitespace-separated ground facts. `;` starts a line comment.
std::vector<TreePtr> parse_facts(std::string_view text);
TreePtr parse_fact(std::string_view text);

}  // namespace slog
