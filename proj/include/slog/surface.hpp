#pragma once

#include <memory>
#include <string>
#include <vector>

#include "slog/diagnostic.hpp"
#include "slog/value.hpp"

namespace slog {

struct SurfaceRule;

enum class ItemKind {
    Var,       // name
    Wildcard,  // _
    Lit,       // lit
    Clause,    // (tag items...)
    Huh,       // ?(tag items...)
    Bang,      // !(tag items...)
    Curly,     // {tag items...}
    Neg,       // ~(tag items...)
    Unif,      // (= name (tag items...)); items[0] is the clause
    List,      // [items...], each element may be spliced with `...`
    HuhList,   // ?[...]
    BangList,  // ![...]
    Or,        // (or items...)
    And,       // (and items...)
    HintSep,   // --
    Rule,      // nested [heads <-- bodies]
};

struct Item {
    ItemKind kind = ItemKind::Var;
    std::string name;  // tag for clause forms, variable name for Var/Unif
    Literal lit;
    std::vector<Item> items;
    bool splice = false;  // list element followed by `...`
    std::shared_ptr<SurfaceRule> rule;
    Span span;

    bool is_clause_form() const {
        return kind == ItemKind::Clause || kind == ItemKind::Huh || kind == ItemKind::Bang ||
               kind == ItemKind::Curly || kind == ItemKind::Neg;
    }
};

// `[heads <-- bodies]`, `[bodies --> heads]`, or a bare top-level clause
// (stored as a rule with one head and no body).
struct SurfaceRule {
    std::vector<Item> heads;
    std::vector<Item> bodies;
    bool forward = false;  // written with -->
    bool bare = false;
    Span span;
};

struct SurfaceProgram {
    std::vector<SurfaceRule> rules;
};

std::string to_text(const Item& item);
std::string to_text(const SurfaceRule& rule);
std::string to_text(const SurfaceProgram& program);

// Structural equality ignoring spans.
bool same_item(const Item& a, const Item& b);
bool same_rule(const SurfaceRule& a, const SurfaceRule& b);
bool same_program(const SurfaceProgram& a, const SurfaceProgram& b);

}  // namespace slog
