#pragma once

#include <string>
#include <vector>

#include "slog/diagnostic.hpp"
#include "slog/value.hpp"

namespace slog {

struct Atom {
    enum class Kind : uint8_t { Var, Lit };
    Kind kind = Kind::Var;
    std::string var;
    Literal lit;

    static Atom variable(std::string name) { return Atom{Kind::Var, std::move(name), {}}; }
    static Atom literal(Literal l) { return Atom{Kind::Lit, {}, std::move(l)}; }
    bool is_var() const { return kind == Kind::Var; }

    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class ClauseKind : uint8_t { Rel, Neg, Builtin };

// A flat clause: no nested clauses, only variables and literals. Relation
// clauses carry an id variable standing for the fact's intern key.
struct CoreClause {
    ClauseKind kind = ClauseKind::Rel;
    std::string tag;
    std::string id;
    std::vector<Atom> args;
    int group = 0;  // partition-hint group within the body

    friend bool operator==(const CoreClause&, const CoreClause&) = default;
};

// Heads are listed inner-first: a head clause may use the id of an earlier
// head clause as an argument. Head ids are never bound by the body.
struct CoreRule {
    std::vector<CoreClause> heads;
    std::vector<CoreClause> body;
    Span span;
    std::string label;
};

struct CoreProgram {
    std::vector<CoreRule> rules;
    std::vector<Diagnostic> warnings;
};

inline bool is_generated_relation(const std::string& tag) { return !tag.empty() && tag[0] == '$'; }

std::string to_text(const Atom& a);
std::string to_text(const CoreRule& r);
std::string to_text(const CoreProgram& p);

}  // namespace slog
