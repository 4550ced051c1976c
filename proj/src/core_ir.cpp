#include "slog/core_ir.hpp"

#include <absl/container/flat_hash_map.h>

namespace slog {

std::string to_text(const Atom& a) { return a.is_var() ? a.var : to_text(a.lit); }

namespace {

std::string clause_body(const CoreClause& c) {
    std::string out = c.tag;
    for (const auto& a : c.args) {
        out.push_back(' ');
        out += to_text(a);
    }
    return out;
}

}  // namespace

std::string to_text(const CoreRule& r) {
    absl::flat_hash_map<std::string, int> uses;
    auto count = [&](const CoreClause& c) {
        for (const auto& a : c.args)
            if (a.is_var()) ++uses[a.var];
    };
    for (const auto& c : r.heads) count(c);
    for (const auto& c : r.body) count(c);

    auto rel = [&](const CoreClause& c) {
        if (uses.contains(c.id)) return "(= " + c.id + " (" + clause_body(c) + "))";
        return "(" + clause_body(c) + ")";
    };

    bool ground_fact = r.body.empty() && r.heads.size() == 1;
    for (const auto& a : r.heads.empty() ? std::vector<Atom>{} : r.heads[0].args)
        if (a.is_var()) ground_fact = false;
    if (ground_fact) return rel(r.heads[0]);

    std::string out = "[";
    for (size_t i = 0; i < r.heads.size(); ++i) {
        if (i) out.push_back(' ');
        out += rel(r.heads[i]);
    }
    out += " <--";
    int group = r.body.empty() ? 0 : r.body.front().group;
    for (const auto& c : r.body) {
        if (c.group != group) {
            out += " --";
            group = c.group;
        }
        out.push_back(' ');
        switch (c.kind) {
            case ClauseKind::Rel: out += rel(c); break;
            case ClauseKind::Neg: out += "~(" + clause_body(c) + ")"; break;
            case ClauseKind::Builtin: out += "(" + clause_body(c) + ")"; break;
        }
    }
    out.push_back(']');
    return out;
}

std::string to_text(const CoreProgram& p) {
    std::string out;
    for (const auto& r : p.rules) {
        out += to_text(r);
        out.push_back('\n');
    }
    return out;
}

}  // namespace slog
