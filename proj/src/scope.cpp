#include "slog/scope.hpp"

#include <absl/container/flat_hash_set.h>

#include "slog/builtins.hpp"

namespace slog {

std::vector<Diagnostic> check_scope(const CoreProgram& program) {
    std::vector<Diagnostic> out;
    for (const auto& rule : program.rules) {
        auto error = [&](std::string msg) {
            out.push_back({Severity::Error, rule.span, "in rule " + rule.label + ": " + std::move(msg)});
        };
        absl::flat_hash_set<std::string> bound;
        for (const auto& c : rule.body) {
            if (c.kind != ClauseKind::Rel) continue;
            bound.insert(c.id);
            for (const auto& a : c.args)
                if (a.is_var()) bound.insert(a.var);
        }
        std::vector<const CoreClause*> builtins;
        for (const auto& c : rule.body)
            if (c.kind == ClauseKind::Builtin) builtins.push_back(&c);
        for (bool changed = true; changed;) {
            changed = false;
            for (auto& b : builtins) {
                if (!b) continue;
                uint32_t mask = 0;
                for (size_t k = 0; k < b->args.size(); ++k)
                    if (!b->args[k].is_var() || bound.contains(b->args[k].var)) mask |= 1u << k;
                if (!builtin_mode_ok(find_builtin(b->tag)->id, mask)) continue;
                for (const auto& a : b->args)
                    if (a.is_var()) bound.insert(a.var);
                b = nullptr;
                changed = true;
            }
        }
        for (const auto* b : builtins)
            if (b) error("builtin '" + b->tag + "' is not sufficiently bound: " + builtin_mode_message(find_builtin(b->tag)->id));
        for (const auto& c : rule.body) {
            if (c.kind != ClauseKind::Neg) continue;
            for (const auto& a : c.args)
                if (a.is_var() && a.var.rfind("$_", 0) != 0 && !bound.contains(a.var))
                    error("variable '" + a.var + "' occurs under negation but is not bound positively");
        }
        absl::flat_hash_set<std::string> head_ids;
        for (const auto& h : rule.heads) {
            if (bound.contains(h.id)) error("the id of head clause '" + h.tag + "' is also bound in the body");
            for (const auto& a : h.args)
                if (a.is_var() && !bound.contains(a.var) && !head_ids.contains(a.var))
                    error("head variable '" + a.var + "' is not bound by the body");
            head_ids.insert(h.id);
        }
    }
    return out;
}

}  // namespace slog
