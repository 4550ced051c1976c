#include "slog/surface.hpp"

namespace slog {

CompileError::CompileError(std::vector<Diagnostic> diags)
    : std::runtime_error(diags.empty() ? std::string("compile error") : diags.front().format()),
      diags_(std::move(diags)) {}

std::string Diagnostic::format(const std::string& file) const {
    std::string out = file.empty() ? "" : file + ":";
    out += std::to_string(span.line) + ":" + std::to_string(span.col) + ": ";
    out += severity == Severity::Error ? "error: " : "warning: ";
    out += message;
    return out;
}

namespace {

void print_items(const std::vector<Item>& items, std::string& out) {
    for (const auto& it : items) {
        out.push_back(' ');
        out += to_text(it);
    }
}

std::string clause_text(const char* open, const char* close, const Item& item) {
    std::string out = open;
    out += item.name;
    print_items(item.items, out);
    out += close;
    return out;
}

std::string list_text(const char* open, const Item& item) {
    std::string out = open;
    for (size_t i = 0; i < item.items.size(); ++i) {
        if (i) out.push_back(' ');
        out += to_text(item.items[i]);
        if (item.items[i].splice) out += " ...";
    }
    out.push_back(']');
    return out;
}

}  // namespace

std::string to_text(const Item& item) {
    switch (item.kind) {
        case ItemKind::Var: return item.name;
        case ItemKind::Wildcard: return "_";
        case ItemKind::Lit: return to_text(item.lit);
        case ItemKind::Clause: return clause_text("(", ")", item);
        case ItemKind::Huh: return clause_text("?(", ")", item);
        case ItemKind::Bang: return clause_text("!(", ")", item);
        case ItemKind::Curly: return clause_text("{", "}", item);
        case ItemKind::Neg: return clause_text("~(", ")", item);
        case ItemKind::Unif: return "(= " + item.name + " " + to_text(item.items.at(0)) + ")";
        case ItemKind::List: return list_text("[", item);
        case ItemKind::HuhList: return list_text("?[", item);
        case ItemKind::BangList: return list_text("![", item);
        case ItemKind::Or: {
            std::string out = "(or";
            print_items(item.items, out);
            return out + ")";
        }
        case ItemKind::And: {
            std::string out = "(and";
            print_items(item.items, out);
            return out + ")";
        }
        case ItemKind::HintSep: return "--";
        case ItemKind::Rule: return to_text(*item.rule);
    }
    return "";
}

std::string to_text(const SurfaceRule& rule) {
    if (rule.bare) return to_text(rule.heads.at(0));
    std::string out = "[";
    const auto& first = rule.forward ? rule.bodies : rule.heads;
    const auto& second = rule.forward ? rule.heads : rule.bodies;
    for (size_t i = 0; i < first.size(); ++i) {
        if (i) out.push_back(' ');
        out += to_text(first[i]);
    }
    out += rule.forward ? " -->" : " <--";
    print_items(second, out);
    out.push_back(']');
    return out;
}

std::string to_text(const SurfaceProgram& program) {
    std::string out;
    for (const auto& r : program.rules) {
        out += to_text(r);
        out.push_back('\n');
    }
    return out;
}

bool same_item(const Item& a, const Item& b) {
    if (a.kind != b.kind || a.name != b.name || a.splice != b.splice || a.items.size() != b.items.size())
        return false;
    if (a.kind == ItemKind::Lit && !(a.lit == b.lit)) return false;
    for (size_t i = 0; i < a.items.size(); ++i)
        if (!same_item(a.items[i], b.items[i])) return false;
    if (a.kind == ItemKind::Rule) return same_rule(*a.rule, *b.rule);
    return true;
}

static bool same_items(const std::vector<Item>& a, const std::vector<Item>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!same_item(a[i], b[i])) return false;
    return true;
}

bool same_rule(const SurfaceRule& a, const SurfaceRule& b) {
    return a.bare == b.bare && a.forward == b.forward && same_items(a.heads, b.heads) &&
           same_items(a.bodies, b.bodies);
}

bool same_program(const SurfaceProgram& a, const SurfaceProgram& b) {
    if (a.rules.size() != b.rules.size()) return false;
    for (size_t i = 0; i < a.rules.size(); ++i)
        if (!same_rule(a.rules[i], b.rules[i])) return false;
    return true;
}

}  // namespace slog
