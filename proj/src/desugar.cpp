#include "slog/desugar.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "slog/builtins.hpp"
#include "slog/fact_text.hpp"
#include "slog/scope.hpp"

namespace slog {

// ---------------------------------------------------------------------------
// canonicalize

namespace {

void collect_vars(const Item& it, absl::flat_hash_set<std::string>& out) {
    if (it.kind == ItemKind::Var) out.insert(it.name);
    for (const auto& c : it.items) collect_vars(c, out);
}

// Cartesian expansion of `or`/`and` in a body.
std::vector<std::vector<Item>> expand_disjunctions(const std::vector<Item>& bodies) {
    std::vector<std::vector<Item>> variants{{}};
    for (const auto& b : bodies) {
        std::vector<std::vector<Item>> alts;
        if (b.kind == ItemKind::Or) {
            for (const auto& choice : b.items) {
                auto sub = expand_disjunctions(choice.kind == ItemKind::And ? choice.items
                                                                            : std::vector<Item>{choice});
                alts.insert(alts.end(), sub.begin(), sub.end());
            }
        } else if (b.kind == ItemKind::And) {
            alts = expand_disjunctions(b.items);
        } else {
            alts = {{b}};
        }
        std::vector<std::vector<Item>> next;
        for (const auto& v : variants)
            for (const auto& a : alts) {
                auto merged = v;
                merged.insert(merged.end(), a.begin(), a.end());
                next.push_back(std::move(merged));
            }
        variants = std::move(next);
    }
    return variants;
}

// Groups head items that are linked through `(= v ...)` names or equality
// constraints.
std::vector<std::vector<Item>> split_heads(const std::vector<Item>& heads) {
    size_t n = heads.size();
    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::vector<absl::flat_hash_set<std::string>> vars(n);
    for (size_t i = 0; i < n; ++i) collect_vars(heads[i], vars[i]);
    for (size_t i = 0; i < n; ++i) {
        if (heads[i].kind == ItemKind::Clause && heads[i].name == "=") {
            // An equality constraint belongs with every head it mentions.
            for (size_t j = 0; j < n; ++j)
                if (j != i && std::any_of(vars[i].begin(), vars[i].end(), [&](const auto& v) { return vars[j].contains(v); }))
                    parent[find(i)] = find(j);
            continue;
        }
        if (heads[i].kind != ItemKind::Unif || heads[i].name == "_") continue;
        for (size_t j = 0; j < n; ++j)
            if (j != i && vars[j].contains(heads[i].name)) parent[find(i)] = find(j);
    }
    std::vector<std::vector<Item>> groups;
    std::map<size_t, size_t> slot;
    for (size_t i = 0; i < n; ++i) {
        size_t r = find(i);
        auto [it, fresh] = slot.emplace(r, groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(heads[i]);
    }
    return groups;
}

void lift(const SurfaceRule& rule, const std::vector<Item>& outer, std::vector<SurfaceRule>& out) {
    std::vector<Item> bodies = outer;
    std::vector<const SurfaceRule*> nested;
    for (const auto& b : rule.bodies) {
        if (b.kind == ItemKind::Rule)
            nested.push_back(b.rule.get());
        else
            bodies.push_back(b);
    }
    std::vector<Item> heads;
    for (const auto& h : rule.heads) {
        if (h.kind == ItemKind::Rule)
            nested.push_back(h.rule.get());
        else
            heads.push_back(h);
    }
    if (!heads.empty()) {
        for (auto& variant : expand_disjunctions(bodies))
            for (auto& group : split_heads(heads)) {
                SurfaceRule r;
                r.heads = std::move(group);
                r.bodies = variant;
                r.span = rule.span;
                r.bare = rule.bare && r.bodies.empty();
                out.push_back(std::move(r));
            }
    }
    for (const auto* n : nested) lift(*n, bodies, out);
}

}  // namespace

std::vector<SurfaceRule> canonicalize(const SurfaceProgram& program) {
    std::vector<SurfaceRule> out;
    for (const auto& r : program.rules) lift(r, {}, out);
    return out;
}

// ---------------------------------------------------------------------------
// lists

namespace {

Item make_clause(ItemKind kind, std::string_view tag, std::vector<Item> items, Span sp) {
    Item it;
    it.kind = kind;
    it.name = std::string(tag);
    it.items = std::move(items);
    it.span = sp;
    return it;
}

struct ListLowering {
    bool needs_append = false;

    Item lower(const Item& it, bool head) {
        switch (it.kind) {
            case ItemKind::List: return build(it, head, ItemKind::Clause);
            case ItemKind::HuhList: return build(it, false, ItemKind::Huh);
            case ItemKind::BangList: return build(it, true, ItemKind::Bang);
            default: break;
        }
        Item out = it;
        out.items.clear();
        bool child_head = head;
        if (it.kind == ItemKind::Huh || it.kind == ItemKind::Curly || it.kind == ItemKind::Neg) child_head = false;
        if (it.kind == ItemKind::Bang) child_head = true;
        for (const auto& c : it.items) {
            Item lc = lower(c, child_head);
            lc.splice = c.splice;
            out.items.push_back(std::move(lc));
        }
        if (it.kind == ItemKind::Rule) {
            auto r = std::make_shared<SurfaceRule>(*it.rule);
            rule(*r);
            out.rule = std::move(r);
        }
        return out;
    }

    void rule(SurfaceRule& r) {
        for (auto& h : r.heads) h = lower(h, true);
        for (auto& b : r.bodies) b = lower(b, false);
    }

private:
    // `elem_head` is the context of the list's elements; the outermost cons
    // takes `outer_kind`.
    Item build(const Item& list, bool elem_head, ItemKind outer_kind) {
        std::vector<Item> elems;
        for (const auto& e : list.items) {
            Item le = lower(e, elem_head);
            le.splice = e.splice;
            elems.push_back(std::move(le));
        }
        Item acc;
        size_t n = elems.size();
        if (n > 0 && elems.back().splice) {
            acc = elems.back();
            acc.splice = false;
            --n;
        } else {
            acc = make_clause(ItemKind::Clause, kNilTag, {}, list.span);
        }
        for (size_t i = n; i-- > 0;) {
            Item e = elems[i];
            if (e.splice) {
                if (!elem_head)
                    compile_error(e.span, "'...' on a non-final list element is only supported in head position");
                needs_append = true;
                e.splice = false;
                Item bang = make_clause(ItemKind::Bang, "$do-append", {std::move(e), std::move(acc)}, list.span);
                acc = make_clause(ItemKind::Curly, "$append", {std::move(bang)}, list.span);
            } else {
                acc = make_clause(ItemKind::Clause, kConsTag, {std::move(e), std::move(acc)}, list.span);
            }
        }
        if (acc.kind == ItemKind::Clause) {
            acc.kind = outer_kind;
        } else if (outer_kind != ItemKind::Clause) {
            // `?[xs ...]` or `![xs ...]` with nothing before the splice.
            compile_error(list.span, "a '?' or '!' list needs at least one element before '...'");
        }
        return acc;
    }
};

constexpr std::string_view kAppendLibrary = R"(
($append ?($do-append ($nil) ls) ls)
($append ?($do-append ($cons x ls0) ls1) ($cons x {$append !($do-append ls0 ls1)}))
)";

}  // namespace

bool desugar_lists(SurfaceRule& rule) {
    ListLowering l;
    l.rule(rule);
    return l.needs_append;
}

// ---------------------------------------------------------------------------
// flattening

namespace {

using TreeKind = FlatRule::TreeKind;

class Flattener {
public:
    FlatRule out;

    explicit Flattener(Span sp) {
        out.span = sp;
        out.trees.push_back({TreeKind::Head, {}});
    }

    void body_top(const Item& it, int group) {
        group_ = group;
        switch (it.kind) {
            case ItemKind::Neg: {
                int t = new_tree(TreeKind::Filter);
                CoreClause c{ClauseKind::Neg, it.name, "", {}, group_};
                for (const auto& a : it.items) {
                    if (a.kind != ItemKind::Var && a.kind != ItemKind::Wildcard && a.kind != ItemKind::Lit)
                        compile_error(a.span, "nested clauses under negation are not supported");
                    c.args.push_back(atom(a, Ctx::Body, t, -1));
                }
                add(std::move(c), t, -1);
                return;
            }
            case ItemKind::Clause:
                if (is_builtin(it.name)) {
                    builtin_clause(it, Ctx::Body, -1);
                    return;
                }
                [[fallthrough]];
            default: {
                int t = new_tree(TreeKind::Positive);
                atom(it, Ctx::Body, t, -1);
            }
        }
    }

    void head_top(const Item& it) {
        group_ = 0;
        if (it.kind == ItemKind::Clause && is_builtin(it.name)) {
            if (it.name != "=") compile_error(it.span, "builtin '" + it.name + "' cannot be derived in a head");
            builtin_clause(it, Ctx::Head, -1);
            return;
        }
        atom(it, Ctx::Head, 0, -1);
    }

private:
    enum class Ctx { Head, Body };

    std::string fresh(const char* prefix) {
        std::string v;
        do v = std::string("$") + prefix + std::to_string(++counter_);
        while (taken_.contains(v));
        note_var(v);
        return v;
    }

    void note_var(const std::string& v) {
        if (seen_.insert(v).second) out.var_order.push_back(v);
    }

    int new_tree(TreeKind k) {
        out.trees.push_back({k, {}});
        return static_cast<int>(out.trees.size()) - 1;
    }

    void add(CoreClause c, int tree, int bang, int order = -1) {
        out.clauses.push_back({std::move(c), tree, bang, order < 0 ? next_order_++ : order});
    }

    // A builtin used as a clause: `(=/= x y)`, or `(= x y)` with non-clause sides.
    void builtin_clause(const Item& it, Ctx ctx, int bang) {
        const BuiltinSig* sig = find_builtin(it.name);
        if (it.items.size() != sig->arity)
            compile_error(it.span, "builtin '" + it.name + "' takes " + std::to_string(sig->arity) + " arguments");
        int t = new_tree(TreeKind::Filter);
        CoreClause c{ClauseKind::Builtin, it.name, "", {}, group_};
        // Arguments are values computed elsewhere; any clause lookups they
        // contain live in their own trees.
        int host = ctx == Ctx::Body ? new_tree(TreeKind::Positive) : 0;
        for (const auto& a : it.items) c.args.push_back(atom(a, ctx, host, bang));
        add(std::move(c), t, -1);
    }

    Atom atom(const Item& it, Ctx ctx, int tree, int bang) {
        switch (it.kind) {
            case ItemKind::Var: note_var(it.name); return Atom::variable(it.name);
            case ItemKind::Wildcard: return Atom::variable(fresh("_"));
            case ItemKind::Lit: return Atom::literal(it.lit);
            case ItemKind::Clause:
                if (is_builtin(it.name))
                    compile_error(it.span, "builtin '" + it.name + "' used as a nested clause; write {" + it.name +
                                               " ...} to use its result");
                return clause(it, "", ctx, tree, bang);
            case ItemKind::Unif: {
                const Item& inner = it.items.at(0);
                if (inner.kind == ItemKind::Curly) {
                    // `(= v {r ...})` binds v to the lookup's result.
                    Atom result = atom(inner, ctx, tree, bang);
                    if (it.name == "_") return result;
                    note_var(it.name);
                    int t = new_tree(TreeKind::Filter);
                    add(CoreClause{ClauseKind::Builtin, "=", "", {Atom::variable(it.name), result}, group_}, t, -1);
                    return Atom::variable(it.name);
                }
                if (is_builtin(inner.name)) compile_error(inner.span, "cannot name a builtin clause");
                std::string id = it.name;
                if (id != "_") note_var(id);
                return clause(inner, id == "_" ? "" : id, ctx, tree, bang);
            }
            case ItemKind::Huh: {
                int t = new_tree(TreeKind::Trigger);
                return clause(it, "", Ctx::Body, t, -1);
            }
            case ItemKind::Bang: {
                int b = static_cast<int>(out.bangs.size());
                out.bangs.push_back({});
                if (tree >= 0) out.trees[tree].bangs.push_back(b);
                Atom id = clause(it, "", Ctx::Head, -1, b);
                out.bangs[b].id = id.var;
                return id;
            }
            case ItemKind::Curly: {
                int host = ctx == Ctx::Head ? new_tree(TreeKind::Positive) : tree;
                std::vector<Atom> args;
                for (const auto& a : it.items) args.push_back(atom(a, Ctx::Body, host, -1));
                Atom result = Atom::variable(fresh("v"));
                args.push_back(result);
                if (const BuiltinSig* sig = find_builtin(it.name)) {
                    if (args.size() != sig->arity)
                        compile_error(it.span, "builtin '" + it.name + "' takes " + std::to_string(sig->arity - 1) +
                                                   " arguments inside {}");
                    int t = new_tree(TreeKind::Filter);
                    add(CoreClause{ClauseKind::Builtin, it.name, "", std::move(args), group_}, t, -1);
                } else {
                    add(CoreClause{ClauseKind::Rel, it.name, fresh("id"), std::move(args), group_}, host, -1);
                }
                return result;
            }
            default: compile_error(it.span, "unexpected '" + to_text(it) + "' in clause position");
        }
    }

    // Adds the clause for `it` (whose children are flattened in `ctx`) and
    // returns its id variable.
    Atom clause(const Item& it, std::string id, Ctx ctx, int tree, int bang) {
        if (it.name == "=") compile_error(it.span, "'=' is only allowed as a top-level constraint");
        if (it.name == "or" || it.name == "and") compile_error(it.span, "or/and are only allowed at the top of a body");
        int order = next_order_++;
        if (id.empty()) id = fresh("id");
        std::vector<Atom> args;
        for (const auto& a : it.items) args.push_back(atom(a, ctx, tree, bang));
        add(CoreClause{ClauseKind::Rel, it.name, id, std::move(args), group_}, tree, bang, order);
        return Atom::variable(id);
    }

    int counter_ = 0;
    int next_order_ = 0;
    int group_ = 0;
    absl::flat_hash_set<std::string> seen_;

public:
    // Names written in the source, which fresh names must avoid. Printed
    // core already uses `$`-names, so re-reading it would otherwise collide.
    absl::flat_hash_set<std::string> taken_;

    void reserve(const Item& it) {
        if (it.kind == ItemKind::Var || it.kind == ItemKind::Unif) taken_.insert(it.name);
        for (const auto& c : it.items) reserve(c);
    }
};

}  // namespace

FlatRule flatten_rule(const SurfaceRule& rule) {
    Flattener f(rule.span);
    for (const auto& h : rule.heads) f.reserve(h);
    for (const auto& b : rule.bodies) f.reserve(b);
    int group = 0;
    for (const auto& b : rule.bodies) {
        if (b.kind == ItemKind::HintSep) {
            ++group;
            continue;
        }
        f.body_top(b, group);
    }
    for (const auto& h : rule.heads) f.head_top(h);
    FlatRule out = std::move(f.out);
    std::stable_sort(out.clauses.begin(), out.clauses.end(),
                     [](const auto& a, const auto& b) { return a.order < b.order; });
    return out;
}

// ---------------------------------------------------------------------------
// static unification

namespace {

struct UnionFind {
    absl::flat_hash_map<std::string, std::string> parent;
    std::string find(const std::string& v) {
        auto it = parent.find(v);
        if (it == parent.end() || it->second == v) return v;
        std::string r = find(it->second);
        parent[v] = r;
        return r;
    }
};

bool is_head_entry(const FlatRule::Entry& e, const FlatRule& r) {
    return e.bang >= 0 || (e.tree >= 0 && r.trees[e.tree].kind == TreeKind::Head);
}

}  // namespace

bool static_unify(FlatRule& rule, std::vector<Diagnostic>& warnings) {
    absl::flat_hash_map<std::string, size_t> rank;
    for (size_t i = 0; i < rule.var_order.size(); ++i) rank[rule.var_order[i]] = i;
    absl::flat_hash_set<std::string> generated;
    for (const auto& e : rule.clauses)
        if (e.clause.kind == ClauseKind::Rel && is_head_entry(e, rule)) generated.insert(e.clause.id);

    auto contradiction = [&](const std::string& why) {
        warnings.push_back({Severity::Warning, rule.span, "rule can never fire and was removed: " + why});
        return false;
    };

    UnionFind uf;
    absl::flat_hash_map<std::string, Literal> bound_lit;
    std::vector<std::pair<Atom, Atom>> pending;

    auto union_vars = [&](const std::string& a, const std::string& b) -> bool {
        std::string ra = uf.find(a), rb = uf.find(b);
        if (ra == rb) return true;
        bool ga = generated.contains(ra), gb = generated.contains(rb);
        // Generated ids stay representative; otherwise the earliest name wins.
        bool keep_a = ga || (!gb && rank[ra] <= rank[rb]);
        const std::string& keep = keep_a ? ra : rb;
        const std::string& drop = keep_a ? rb : ra;
        uf.parent[drop] = keep;
        if (auto it = bound_lit.find(drop); it != bound_lit.end()) {
            Literal l = it->second;
            bound_lit.erase(it);
            if (auto jt = bound_lit.find(keep); jt != bound_lit.end()) {
                if (!(jt->second == l)) return contradiction("conflicting literal values");
            } else {
                bound_lit[keep] = l;
            }
        }
        return true;
    };

    auto unify = [&](const Atom& a, const Atom& b) -> bool {
        if (!a.is_var() && !b.is_var()) return a.lit == b.lit || contradiction("unequal literals");
        if (a.is_var() && b.is_var()) return union_vars(a.var, b.var);
        const Atom& v = a.is_var() ? a : b;
        const Atom& l = a.is_var() ? b : a;
        std::string r = uf.find(v.var);
        if (auto it = bound_lit.find(r); it != bound_lit.end()) return it->second == l.lit || contradiction("conflicting literal values");
        bound_lit[r] = l.lit;
        return true;
    };

    std::vector<FlatRule::Entry> kept;
    for (auto& e : rule.clauses) {
        if (e.clause.kind == ClauseKind::Builtin && e.clause.tag == "=") {
            if (!unify(e.clause.args[0], e.clause.args[1])) return false;
            continue;
        }
        kept.push_back(std::move(e));
    }
    rule.clauses = std::move(kept);

    auto subst = [&](Atom& a) {
        if (!a.is_var()) return;
        std::string r = uf.find(a.var);
        if (auto it = bound_lit.find(r); it != bound_lit.end())
            a = Atom::literal(it->second);
        else
            a.var = r;
    };

    // Clauses naming the same id, or with identical structure, denote one fact.
    for (bool changed = true; changed;) {
        changed = false;
        for (auto& e : rule.clauses) {
            for (auto& a : e.clause.args) subst(a);
            if (e.clause.kind == ClauseKind::Rel) {
                std::string r = uf.find(e.clause.id);
                if (bound_lit.contains(r)) return contradiction("a fact id is constrained to a literal");
                e.clause.id = r;
            }
        }
        std::map<std::string, size_t> by_id;
        std::map<std::pair<bool, std::string>, size_t> by_shape;
        for (size_t i = 0; i < rule.clauses.size() && !changed; ++i) {
            const auto& c = rule.clauses[i].clause;
            if (c.kind != ClauseKind::Rel) continue;
            bool head = is_head_entry(rule.clauses[i], rule);
            std::string shape = c.tag + "/" + std::to_string(c.args.size());
            for (const auto& a : c.args) shape += " " + (a.is_var() ? "v:" + a.var : "l:" + to_text(a.lit));
            auto [sit, sfresh] = by_shape.emplace(std::make_pair(head, shape), i);
            if (!sfresh && rule.clauses[sit->second].clause.id != c.id) {
                if (!union_vars(rule.clauses[sit->second].clause.id, c.id)) return false;
                changed = true;
                break;
            }
            auto [it, fresh] = by_id.emplace(c.id, i);
            if (fresh) continue;
            const auto& o = rule.clauses[it->second].clause;
            if (o.tag != c.tag || o.args.size() != c.args.size())
                return contradiction("one fact id names clauses of different relations");
            for (size_t k = 0; k < c.args.size(); ++k) {
                if (o.args[k] == c.args[k]) continue;
                if (!unify(o.args[k], c.args[k])) return false;
                changed = true;
            }
        }
    }

    // Drop exact duplicates (the same fact matched or derived twice).
    std::vector<FlatRule::Entry> unique;
    for (auto& e : rule.clauses) {
        bool dup = false;
        for (const auto& u : unique)
            if (u.clause.kind == e.clause.kind && u.clause.tag == e.clause.tag && u.clause.id == e.clause.id &&
                u.clause.args == e.clause.args && is_head_entry(u, rule) == is_head_entry(e, rule)) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(std::move(e));
    }
    rule.clauses = std::move(unique);
    for (auto& b : rule.bangs) b.id = uf.find(b.id);
    std::vector<std::string> order;
    absl::flat_hash_set<std::string> seen;
    for (const auto& v : rule.var_order) {
        std::string r = uf.find(v);
        if (!bound_lit.contains(r) && seen.insert(r).second) order.push_back(r);
    }
    rule.var_order = std::move(order);
    return true;
}

// ---------------------------------------------------------------------------
// splitting at `!` clauses

namespace {

using VarSet = absl::flat_hash_set<std::string>;

void clause_vars(const CoreClause& c, VarSet& out, bool with_id = true) {
    if (c.kind == ClauseKind::Rel && with_id) out.insert(c.id);
    for (const auto& a : c.args)
        if (a.is_var()) out.insert(a.var);
}

bool is_wildcard_var(const std::string& v) { return v.rfind("$_", 0) == 0; }

// Every head must follow the heads whose ids it mentions. Deduplicated
// subclauses can sit anywhere in the clause list, so sort rather than trust
// the flattening order.
void order_heads(std::vector<CoreClause>& heads) {
    absl::flat_hash_map<std::string, size_t> by_id;
    for (size_t i = 0; i < heads.size(); ++i) by_id.emplace(heads[i].id, i);
    std::vector<int> state(heads.size(), 0);
    std::vector<CoreClause> out;
    out.reserve(heads.size());
    std::function<void(size_t)> visit = [&](size_t i) {
        if (state[i]) return;
        state[i] = 1;
        for (const auto& a : heads[i].args)
            if (a.is_var())
                if (auto it = by_id.find(a.var); it != by_id.end() && it->second != i) visit(it->second);
        out.push_back(heads[i]);
    };
    for (size_t i = 0; i < heads.size(); ++i) visit(i);
    heads = std::move(out);
}

}  // namespace

std::vector<CoreRule> split_on_bang(const FlatRule& rule, const std::string& label) {
    const size_t ntrees = rule.trees.size();
    const size_t nbangs = rule.bangs.size();
    std::vector<std::vector<int>> tree_clauses(ntrees), bang_clauses(nbangs);
    for (size_t i = 0; i < rule.clauses.size(); ++i) {
        const auto& e = rule.clauses[i];
        if (e.bang >= 0)
            bang_clauses[e.bang].push_back(static_cast<int>(i));
        else
            tree_clauses[e.tree].push_back(static_cast<int>(i));
    }

    auto build_rule = [&](std::vector<CoreClause> heads, std::vector<CoreClause> body, std::string lbl) {
        CoreRule r;
        order_heads(heads);
        r.heads = std::move(heads);
        r.body = std::move(body);
        r.span = rule.span;
        r.label = std::move(lbl);
        return r;
    };

    // Trigger trees lead the body: they are what makes the rule fire.
    std::vector<size_t> tree_order;
    for (size_t t = 1; t < ntrees; ++t)
        if (rule.trees[t].kind == TreeKind::Trigger) tree_order.push_back(t);
    for (size_t t = 1; t < ntrees; ++t)
        if (rule.trees[t].kind != TreeKind::Trigger) tree_order.push_back(t);

    if (nbangs == 0) {
        std::vector<CoreClause> heads, body;
        for (auto it = tree_clauses[0].rbegin(); it != tree_clauses[0].rend(); ++it)
            heads.push_back(rule.clauses[*it].clause);
        for (size_t t : tree_order)
            for (int i : tree_clauses[t]) body.push_back(rule.clauses[i].clause);
        return {build_rule(std::move(heads), std::move(body), label)};
    }

    // Variables each tree binds, and what each `!` unit and filter needs.
    std::vector<VarSet> tree_vars(ntrees), bang_needs(nbangs);
    for (size_t t = 1; t < ntrees; ++t)
        for (int i : tree_clauses[t]) clause_vars(rule.clauses[i].clause, tree_vars[t]);
    for (size_t b = 0; b < nbangs; ++b) {
        VarSet own, all;
        for (int i : bang_clauses[b]) {
            own.insert(rule.clauses[i].clause.id);
            clause_vars(rule.clauses[i].clause, all, false);
        }
        for (const auto& v : all)
            if (!own.contains(v)) bang_needs[b].insert(v);
    }

    auto filter_ready = [&](size_t t, const VarSet& avail) {
        if (tree_clauses[t].empty()) return true;  // an `=` that unification removed
        const CoreClause& c = rule.clauses[tree_clauses[t].at(0)].clause;
        if (c.kind == ClauseKind::Neg) {
            for (const auto& a : c.args)
                if (a.is_var() && !is_wildcard_var(a.var) && !avail.contains(a.var)) return false;
            return true;
        }
        uint32_t mask = 0;
        for (size_t k = 0; k < c.args.size(); ++k)
            if (!c.args[k].is_var() || avail.contains(c.args[k].var)) mask |= 1u << k;
        return builtin_mode_ok(find_builtin(c.tag)->id, mask);
    };

    std::vector<int> tree_stage(ntrees, -1), bang_stage(nbangs, -1);
    tree_stage[0] = -2;  // the head is placed in the final stage
    VarSet avail;
    int stage = 0;
    size_t emitted = 0;
    auto refs_ready = [&](size_t t, int s) {
        for (int b : rule.trees[t].bangs)
            if (bang_stage[b] < 0 || bang_stage[b] >= s) return false;
        return true;
    };
    auto place = [&](size_t t, int s) {
        tree_stage[t] = s;
        for (const auto& v : tree_vars[t]) avail.insert(v);
    };
    while (emitted < nbangs) {
        if (stage > 0)
            for (size_t b = 0; b < nbangs; ++b)
                if (bang_stage[b] == stage - 1) avail.insert(rule.bangs[b].id);
        size_t emitted_before = emitted;
        for (bool changed = true; changed;) {
            changed = false;
            for (size_t t = 1; t < ntrees; ++t) {
                if (tree_stage[t] != -1 || !refs_ready(t, stage)) continue;
                auto kind = rule.trees[t].kind;
                if (kind == TreeKind::Trigger || (kind == TreeKind::Filter && filter_ready(t, avail))) {
                    place(t, stage);
                    changed = true;
                }
            }
            for (size_t b = 0; b < nbangs; ++b) {
                if (bang_stage[b] != -1) continue;
                bool ready = std::all_of(bang_needs[b].begin(), bang_needs[b].end(),
                                         [&](const std::string& v) { return avail.contains(v); });
                if (ready) {
                    bang_stage[b] = stage;
                    ++emitted;
                    changed = true;
                }
            }
            VarSet missing;
            for (size_t b = 0; b < nbangs; ++b)
                if (bang_stage[b] == -1)
                    for (const auto& v : bang_needs[b])
                        if (!avail.contains(v)) missing.insert(v);
            for (size_t t = 1; t < ntrees; ++t) {
                if (tree_stage[t] != -1 || rule.trees[t].kind != TreeKind::Positive || !refs_ready(t, stage)) continue;
                bool useful = std::any_of(tree_vars[t].begin(), tree_vars[t].end(),
                                          [&](const std::string& v) { return missing.contains(v); });
                if (useful) {
                    place(t, stage);
                    changed = true;
                }
            }
        }
        if (emitted == emitted_before)
            compile_error(rule.span,
                          "cyclic dependence: a '!' clause needs a value that is only available after it is emitted");
        ++stage;
    }
    const int final_stage = stage;
    for (size_t t = 0; t < ntrees; ++t)
        if (tree_stage[t] < 0) tree_stage[t] = final_stage;

    // Variables used at or after each stage.
    auto used_after = [&](int s) {
        VarSet used;
        for (size_t t = 0; t < ntrees; ++t)
            if (tree_stage[t] > s)
                for (int i : tree_clauses[t]) clause_vars(rule.clauses[i].clause, used, t != 0);
        for (size_t b = 0; b < nbangs; ++b)
            if (bang_stage[b] > s)
                for (int i : bang_clauses[b]) clause_vars(rule.clauses[i].clause, used, false);
        return used;
    };

    std::vector<CoreRule> out;
    std::vector<Atom> carried;  // payload of the previous midpoint
    VarSet have;                // variables available so far
    std::vector<std::string> trigger_ids;
    for (size_t t = 1; t < ntrees; ++t)
        if (rule.trees[t].kind == TreeKind::Trigger && !tree_clauses[t].empty())
            trigger_ids.push_back(rule.clauses[tree_clauses[t].front()].clause.id);

    for (int s = 0; s <= final_stage; ++s) {
        std::vector<CoreClause> body, heads;
        if (s > 0) {
            CoreClause mid{ClauseKind::Rel, "$" + label + "-mid" + std::to_string(s - 1), "$mid" + std::to_string(s - 1),
                           carried, 0};
            body.push_back(std::move(mid));
        }
        for (size_t t : tree_order)
            if (tree_stage[t] == s)
                for (int i : tree_clauses[t]) {
                    body.push_back(rule.clauses[i].clause);
                    clause_vars(rule.clauses[i].clause, have);
                }
        if (s == final_stage) {
            // Heads go inner-first: reverse of the parent-first clause order.
            for (auto it = tree_clauses[0].rbegin(); it != tree_clauses[0].rend(); ++it)
                heads.push_back(rule.clauses[*it].clause);
            out.push_back(build_rule(std::move(heads), std::move(body), label + ".s" + std::to_string(s)));
            break;
        }
        for (size_t b = 0; b < nbangs; ++b)
            if (bang_stage[b] == s) {
                for (auto it = bang_clauses[b].rbegin(); it != bang_clauses[b].rend(); ++it) {
                    heads.push_back(rule.clauses[*it].clause);
                    have.insert(rule.clauses[*it].clause.id);
                }
            }
        VarSet live_set;
        VarSet used = used_after(s);
        for (const auto& v : have)
            if (used.contains(v)) live_set.insert(v);
        std::vector<Atom> payload;
        VarSet taken;
        auto take = [&](const std::string& v) {
            if (live_set.contains(v) && taken.insert(v).second) payload.push_back(Atom::variable(v));
        };
        for (const auto& v : trigger_ids) take(v);
        for (size_t b = 0; b < nbangs; ++b)
            if (bang_stage[b] >= 0 && bang_stage[b] <= s) take(rule.bangs[b].id);
        for (const auto& v : rule.var_order) take(v);
        std::vector<std::string> rest;
        for (const auto& v : live_set)
            if (!taken.contains(v)) rest.push_back(v);
        std::sort(rest.begin(), rest.end());
        for (const auto& v : rest) take(v);
        heads.push_back(CoreClause{ClauseKind::Rel, "$" + label + "-mid" + std::to_string(s),
                                   "$midh" + std::to_string(s), payload, 0});
        out.push_back(build_rule(std::move(heads), std::move(body), label + ".s" + std::to_string(s)));
        carried = std::move(payload);
        have = live_set;
    }
    return out;
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

void compile_rules(const SurfaceProgram& program, CoreProgram& out, bool& needs_append, const std::string& prefix) {
    auto rules = canonicalize(program);
    for (size_t i = 0; i < rules.size(); ++i) {
        SurfaceRule r = rules[i];
        needs_append |= desugar_lists(r);
        FlatRule flat = flatten_rule(r);
        if (!static_unify(flat, out.warnings)) continue;
        for (auto& cr : split_on_bang(flat, prefix + std::to_string(i)))
            out.rules.push_back(std::move(cr));
    }
}

}  // namespace

CoreProgram compile_to_core(const SurfaceProgram& program) {
    CoreProgram out;
    bool needs_append = false;
    compile_rules(program, out, needs_append, "r");
    if (needs_append) {
        ParseOptions opts;
        opts.allow_reserved = true;
        bool unused = false;
        compile_rules(parse_program(kAppendLibrary, opts), out, unused, "append");
    }
    auto diags = check_scope(out);
    std::vector<Diagnostic> errors;
    for (auto& d : diags) {
        if (d.severity == Severity::Error)
            errors.push_back(std::move(d));
        else
            out.warnings.push_back(std::move(d));
    }
    if (!errors.empty()) throw CompileError(std::move(errors));
    return out;
}

CoreProgram compile_source(std::string_view text, const ParseOptions& opts) {
    return compile_to_core(parse_program(text, opts));
}

}  // namespace slog
