#include "slog/oracle.hpp"

#include <functional>

#include "slog/builtins.hpp"

namespace slog {

// ---------------------------------------------------------------------------
// FactSet

bool FactSet::insert(const TreePtr& t) {
    if (!all_.insert(t).second) return false;
    auto& rel = rels_[RelKey{t->tag, static_cast<uint32_t>(t->arity())}];
    if (rel.columns.empty()) rel.columns.resize(t->arity());
    auto pos = static_cast<uint32_t>(rel.facts.size());
    rel.facts.push_back(t);
    for (size_t c = 0; c < t->arity(); ++c) rel.columns[c][child_hash(t->children[c])].push_back(pos);
    return true;
}

size_t FactSet::insert_closed(const TreePtr& t) {
    if (contains(t)) return 0;
    size_t added = 0;
    for (const auto& c : t->children)
        if (const auto* sub = std::get_if<TreePtr>(&c)) added += insert_closed(*sub);
    return added + (insert(t) ? 1 : 0);
}

const FactSet::Relation* FactSet::relation(const std::string& tag, uint32_t arity) const {
    auto it = rels_.find(RelKey{tag, arity});
    return it == rels_.end() ? nullptr : &it->second;
}

size_t FactSet::count(const RelKey& k) const {
    auto it = rels_.find(k);
    return it == rels_.end() ? 0 : it->second.facts.size();
}

bool FactSet::subfact_closed() const {
    for (const auto& t : all_)
        for (const auto& c : t->children)
            if (const auto* sub = std::get_if<TreePtr>(&c); sub && !contains(*sub)) return false;
    return true;
}

std::vector<TreePtr> unroll(const TreePtr& f) {
    std::vector<TreePtr> out;
    absl::flat_hash_set<TreePtr, TreeHash, TreeEq> seen;
    std::vector<TreePtr> stack{f};
    while (!stack.empty()) {
        TreePtr t = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(t).second) continue;
        out.push_back(t);
        for (const auto& c : t->children)
            if (const auto* sub = std::get_if<TreePtr>(&c)) stack.push_back(*sub);
    }
    return out;
}

// ---------------------------------------------------------------------------
// matching

namespace {

struct OVal {
    TreeChild c;
    friend bool operator==(const OVal& a, const OVal& b) { return child_equal(a.c, b.c); }
};

struct OOps {
    static std::optional<int64_t> as_int(const OVal& v) {
        if (const auto* l = std::get_if<Literal>(&v.c); l && l->is_int()) return l->as_int();
        return std::nullopt;
    }
    static OVal make_int(int64_t i) { return OVal{Literal::integer(i)}; }
};

using Subst = absl::flat_hash_map<std::string, TreeChild>;

bool is_wildcard(const std::string& v) { return v.rfind("$_", 0) == 0; }

// Enumerates every substitution satisfying a rule body against `db`.
class Matcher {
public:
    Matcher(const CoreRule& rule, const FactSet& db) : rule_(rule), db_(db) {
        for (size_t i = 0; i < rule.body.size(); ++i)
            (rule.body[i].kind == ClauseKind::Rel ? positives_ : filters_).push_back(i);
    }

    void run(const std::function<void(const Subst&)>& emit) {
        emit_ = &emit;
        std::vector<bool> used(positives_.size(), false), applied(filters_.size(), false);
        search(used, applied, 0);
    }

private:
    bool bound(const Atom& a) const { return !a.is_var() || subst_.contains(a.var); }
    TreeChild value(const Atom& a) const { return a.is_var() ? subst_.at(a.var) : TreeChild{a.lit}; }

    // Binds `a` to `v`, recording new bindings in `trail`. False on mismatch.
    bool unify(const Atom& a, const TreeChild& v, std::vector<std::string>& trail) {
        if (!a.is_var()) return child_equal(TreeChild{a.lit}, v);
        auto it = subst_.find(a.var);
        if (it != subst_.end()) return child_equal(it->second, v);
        subst_.emplace(a.var, v);
        trail.push_back(a.var);
        return true;
    }

    void undo(std::vector<std::string>& trail) {
        for (const auto& v : trail) subst_.erase(v);
        trail.clear();
    }

    bool match_fact(const CoreClause& c, const TreePtr& t, std::vector<std::string>& trail) {
        if (!unify(Atom::variable(c.id), TreeChild{t}, trail)) return false;
        for (size_t k = 0; k < c.args.size(); ++k)
            if (!unify(c.args[k], t->children[k], trail)) return false;
        return true;
    }

    // Filters that can run now; returns false when one fails.
    bool apply_filters(std::vector<bool>& applied, std::vector<size_t>& newly, std::vector<std::string>& trail) {
        for (bool changed = true; changed;) {
            changed = false;
            for (size_t f = 0; f < filters_.size(); ++f) {
                if (applied[f]) continue;
                const auto& c = rule_.body[filters_[f]];
                uint32_t mask = 0;
                for (size_t k = 0; k < c.args.size(); ++k)
                    if (bound(c.args[k]) || (c.kind == ClauseKind::Neg && is_wildcard(c.args[k].var))) mask |= 1u << k;
                if (c.kind == ClauseKind::Neg) {
                    if (mask != (1u << c.args.size()) - 1) continue;
                    applied[f] = true;
                    newly.push_back(f);
                    changed = true;
                    if (exists(c)) return false;
                    continue;
                }
                BuiltinId id = find_builtin(c.tag)->id;
                if (!builtin_mode_ok(id, mask)) continue;
                applied[f] = true;
                newly.push_back(f);
                changed = true;
                std::vector<OVal> vals(c.args.size());
                for (size_t k = 0; k < c.args.size(); ++k)
                    if (mask >> k & 1u) vals[k].c = value(c.args[k]);
                if (!eval_builtin<OOps>(id, std::span<OVal>(vals), mask)) return false;
                for (size_t k = 0; k < c.args.size(); ++k)
                    if (!(mask >> k & 1u) && !unify(c.args[k], vals[k].c, trail)) return false;
            }
        }
        return true;
    }

    bool exists(const CoreClause& c) const {
        const auto* rel = db_.relation(c.tag, static_cast<uint32_t>(c.args.size()));
        if (!rel) return false;
        for (const auto& t : rel->facts) {
            bool ok = true;
            for (size_t k = 0; k < c.args.size() && ok; ++k)
                if (!(c.args[k].is_var() && is_wildcard(c.args[k].var))) ok = child_equal(value(c.args[k]), t->children[k]);
            if (ok) return true;
        }
        return false;
    }

    // Next positive clause: a bound id first, then the most bound arguments.
    size_t choose(const std::vector<bool>& used) const {
        size_t best = SIZE_MAX;
        int best_score = -1;
        for (size_t p = 0; p < positives_.size(); ++p) {
            if (used[p]) continue;
            const auto& c = rule_.body[positives_[p]];
            int score = subst_.contains(c.id) ? 1000 : 0;
            for (const auto& a : c.args) score += bound(a) ? 1 : 0;
            if (score > best_score) best_score = score, best = p;
        }
        return best;
    }

    void search(std::vector<bool>& used, std::vector<bool>& applied, size_t depth) {
        std::vector<size_t> newly;
        std::vector<std::string> trail;
        bool ok = apply_filters(applied, newly, trail);
        if (ok) {
            if (depth == positives_.size()) {
                (*emit_)(subst_);
            } else {
                size_t p = choose(used);
                used[p] = true;
                const auto& c = rule_.body[positives_[p]];
                for_candidates(c, [&](const TreePtr& t) {
                    std::vector<std::string> local;
                    if (match_fact(c, t, local)) search(used, applied, depth + 1);
                    undo(local);
                });
                used[p] = false;
            }
        }
        for (size_t f : newly) applied[f] = false;
        undo(trail);
    }

    template <typename F>
    void for_candidates(const CoreClause& c, F&& f) {
        if (auto it = subst_.find(c.id); it != subst_.end()) {
            // Copy: binding inside `f` may rehash the substitution.
            const auto* p = std::get_if<TreePtr>(&it->second);
            if (!p) return;
            TreePtr t = *p;
            if (t->tag == c.tag && t->arity() == c.args.size() && db_.contains(t)) f(t);
            return;
        }
        const auto* rel = db_.relation(c.tag, static_cast<uint32_t>(c.args.size()));
        if (!rel) return;
        for (size_t k = 0; k < c.args.size(); ++k) {
            if (!bound(c.args[k])) continue;
            auto hit = rel->columns[k].find(child_hash(value(c.args[k])));
            if (hit == rel->columns[k].end()) return;
            for (uint32_t pos : hit->second) f(rel->facts[pos]);
            return;
        }
        for (size_t i = 0; i < rel->facts.size(); ++i) f(rel->facts[i]);
    }

    const CoreRule& rule_;
    const FactSet& db_;
    std::vector<size_t> positives_, filters_;
    Subst subst_;
    const std::function<void(const Subst&)>* emit_ = nullptr;
};

// Builds the head clauses, inner-first. Returns the outermost trees last.
std::vector<TreePtr> instantiate_heads(const CoreRule& rule, const Subst& s) {
    std::vector<TreePtr> out;
    absl::flat_hash_map<std::string, TreePtr> ids;
    for (const auto& h : rule.heads) {
        std::vector<TreeChild> children;
        children.reserve(h.args.size());
        for (const auto& a : h.args) {
            if (!a.is_var()) {
                children.emplace_back(a.lit);
            } else if (auto it = ids.find(a.var); it != ids.end()) {
                children.emplace_back(it->second);
            } else {
                children.push_back(s.at(a.var));
            }
        }
        TreePtr t = FactTree::make(h.tag, std::move(children));
        ids[h.id] = t;
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// operator and fixpoint

FactSet immediate_consequence(const CoreProgram& program, const FactSet& db, const std::vector<uint32_t>& rules) {
    FactSet out = db;
    std::vector<uint32_t> which = rules;
    if (which.empty())
        for (uint32_t i = 0; i < program.rules.size(); ++i) which.push_back(i);
    for (uint32_t ri : which) {
        const auto& rule = program.rules[ri];
        Matcher(rule, db).run([&](const Subst& s) {
            for (const auto& t : instantiate_heads(rule, s)) out.insert_closed(t);
        });
    }
    return out;
}

namespace {

// New facts derivable from `db` by `rules`, without copying `db`.
std::vector<TreePtr> consequences(const CoreProgram& program, const FactSet& db, const std::vector<uint32_t>& rules) {
    std::vector<TreePtr> fresh;
    absl::flat_hash_set<TreePtr, TreeHash, TreeEq> seen;
    for (uint32_t ri : rules) {
        const auto& rule = program.rules[ri];
        Matcher(rule, db).run([&](const Subst& s) {
            for (const auto& t : instantiate_heads(rule, s))
                if (!db.contains(t) && seen.insert(t).second) fresh.push_back(t);
        });
    }
    return fresh;
}

}  // namespace

NaiveResult naive_fixpoint(const CoreProgram& program, const std::vector<TreePtr>& edb, size_t fuel) {
    NaiveResult res;
    for (const auto& t : edb) res.db.insert_closed(t);
    auto sccs = stratify_core(program);

    // Fact counts of each component's read set when it last converged.
    std::vector<std::vector<size_t>> seen(sccs.size());
    std::vector<bool> ran(sccs.size(), false);
    auto snapshot = [&](const CoreScc& scc) {
        std::vector<size_t> counts;
        for (const auto& k : scc.reads) counts.push_back(res.db.count(k));
        return counts;
    };
    for (bool dirty = true; dirty;) {
        dirty = false;
        for (size_t i = 0; i < sccs.size(); ++i) {
            if (ran[i] && seen[i] == snapshot(sccs[i])) continue;
            size_t before = res.db.size();
            while (true) {
                if (res.iterations >= fuel) {
                    res.fuel_exhausted = true;
                    return res;
                }
                ++res.iterations;
                auto fresh = consequences(program, res.db, sccs[i].rules);
                if (fresh.empty()) break;
                for (const auto& t : fresh) res.db.insert_closed(t);
            }
            ran[i] = true;
            seen[i] = snapshot(sccs[i]);
            if (res.db.size() != before) dirty = true;
        }
    }
    return res;
}

bool models(const FactSet& db, const CoreRule& rule) {
    bool ok = true;
    Matcher(rule, db).run([&](const Subst& s) {
        if (!ok) return;
        for (const auto& t : instantiate_heads(rule, s))
            if (!db.contains(t)) ok = false;
    });
    return ok;
}

std::optional<std::string> check_models(const FactSet& db, const CoreProgram& program) {
    for (const auto& r : program.rules)
        if (!models(db, r)) return r.label;
    return std::nullopt;
}

}  // namespace slog
