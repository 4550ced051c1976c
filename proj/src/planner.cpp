#include "slog/planner.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <absl/container/flat_hash_set.h>

namespace slog {

// ---------------------------------------------------------------------------
// stratification

namespace {

std::vector<size_t> root_heads(const CoreRule& r) {
    absl::flat_hash_set<std::string> referenced;
    for (const auto& h : r.heads)
        for (const auto& a : h.args)
            if (a.is_var()) referenced.insert(a.var);
    std::vector<size_t> roots;
    for (size_t i = 0; i < r.heads.size(); ++i)
        if (!referenced.contains(r.heads[i].id)) roots.push_back(i);
    return roots;
}

RelKey key_of(const CoreClause& c) { return {c.tag, static_cast<uint32_t>(c.args.size())}; }

class Tarjan {
public:
    explicit Tarjan(const std::vector<std::vector<uint32_t>>& adj) : adj_(adj), index_(adj.size(), -1), low_(adj.size()), on_(adj.size()) {}

    // Components in reverse topological order of the edge direction.
    std::vector<std::vector<uint32_t>> run() {
        for (uint32_t v = 0; v < adj_.size(); ++v)
            if (index_[v] < 0) visit(v);
        return comps_;
    }

private:
    void visit(uint32_t root) {
        // Iterative DFS: (node, next edge position).
        std::vector<std::pair<uint32_t, size_t>> stack{{root, 0}};
        open(root);
        while (!stack.empty()) {
            auto& [v, pos] = stack.back();
            if (pos < adj_[v].size()) {
                uint32_t w = adj_[v][pos++];
                if (index_[w] < 0) {
                    open(w);
                    stack.push_back({w, 0});
                } else if (on_[w]) {
                    low_[v] = std::min(low_[v], index_[w]);
                }
                continue;
            }
            if (low_[v] == index_[v]) {
                std::vector<uint32_t> comp;
                uint32_t w;
                do {
                    w = s_.back();
                    s_.pop_back();
                    on_[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                comps_.push_back(std::move(comp));
            }
            uint32_t done = v;
            stack.pop_back();
            if (!stack.empty()) low_[stack.back().first] = std::min(low_[stack.back().first], low_[done]);
        }
    }

    void open(uint32_t v) {
        index_[v] = low_[v] = counter_++;
        s_.push_back(v);
        on_[v] = true;
    }

    const std::vector<std::vector<uint32_t>>& adj_;
    std::vector<int> index_, low_;
    std::vector<bool> on_;
    std::vector<uint32_t> s_;
    std::vector<std::vector<uint32_t>> comps_;
    int counter_ = 0;
};

struct Strata {
    std::vector<CoreScc> sccs;
    std::vector<std::pair<uint32_t, std::string>> cycles;  // (rule, negated tag)
};

// With `nested`, a rule's root heads also point at its nested heads, so the
// readers of anything a rule builds run after it.
Strata components(const CoreProgram& program, bool nested) {
    std::map<RelKey, uint32_t> node_of;
    std::vector<RelKey> nodes;
    auto node = [&](const RelKey& k) {
        auto [it, fresh] = node_of.emplace(k, nodes.size());
        if (fresh) nodes.push_back(k);
        return it->second;
    };
    for (const auto& r : program.rules) {
        for (const auto& c : r.body)
            if (c.kind != ClauseKind::Builtin) node(key_of(c));
        for (const auto& h : r.heads) node(key_of(h));
    }
    std::vector<std::vector<uint32_t>> adj(nodes.size());
    std::vector<uint32_t> rule_node(program.rules.size());
    for (size_t i = 0; i < program.rules.size(); ++i) {
        const auto& r = program.rules[i];
        auto roots = root_heads(r);
        if (roots.empty()) roots.push_back(0);
        rule_node[i] = node(key_of(r.heads[roots[0]]));
        for (size_t k = 1; k < roots.size(); ++k) {
            uint32_t a = node(key_of(r.heads[roots[k - 1]])), b = node(key_of(r.heads[roots[k]]));
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        for (const auto& c : r.body) {
            if (c.kind == ClauseKind::Builtin) continue;
            for (size_t root : roots) adj[node(key_of(c))].push_back(node(key_of(r.heads[root])));
        }
        if (nested)
            for (const auto& h : r.heads) adj[rule_node[i]].push_back(node(key_of(h)));
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    auto comps = Tarjan(adj).run();
    std::reverse(comps.begin(), comps.end());

    std::vector<int> comp_of(nodes.size());
    for (size_t c = 0; c < comps.size(); ++c)
        for (uint32_t v : comps[c]) comp_of[v] = static_cast<int>(c);
    std::vector<CoreScc> sccs(comps.size());
    for (size_t i = 0; i < program.rules.size(); ++i) sccs[comp_of[rule_node[i]]].rules.push_back(static_cast<uint32_t>(i));

    Strata out;
    for (auto& scc : sccs) {
        if (scc.rules.empty()) continue;
        std::set<RelKey> writes, reads;
        for (uint32_t ri : scc.rules) {
            const auto& r = program.rules[ri];
            for (const auto& h : r.heads) writes.insert(key_of(h));
            for (const auto& c : r.body)
                if (c.kind != ClauseKind::Builtin) reads.insert(key_of(c));
        }
        for (uint32_t ri : scc.rules)
            for (const auto& c : program.rules[ri].body)
                if (c.kind == ClauseKind::Neg && writes.contains(key_of(c))) out.cycles.emplace_back(ri, c.tag);
        scc.writes.assign(writes.begin(), writes.end());
        scc.reads.assign(reads.begin(), reads.end());
        out.sccs.push_back(std::move(scc));
    }
    return out;
}

}  // namespace

std::vector<CoreScc> stratify_core(const CoreProgram& program, std::vector<Diagnostic>* warnings) {
    Strata full = components(program, true);
    if (full.cycles.empty()) return std::move(full.sccs);
    Strata roots = components(program, false);
    if (!roots.cycles.empty()) {
        std::vector<Diagnostic> errors;
        for (const auto& [ri, tag] : roots.cycles)
            errors.push_back({Severity::Error, program.rules[ri].span,
                              "negation of '" + tag + "' depends on itself (rule " + program.rules[ri].label +
                                  "); the program is not stratifiable"});
        throw CompileError(std::move(errors));
    }
    // Only facts built inside other heads feed back into the negation. Order
    // by root heads and say so: such facts may arrive after the check.
    if (warnings)
        for (const auto& [ri, tag] : full.cycles)
            warnings->push_back({Severity::Warning, program.rules[ri].span,
                                 "negation of '" + tag + "' in rule " + program.rules[ri].label +
                                     " may be checked before facts built inside later heads reach it"});
    return std::move(roots.sccs);
}

// ---------------------------------------------------------------------------
// catalog

RelId Plan::declare(const std::string& tag, uint32_t arity, bool intermediate) {
    auto [it, fresh] = ids_.emplace(RelKey{tag, arity}, static_cast<RelId>(relations.size()));
    if (fresh) relations.push_back({tag, arity, intermediate, 0, {}});
    return it->second;
}

RelId Plan::relation_id(const std::string& tag, uint32_t arity) const { return ids_.at(RelKey{tag, arity}); }

// ---------------------------------------------------------------------------
// partitioning

namespace {

struct Source {
    PlanAtom atom;
    std::set<uint32_t> vars;
};

class Partitioner {
public:
    Partitioner(const CoreRule& rule, uint32_t core_index, Plan& plan) : rule_(rule), core_(core_index), plan_(plan) {
        for (const auto& c : rule.body) count(c, c.kind == ClauseKind::Rel);
        for (const auto& h : rule.heads) count(h, false);
    }

    std::vector<BinaryRule> run() {
        std::map<int, std::vector<size_t>> groups;
        for (const auto& c : rule_.body) {
            if (c.kind == ClauseKind::Rel) {
                groups[c.group].push_back(sources_.size());
                sources_.push_back(source(c));
            } else {
                filters_.push_back(&c);
            }
        }
        for (const auto& h : rule_.heads) {
            PlanHead ph{plan_.declare(h.tag, static_cast<uint32_t>(h.args.size())), {}};
            for (const auto& a : h.args) ph.args.push_back(head_term(a));
            head_ids_.push_back(h.id);
            heads_.push_back(std::move(ph));
        }
        if (sources_.empty()) {
            BinaryRule br = fresh_rule();
            std::set<uint32_t> bound;
            attach(br, bound);
            br.heads = heads_;
            out_.push_back(std::move(br));
            return std::move(out_);
        }
        std::vector<Source> chain;
        if (groups.size() == 1) {
            for (size_t i : groups.begin()->second) chain.push_back(sources_[i]);
            join(chain, true);
        } else {
            // Each hint group is reduced on its own first; what it must keep
            // is whatever the other groups mention.
            for (auto& [g, members] : groups) {
                outside_.clear();
                for (auto& [h, others] : groups)
                    if (h != g)
                        for (size_t i : others) outside_.insert(sources_[i].vars.begin(), sources_[i].vars.end());
                std::vector<Source> srcs;
                for (size_t i : members) srcs.push_back(sources_[i]);
                chain.push_back(join(srcs, false));
            }
            outside_.clear();
            join(chain, true);
        }
        return std::move(out_);
    }

private:
    void count(const CoreClause& c, bool with_id) {
        if (with_id) ++uses_[c.id];
        for (const auto& a : c.args)
            if (a.is_var()) ++uses_[a.var];
    }

    uint32_t slot(const std::string& v) {
        auto [it, fresh] = slots_.emplace(v, static_cast<uint32_t>(slot_names_.size()));
        if (fresh) slot_names_.push_back(v);
        return it->second;
    }

    PTerm term(const Atom& a) {
        if (!a.is_var()) return PTerm{PTerm::Kind::Lit, 0, a.lit};
        if (uses_[a.var] <= 1) return PTerm{PTerm::Kind::Ignore, 0, {}};
        return PTerm{PTerm::Kind::Var, slot(a.var), {}};
    }

    PTerm head_term(const Atom& a) {
        if (a.is_var())
            for (size_t k = 0; k < head_ids_.size(); ++k)
                if (head_ids_[k] == a.var) return PTerm{PTerm::Kind::HeadRef, static_cast<uint32_t>(k), {}};
        if (!a.is_var()) return PTerm{PTerm::Kind::Lit, 0, a.lit};
        return PTerm{PTerm::Kind::Var, slot(a.var), {}};
    }

    Source source(const CoreClause& c) {
        Source s;
        s.atom.rel = plan_.declare(c.tag, static_cast<uint32_t>(c.args.size()));
        s.atom.cols.push_back(term(Atom::variable(c.id)));
        for (const auto& a : c.args) s.atom.cols.push_back(term(a));
        for (const auto& t : s.atom.cols)
            if (t.kind == PTerm::Kind::Var) s.vars.insert(t.slot);
        return s;
    }

    BinaryRule fresh_rule() {
        BinaryRule br;
        br.label = rule_.label;
        br.core_rule = core_;
        return br;
    }

    static bool filter_ready(const CoreClause& f, const std::set<uint32_t>& bound, const std::map<std::string, uint32_t>& slots,
                             const absl::flat_hash_map<std::string, int>& uses) {
        uint32_t mask = 0;
        for (size_t k = 0; k < f.args.size(); ++k) {
            const auto& a = f.args[k];
            bool ok = !a.is_var();
            if (a.is_var()) {
                auto it = slots.find(a.var);
                ok = it != slots.end() && bound.contains(it->second);
                if (f.kind == ClauseKind::Neg && uses.at(a.var) <= 1) ok = true;
            }
            if (ok) mask |= 1u << k;
        }
        if (f.kind == ClauseKind::Neg) return mask == (1u << f.args.size()) - 1;
        return builtin_mode_ok(find_builtin(f.tag)->id, mask);
    }

    // Attaches every filter that can run once `bound` is known; builtin
    // outputs extend `bound`.
    void attach(BinaryRule& br, std::set<uint32_t>& bound) {
        for (bool changed = true; changed;) {
            changed = false;
            for (auto& f : filters_) {
                if (!f || !filter_ready(*f, bound, slots_, uses_)) continue;
                PlanFilter pf;
                pf.kind = f->kind;
                if (f->kind == ClauseKind::Builtin) {
                    pf.builtin = find_builtin(f->tag)->id;
                    for (const auto& a : f->args) {
                        PTerm t = a.is_var() ? PTerm{PTerm::Kind::Var, slot(a.var), {}} : PTerm{PTerm::Kind::Lit, 0, a.lit};
                        if (t.kind == PTerm::Kind::Var) bound.insert(t.slot);
                        pf.args.push_back(std::move(t));
                    }
                } else {
                    pf.rel = plan_.declare(f->tag, static_cast<uint32_t>(f->args.size()));
                    for (const auto& a : f->args) pf.args.push_back(term(a));
                }
                br.filters.push_back(std::move(pf));
                f = nullptr;
                changed = true;
            }
        }
    }

    std::set<uint32_t> needed_later() {
        std::set<uint32_t> need = outside_;
        for (const auto* f : filters_)
            if (f)
                for (const auto& a : f->args)
                    if (a.is_var() && slots_.contains(a.var)) need.insert(slots_.at(a.var));
        for (const auto& h : heads_)
            for (const auto& t : h.args)
                if (t.kind == PTerm::Kind::Var) need.insert(t.slot);
        return need;
    }

    // Left-linear join of `srcs`. A final chain ends in the rule's heads;
    // otherwise the result is materialised as an intermediate relation.
    Source join(const std::vector<Source>& srcs, bool final) {
        if (srcs.size() == 1 && !final) return srcs[0];
        Source acc = srcs[0];
        if (srcs.size() == 1) {
            BinaryRule br = fresh_rule();
            br.body.push_back(acc.atom);
            std::set<uint32_t> bound = acc.vars;
            attach(br, bound);
            br.heads = heads_;
            out_.push_back(std::move(br));
            return acc;
        }
        for (size_t i = 1; i < srcs.size(); ++i) {
            BinaryRule br = fresh_rule();
            br.body = {acc.atom, srcs[i].atom};
            std::set<uint32_t> bound = acc.vars;
            bound.insert(srcs[i].vars.begin(), srcs[i].vars.end());
            attach(br, bound);
            bool last = i + 1 == srcs.size();
            if (last && final) {
                br.heads = heads_;
                out_.push_back(std::move(br));
                return acc;
            }
            // Variables still needed: later sources in this chain, anything
            // outside it, open filters and heads.
            std::set<uint32_t> need = needed_later();
            for (size_t k = i + 1; k < srcs.size(); ++k) need.insert(srcs[k].vars.begin(), srcs[k].vars.end());
            std::vector<uint32_t> live;
            for (uint32_t v : bound)
                if (need.contains(v)) live.push_back(v);
            std::string name = "$" + rule_.label + "-j" + std::to_string(++parts_);
            RelId rel = plan_.declare(name, static_cast<uint32_t>(live.size()), true);
            PlanHead ph{rel, {}};
            Source next;
            next.atom.rel = rel;
            next.atom.cols.push_back(PTerm{PTerm::Kind::Ignore, 0, {}});
            for (uint32_t v : live) {
                ph.args.push_back(PTerm{PTerm::Kind::Var, v, {}});
                next.atom.cols.push_back(PTerm{PTerm::Kind::Var, v, {}});
                next.vars.insert(v);
            }
            br.heads = {ph};
            out_.push_back(std::move(br));
            acc = std::move(next);
        }
        return acc;
    }

    const CoreRule& rule_;
    uint32_t core_;
    Plan& plan_;
    absl::flat_hash_map<std::string, int> uses_;
    std::map<std::string, uint32_t> slots_;
    std::vector<std::string> slot_names_;
    std::vector<Source> sources_;
    std::set<uint32_t> outside_;  // variables other hint groups mention
    std::vector<const CoreClause*> filters_;
    std::vector<PlanHead> heads_;
    std::vector<std::string> head_ids_;
    std::vector<BinaryRule> out_;
    int parts_ = 0;

public:
    const std::vector<std::string>& slot_names() const { return slot_names_; }
};

}  // namespace

std::vector<BinaryRule> partition_rule(const CoreRule& rule, uint32_t core_index, Plan& plan) {
    Partitioner p(rule, core_index, plan);
    auto rules = p.run();
    for (size_t i = 0; i < rules.size(); ++i) {
        rules[i].slots = p.slot_names();
        if (rules.size() > 1) rules[i].label = rule.label + ".b" + std::to_string(i);
    }
    return rules;
}

// ---------------------------------------------------------------------------
// indices

namespace {

uint32_t add_index(Plan& plan, IndexSpec spec) {
    auto& rel = plan.relations[spec.rel];
    for (uint32_t id : rel.indices)
        if (plan.indices[id] == spec) return id;
    uint32_t id = static_cast<uint32_t>(plan.indices.size());
    plan.indices.push_back(spec);
    rel.indices.push_back(id);
    return id;
}

IndexSpec index_with_key(RelId rel, uint32_t arity, const std::vector<uint32_t>& key) {
    IndexSpec s{rel, key, static_cast<uint32_t>(key.size()), false};
    for (uint32_t c = 1; c <= arity; ++c)
        if (std::find(key.begin(), key.end(), c) == key.end()) s.order.push_back(c);
    if (std::find(key.begin(), key.end(), 0u) == key.end()) s.order.push_back(0);
    return s;
}

std::vector<uint32_t> column_scan_order(size_t ncols) {
    std::vector<uint32_t> order;
    for (uint32_t c = 1; c < ncols; ++c) order.push_back(c);
    order.push_back(0);
    return order;
}

}  // namespace

void select_indices(Plan& plan) {
    for (RelId r = 0; r < plan.relations.size(); ++r) {
        auto& rel = plan.relations[r];
        if (!rel.indices.empty()) continue;
        IndexSpec canon{r, column_scan_order(rel.arity + 1), rel.arity, true};
        rel.canonical_index = add_index(plan, canon);
    }
    for (auto& br : plan.rules) {
        if (br.body.size() == 1) {
            br.body[0].index = plan.relations[br.body[0].rel].canonical_index;
        } else if (br.body.size() == 2) {
            auto& a = br.body[0];
            auto& b = br.body[1];
            std::vector<uint32_t> join_vars;
            for (uint32_t c : column_scan_order(a.cols.size())) {
                const auto& t = a.cols[c];
                if (t.kind != PTerm::Kind::Var) continue;
                if (std::find(join_vars.begin(), join_vars.end(), t.slot) != join_vars.end()) continue;
                bool in_b = std::any_of(b.cols.begin(), b.cols.end(),
                                        [&](const PTerm& u) { return u.kind == PTerm::Kind::Var && u.slot == t.slot; });
                if (in_b) join_vars.push_back(t.slot);
            }
            br.cross_product = join_vars.empty();
            for (auto* atom : {&a, &b}) {
                std::vector<uint32_t> key;
                for (uint32_t v : join_vars)
                    for (uint32_t c : column_scan_order(atom->cols.size()))
                        if (atom->cols[c].kind == PTerm::Kind::Var && atom->cols[c].slot == v) {
                            key.push_back(c);
                            break;
                        }
                const auto& rel = plan.relations[atom->rel];
                IndexSpec spec = index_with_key(atom->rel, rel.arity, key);
                if (spec.order == column_scan_order(rel.arity + 1) && spec.key_len == rel.arity)
                    atom->index = rel.canonical_index;
                else
                    atom->index = add_index(plan, spec);
            }
        }
        for (auto& f : br.filters) {
            if (f.kind != ClauseKind::Neg) continue;
            const auto& rel = plan.relations[f.rel];
            std::vector<uint32_t> key;
            for (uint32_t c = 1; c <= rel.arity; ++c)
                if (f.args[c - 1].kind != PTerm::Kind::Ignore) key.push_back(c);
            f.probe_len = static_cast<uint32_t>(key.size());
            if (key.size() == rel.arity)
                f.index = rel.canonical_index;
            else
                f.index = add_index(plan, index_with_key(f.rel, rel.arity, key));
        }
    }
}

// ---------------------------------------------------------------------------
// semi-naive variants

std::vector<RuleVariant> incrementalize(const Plan& plan, const PlanScc& scc, bool seed) {
    absl::flat_hash_set<RelId> dynamic(scc.writes.begin(), scc.writes.end());
    std::vector<RuleVariant> out;
    for (uint32_t ri : scc.rules) {
        const auto& br = plan.rules[ri];
        if (seed) {
            out.push_back({ri, {Version::Total, Version::Total}});
            continue;
        }
        if (br.body.size() == 1) {
            if (dynamic.contains(br.body[0].rel)) out.push_back({ri, {Version::Delta, Version::Total}});
        } else if (br.body.size() == 2) {
            bool da = dynamic.contains(br.body[0].rel), db = dynamic.contains(br.body[1].rel);
            if (da) out.push_back({ri, {Version::Delta, Version::Total}});
            if (db) out.push_back({ri, {Version::Total, Version::Delta}});
            if (da && db) out.push_back({ri, {Version::Delta, Version::Delta}});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// whole program

Plan plan_program(const CoreProgram& program) {
    Plan plan;
    auto core_sccs = stratify_core(program, &plan.warnings);
    // Declare user relations first so their ids are stable and small.
    for (const auto& r : program.rules) {
        for (const auto& h : r.heads) plan.declare(h.tag, static_cast<uint32_t>(h.args.size()));
        for (const auto& c : r.body)
            if (c.kind != ClauseKind::Builtin) plan.declare(c.tag, static_cast<uint32_t>(c.args.size()));
    }
    for (const auto& cs : core_sccs) {
        PlanScc scc;
        std::set<RelId> writes, reads;
        for (uint32_t ci : cs.rules) {
            for (auto& br : partition_rule(program.rules[ci], ci, plan)) {
                scc.rules.push_back(static_cast<uint32_t>(plan.rules.size()));
                for (const auto& h : br.heads) writes.insert(h.rel);
                for (const auto& a : br.body) reads.insert(a.rel);
                for (const auto& f : br.filters)
                    if (f.kind == ClauseKind::Neg) reads.insert(f.rel);
                plan.rules.push_back(std::move(br));
            }
        }
        scc.writes.assign(writes.begin(), writes.end());
        scc.reads.assign(reads.begin(), reads.end());
        plan.sccs.push_back(std::move(scc));
    }
    select_indices(plan);
    for (auto& br : plan.rules)
        if (br.cross_product)
            plan.warnings.push_back({Severity::Warning, program.rules[br.core_rule].span,
                                     "rule " + br.label + " joins two clauses with no shared variable (cross product)"});
    for (auto& scc : plan.sccs) {
        scc.seed = incrementalize(plan, scc, true);
        scc.delta = incrementalize(plan, scc, false);
    }
    return plan;
}

// ---------------------------------------------------------------------------
// dump

namespace {

std::string term_text(const PTerm& t, const BinaryRule& br) {
    switch (t.kind) {
        case PTerm::Kind::Var: return br.slots.at(t.slot);
        case PTerm::Kind::Lit: return to_text(t.lit);
        case PTerm::Kind::Ignore: return "_";
        case PTerm::Kind::HeadRef: return "^" + std::to_string(t.slot);
    }
    return "?";
}

std::string index_text(const Plan& plan, uint32_t id) {
    const auto& ix = plan.indices[id];
    std::string out = "#" + std::to_string(id) + "(";
    for (size_t i = 0; i < ix.order.size(); ++i) {
        if (i == ix.key_len) out += i ? " | " : "| ";
        else if (i) out += " ";
        out += std::to_string(ix.order[i]);
    }
    if (ix.key_len == ix.order.size()) out += " |";
    return out + ")";
}

}  // namespace

std::string Plan::dump() const {
    std::ostringstream os;
    os << "relations:\n";
    for (size_t r = 0; r < relations.size(); ++r) {
        const auto& rel = relations[r];
        os << "  " << rel.tag << "/" << rel.arity << (rel.intermediate ? " intermediate" : "") << "\n";
        for (uint32_t ix : rel.indices) {
            os << "    index " << index_text(*this, ix) << (indices[ix].canonical ? " canonical" : "") << "\n";
            if (!indices[ix].canonical) os << "    admin copy " << index_text(*this, rel.canonical_index) << " -> " << index_text(*this, ix) << "\n";
        }
    }
    for (size_t s = 0; s < sccs.size(); ++s) {
        const auto& scc = sccs[s];
        os << "stratum " << s << ": writes";
        for (RelId r : scc.writes) os << " " << relations[r].tag << "/" << relations[r].arity;
        os << "\n";
        for (uint32_t ri : scc.rules) {
            const auto& br = rules[ri];
            os << "  rule " << br.label << ":";
            for (const auto& h : br.heads) {
                os << " (" << relations[h.rel].tag;
                for (const auto& t : h.args) os << " " << term_text(t, br);
                os << ")";
            }
            os << " <--";
            for (const auto& a : br.body) {
                os << " (" << relations[a.rel].tag;
                for (const auto& t : a.cols) os << " " << term_text(t, br);
                os << ")@" << index_text(*this, a.index);
            }
            for (const auto& f : br.filters) {
                if (f.kind == ClauseKind::Neg) {
                    os << " ~(" << relations[f.rel].tag;
                    for (const auto& t : f.args) os << " " << term_text(t, br);
                    os << ")@" << index_text(*this, f.index);
                } else {
                    os << " (" << builtin_sig(f.builtin).name;
                    for (const auto& t : f.args) os << " " << term_text(t, br);
                    os << ")";
                }
            }
            os << "\n";
        }
        auto variants = [&](const char* name, const std::vector<RuleVariant>& vs) {
            os << "  " << name << ":";
            for (const auto& v : vs) {
                os << " " << rules[v.rule].label << "[";
                for (size_t k = 0; k < rules[v.rule].body.size(); ++k) os << (v.v[k] == Version::Delta ? "D" : "T");
                os << "]";
            }
            os << "\n";
        };
        variants("seed", scc.seed);
        variants("delta", scc.delta);
    }
    return os.str();
}

}  // namespace slog
