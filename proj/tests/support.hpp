// Test-side oracles and generators. Nothing here calls into the engine's
// evaluation code, so results computed here are independent of it.
#pragma once

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string_view>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "slog/core_ir.hpp"
#include "slog/engine.hpp"
#include "slog/fact_text.hpp"
#include "slog/workloads.hpp"

namespace slog::testing {

// Every (a, b) with b reachable from a by one or more edges, by BFS.
inline std::set<std::pair<int64_t, int64_t>> reachability(const std::vector<Edge>& edges) {
    std::map<int64_t, std::vector<int64_t>> succ;
    std::set<int64_t> nodes;
    for (auto [a, b] : edges) {
        succ[a].push_back(b);
        nodes.insert(a);
    }
    std::set<std::pair<int64_t, int64_t>> out;
    for (int64_t s : nodes) {
        std::set<int64_t> seen;
        std::queue<int64_t> q;
        for (int64_t n : succ[s])
            if (seen.insert(n).second) q.push(n);
        while (!q.empty()) {
            int64_t n = q.front();
            q.pop();
            out.emplace(s, n);
            for (int64_t m : succ[n])
                if (seen.insert(m).second) q.push(m);
        }
    }
    return out;
}

inline std::vector<std::string> path_lines(const std::set<std::pair<int64_t, int64_t>>& pairs) {
    std::vector<std::string> out;
    for (auto [a, b] : pairs) out.push_back("(path " + std::to_string(a) + " " + std::to_string(b) + ")");
    std::sort(out.begin(), out.end());
    return out;
}

// Random ground trees over a small alphabet so that subtrees repeat.
class TreeGen {
public:
    explicit TreeGen(uint64_t seed) : rng_(seed) {}

    TreePtr tree(int depth) {
        static const char* tags[] = {"a", "b", "lam", "ref", "pair"};
        std::string tag = tags[pick(5)];
        int arity = static_cast<int>(pick(4));
        std::vector<TreeChild> kids;
        for (int i = 0; i < arity; ++i) {
            if (depth > 1 && pick(2) == 0)
                kids.emplace_back(tree(depth - 1));
            else
                kids.emplace_back(literal());
        }
        return FactTree::make(tag, std::move(kids));
    }

    Literal literal() {
        switch (pick(4)) {
            case 0: return Literal::integer(static_cast<int64_t>(pick(7)) - 3);
            case 1: return Literal::boolean(pick(2) == 1);
            case 2: return Literal::string(std::string(1, static_cast<char>('x' + pick(3))));
            default: return Literal::string("q\"\\\n" + std::to_string(pick(2)));
        }
    }

    uint64_t pick(uint64_t n) { return std::uniform_int_distribution<uint64_t>(0, n - 1)(rng_); }
    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline size_t internal_nodes(const TreePtr& t) {
    size_t n = 1;
    for (const auto& c : t->children)
        if (const auto* p = std::get_if<TreePtr>(&c)) n += internal_nodes(*p);
    return n;
}

inline size_t distinct_internal_nodes(const TreePtr& t) {
    std::set<std::string> seen;
    std::function<void(const TreePtr&)> go = [&](const TreePtr& x) {
        seen.insert(to_text(*x));
        for (const auto& c : x->children)
            if (const auto* p = std::get_if<TreePtr>(&c)) go(*p);
    };
    go(t);
    return seen.size();
}

// Alpha-equivalence of core rules, ignoring clause order within heads and
// bodies. Tags of compiler-generated midpoint relations compare equal to any
// tag ending in "-midpoint".
class AlphaMatcher {
public:
    static bool equivalent(const CoreRule& a, const CoreRule& b) {
        if (a.heads.size() != b.heads.size() || a.body.size() != b.body.size()) return false;
        AlphaMatcher m;
        std::vector<bool> used(a.heads.size() + a.body.size(), false);
        return m.match(a, b, 0, used);
    }

    // Every rule of `want` matches a distinct rule of `got`, and vice versa.
    static bool same_program(const std::vector<CoreRule>& want, const std::vector<CoreRule>& got) {
        if (want.size() != got.size()) return false;
        std::vector<bool> taken(got.size(), false);
        std::function<bool(size_t)> go = [&](size_t i) {
            if (i == want.size()) return true;
            for (size_t j = 0; j < got.size(); ++j) {
                if (taken[j] || !equivalent(want[i], got[j])) continue;
                taken[j] = true;
                if (go(i + 1)) return true;
                taken[j] = false;
            }
            return false;
        };
        return go(0);
    }

private:
    static bool midpoint(const std::string& tag) {
        return tag.find("-mid") != std::string::npos && (tag[0] == '$' || tag.ends_with("-midpoint"));
    }

    static bool same_tag(const std::string& x, const std::string& y) {
        return x == y || (midpoint(x) && midpoint(y));
    }

    // Slot i < |heads| is head i, then body clauses.
    bool match(const CoreRule& a, const CoreRule& b, size_t i, std::vector<bool>& used) {
        size_t nh = a.heads.size(), n = nh + a.body.size();
        if (i == n) return true;
        const CoreClause& x = i < nh ? a.heads[i] : a.body[i - nh];
        size_t lo = i < nh ? 0 : nh, hi = i < nh ? nh : n;
        for (size_t j = lo; j < hi; ++j) {
            if (used[j]) continue;
            const CoreClause& y = j < nh ? b.heads[j] : b.body[j - nh];
            auto saved_f = fwd_, saved_b = bwd_;
            if (clause(x, y)) {
                used[j] = true;
                if (match(a, b, i + 1, used)) return true;
                used[j] = false;
            }
            fwd_ = std::move(saved_f);
            bwd_ = std::move(saved_b);
        }
        return false;
    }

    bool clause(const CoreClause& x, const CoreClause& y) {
        if (x.kind != y.kind || !same_tag(x.tag, y.tag) || x.args.size() != y.args.size()) return false;
        if (x.kind == ClauseKind::Rel && !var(x.id, y.id)) return false;
        for (size_t k = 0; k < x.args.size(); ++k) {
            const Atom &p = x.args[k], &q = y.args[k];
            if (p.is_var() != q.is_var()) return false;
            if (p.is_var() ? !var(p.var, q.var) : !(p.lit == q.lit)) return false;
        }
        return true;
    }

    bool var(const std::string& x, const std::string& y) {
        auto f = fwd_.find(x);
        auto g = bwd_.find(y);
        if (f != fwd_.end() || g != bwd_.end())
            return f != fwd_.end() && g != bwd_.end() && f->second == y && g->second == x;
        fwd_[x] = y;
        bwd_[y] = x;
        return true;
    }

    std::map<std::string, std::string> fwd_, bwd_;
};

// Reads hand-written core rules: `[heads <-- body]` or `[body --> heads]`
// where every clause is flat. `(= id (tag args))` names a clause's id,
// `~(...)` is a negation and the usual operator tags are builtins. Clauses
// without a written id get a fresh one.
class CoreReader {
public:
    static std::vector<CoreRule> read(std::string_view text) {
        CoreReader r(text);
        std::vector<CoreRule> out;
        while (r.skip(), r.pos_ < r.text_.size()) out.push_back(r.rule());
        return out;
    }

private:
    explicit CoreReader(std::string_view t) : text_(t) {}

    CoreRule rule() {
        expect("[");
        std::vector<CoreClause> left, right;
        bool forward = false;
        auto* side = &left;
        for (;;) {
            skip();
            if (peek("]")) break;
            if (peek("<--") || peek("-->")) {
                forward = peek("-->");
                pos_ += 3;
                side = &right;
                continue;
            }
            side->push_back(clause());
        }
        expect("]");
        CoreRule r;
        r.heads = forward ? right : left;
        r.body = forward ? left : right;
        return r;
    }

    CoreClause clause() {
        skip();
        CoreClause c;
        if (peek("~")) {
            ++pos_;
            c = plain();
            c.kind = ClauseKind::Neg;
            return c;
        }
        size_t save = pos_;
        expect("(");
        std::string head = token();
        if (head == "=") {
            std::string id = token();
            skip();
            if (peek("(")) {
                c = plain();
                c.id = id;
                expect(")");
                return c;
            }
        }
        pos_ = save;
        c = plain();
        static const std::set<std::string> ops = {"=", "=/=", "+", "-", "*", "<", "<=", ">", ">="};
        if (ops.contains(c.tag)) {
            c.kind = ClauseKind::Builtin;
            c.id.clear();
        }
        return c;
    }

    CoreClause plain() {
        expect("(");
        CoreClause c;
        c.tag = token();
        c.id = "_fresh" + std::to_string(fresh_++);
        for (;;) {
            skip();
            if (peek(")")) break;
            std::string t = token();
            if (t == "#t" || t == "#f")
                c.args.push_back(Atom::literal(Literal::boolean(t == "#t")));
            else if (t[0] == '"')
                c.args.push_back(Atom::literal(Literal::string(t.substr(1, t.size() - 2))));
            else if (std::isdigit(static_cast<unsigned char>(t.back())) &&
                     (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '-'))
                c.args.push_back(Atom::literal(Literal::integer(std::stoll(t))));
            else
                c.args.push_back(Atom::variable(t));
        }
        expect(")");
        return c;
    }

    std::string token() {
        skip();
        size_t b = pos_;
        if (text_[pos_] == '"') {
            ++pos_;
            while (text_[pos_] != '"') ++pos_;
            ++pos_;
        } else {
            while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
                   text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ']')
                ++pos_;
        }
        return std::string(text_.substr(b, pos_ - b));
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }
    void expect(std::string_view s) {
        skip();
        if (!peek(s)) throw std::runtime_error("core reader: expected " + std::string(s) + " at " + std::to_string(pos_));
        pos_ += s.size();
    }

    std::string_view text_;
    size_t pos_ = 0;
    int fresh_ = 0;
};

// Corpus programs with their seed files.
inline const std::vector<std::string>& corpus_programs() {
    static const std::vector<std::string> names = {
        "tc",      "free",    "append",  "plus",  "subst", "interp-cbn", "interp-cbv", "ce-cbn",
        "ce-cbv",  "cek-cbn", "cek-cbv", "ceskt", "kcfa",  "mcfa",       "stlc",       "itt",
    };
    return names;
}

// Seeds for a corpus program; TC gets a small random graph.
inline std::vector<TreePtr> corpus_seeds(const std::string& name) {
    if (name == "tc") return edge_facts(random_graph(30, 45, 11));
    return read_fact_file(corpus_dir() + "/" + name + ".facts");
}

inline std::vector<std::string> flatten(const Listing& l) {
    std::vector<std::string> out;
    for (const auto& [tag, lines] : l) out.insert(out.end(), lines.begin(), lines.end());
    return out;
}

}  // namespace slog::testing
