#include <gtest/gtest.h>

#include "slog/desugar.hpp"
#include "slog/engine.hpp"
#include "slog/planner.hpp"
#include "support.hpp"

using namespace slog;

namespace {

Plan plan_of(std::string_view text) { return plan_program(compile_source(text)); }

std::string index_text(const Plan& p, uint32_t i) {
    const IndexSpec& s = p.indices[i];
    std::string out = "(";
    for (uint32_t k = 0; k < s.order.size(); ++k) {
        if (k == s.key_len) out += k ? " |" : "|";
        if (k) out += " ";
        out += std::to_string(s.order[k]);
    }
    if (s.key_len == s.order.size()) out += " |";
    return out + ")";
}

std::set<std::string> indices_of(const Plan& p, const std::string& tag, uint32_t arity) {
    std::set<std::string> out;
    for (uint32_t i : p.relations[p.relation_id(tag, arity)].indices) out.insert(index_text(p, i));
    return out;
}

std::string variants(const std::vector<RuleVariant>& vs) {
    std::string out;
    for (const auto& v : vs) {
        out += std::to_string(v.rule) + ":";
        for (Version x : v.v) out += x == Version::Total ? "T" : "D";
        out += " ";
    }
    return out;
}

}  // namespace

TEST(Planner, TransitiveClosureGolden) {
    Plan p = plan_of(read_corpus_program("tc"));
    EXPECT_EQ(p.dump(),
              "relations:\n"
              "  path/2\n"
              "    index #0(1 2 | 0) canonical\n"
              "    index #3(1 | 2 0)\n"
              "    admin copy #0(1 2 | 0) -> #3(1 | 2 0)\n"
              "  edge/2\n"
              "    index #1(1 2 | 0) canonical\n"
              "    index #2(2 | 1 0)\n"
              "    admin copy #1(1 2 | 0) -> #2(2 | 1 0)\n"
              "stratum 0: writes path/2\n"
              "  rule r0: (path x y) <-- (edge _ x y)@#1(1 2 | 0)\n"
              "  rule r1: (path x z) <-- (edge _ x y)@#2(2 | 1 0) (path _ y z)@#3(1 | 2 0)\n"
              "  seed: r0[T] r1[TT]\n"
              "  delta: r1[TD]\n");
}

TEST(Planner, TransitiveClosureShape) {
    Plan p = plan_of(read_corpus_program("tc"));
    ASSERT_EQ(p.sccs.size(), 1u);
    EXPECT_EQ(p.sccs[0].rules.size(), 2u);
    EXPECT_EQ(indices_of(p, "edge", 2), (std::set<std::string>{"(1 2 | 0)", "(2 | 1 0)"}));
    EXPECT_EQ(indices_of(p, "path", 2), (std::set<std::string>{"(1 2 | 0)", "(1 | 2 0)"}));
    EXPECT_EQ(p.dump(), plan_of(read_corpus_program("tc")).dump());
}

TEST(Planner, LongBodiesGetIntermediates) {
    Plan p = plan_of("[(h x w) <-- (a x y) (b y z) (c z w)]");
    ASSERT_EQ(p.rules.size(), 2u);
    int intermediates = 0;
    for (const auto& r : p.relations) intermediates += r.intermediate;
    EXPECT_EQ(intermediates, 1);
    for (const auto& r : p.rules) EXPECT_LE(r.body.size(), 2u);
    // The intermediate carries exactly the variables still needed.
    const auto& mid = p.relations[p.rules[0].heads[0].rel];
    EXPECT_TRUE(mid.intermediate);
    EXPECT_EQ(mid.arity, 2u);
}

TEST(Planner, FiltersAttachWhereTheirVariablesAreBound) {
    Plan p = plan_of("[(h x w) <-- (a x y) (b y z) (c z w) (=/= x y) ~(d w)]");
    ASSERT_EQ(p.rules.size(), 2u);
    EXPECT_EQ(p.rules[0].filters.size(), 1u);
    EXPECT_EQ(p.rules[1].filters.size(), 1u);
    EXPECT_EQ(p.rules[1].filters[0].kind, ClauseKind::Neg);
}

TEST(Planner, CrossProductWarnsAndStillEvaluates) {
    std::string text = "(a 1) (a 2) (a 3) (b 4) (b 5) (b 6)\n[(p x y) <-- (a x) (b y)]";
    Compiled c = compile_program(text);
    bool warned = false;
    for (const auto& w : c.warnings) warned |= w.message.find("cross product") != std::string::npos;
    EXPECT_TRUE(warned);
    bool flagged = false;
    for (const auto& r : c.plan.rules) flagged |= r.cross_product;
    EXPECT_TRUE(flagged);
    auto par = run_parallel(c, {}, RuntimeConfig{.workers = 2, .buckets = 16});
    auto naive = naive_fixpoint(c.core, {});
    EXPECT_EQ(listing_of(*par.db), listing_of(naive.db));
    EXPECT_EQ(listing_of(*par.db).at("p").size(), 9u);
}

TEST(Planner, FreeIsComputedBeforeSubst) {
    CoreProgram core = compile_source(read_corpus_program("subst"));
    auto sccs = stratify_core(core);
    auto position = [&](const std::string& tag) {
        for (size_t i = 0; i < sccs.size(); ++i)
            for (const auto& w : sccs[i].writes)
                if (w.first == tag) return static_cast<int>(i);
        return -1;
    };
    ASSERT_GE(position("free"), 0);
    EXPECT_LT(position("free"), position("subst"));
}

TEST(Planner, RejectsNegativeCycles) {
    EXPECT_THROW(plan_of("[(p) <-- ~(p)]"), CompileError);
    EXPECT_THROW(plan_of("(q 1)\n[(p x) <-- (q x) ~(r x)]\n[(r x) <-- (p x)]"), CompileError);
    EXPECT_NO_THROW(plan_of("(q 1)\n[(p x) <-- (q x) ~(r x)]\n[(r x) <-- (q x)]"));
}

TEST(Planner, TwoRecursiveClausesGetThreeDeltaVariants) {
    Plan p = plan_of("[(p x z) <-- (p x y) (p y z)]\n[(p x y) <-- (e x y)]");
    ASSERT_EQ(p.sccs.size(), 1u);
    EXPECT_EQ(variants(p.sccs[0].delta), "0:DT 0:TD 0:DD ");
    EXPECT_EQ(variants(p.sccs[0].seed), "0:TT 1:TT ");
}

TEST(Planner, StaticRelationsNeverGetDeltaVariants) {
    Plan p = plan_of(read_corpus_program("tc"));
    EXPECT_EQ(variants(p.sccs[0].delta), "1:TD ");
}

TEST(Planner, UnknownRelationIsOutOfRange) {
    Plan p = plan_of(read_corpus_program("tc"));
    EXPECT_THROW(p.relation_id("nope", 2), std::out_of_range);
}

// Every relation has a canonical index over all columns keyed by the
// arguments; every join probes both sides on the shared variables; every
// negation probe fixes a prefix of bound columns.
TEST(PlannerProperty, IndicesCoverEveryAccess) {
    for (const auto& name : slog::testing::corpus_programs()) {
        Plan p = plan_program(compile_source(read_corpus_program(name)));
        for (const auto& rel : p.relations) {
            const IndexSpec& c = p.indices[rel.canonical_index];
            EXPECT_TRUE(c.canonical);
            EXPECT_EQ(c.key_len, rel.arity);
            EXPECT_EQ(c.order.back(), 0u);
        }
        for (const auto& idx : p.indices) {
            std::vector<uint32_t> cols = idx.order;
            std::sort(cols.begin(), cols.end());
            for (uint32_t k = 0; k < cols.size(); ++k) ASSERT_EQ(cols[k], k) << name;
        }
        for (const auto& r : p.rules) {
            if (r.body.size() != 2) continue;
            const IndexSpec& a = p.indices[r.body[0].index];
            const IndexSpec& b = p.indices[r.body[1].index];
            ASSERT_EQ(a.key_len, b.key_len) << name << " " << r.label;
            for (uint32_t k = 0; k < a.key_len; ++k) {
                const PTerm& x = r.body[0].cols[a.order[k]];
                const PTerm& y = r.body[1].cols[b.order[k]];
                EXPECT_EQ(x.kind, PTerm::Kind::Var) << name << " " << r.label;
                EXPECT_EQ(y.kind, PTerm::Kind::Var);
                EXPECT_EQ(x.slot, y.slot) << name << " " << r.label;
            }
            if (a.key_len == 0) EXPECT_TRUE(r.cross_product) << name;
        }
        for (const auto& r : p.rules)
            for (const auto& f : r.filters)
                if (f.kind == ClauseKind::Neg) {
                    const IndexSpec& s = p.indices[f.index];
                    for (uint32_t k = 0; k < f.probe_len; ++k) {
                        ASSERT_GE(s.order[k], 1u);
                        EXPECT_NE(f.args[s.order[k] - 1].kind, PTerm::Kind::Ignore) << name;
                    }
                }
    }
}

// Components come in an order where nothing is negated before every rule
// writing it has run, unless the planner said otherwise.
TEST(PlannerProperty, StrataRespectNegation) {
    for (const auto& name : slog::testing::corpus_programs()) {
        CoreProgram core = compile_source(read_corpus_program(name));
        std::vector<Diagnostic> warnings;
        auto sccs = stratify_core(core, &warnings);
        if (!warnings.empty()) continue;
        std::set<RelKey> written_later;
        for (size_t i = sccs.size(); i-- > 0;) {
            for (uint32_t r : sccs[i].rules)
                for (const auto& c : core.rules[r].body)
                    if (c.kind == ClauseKind::Neg)
                        EXPECT_FALSE(written_later.contains({c.tag, static_cast<uint32_t>(c.args.size())}))
                            << name << " " << c.tag;
            for (const auto& w : sccs[i].writes) written_later.insert(w);
        }
    }
}

TEST(PlannerProperty, EveryRuleIsPlannedOnce) {
    for (const auto& name : slog::testing::corpus_programs()) {
        CoreProgram core = compile_source(read_corpus_program(name));
        Plan p = plan_program(core);
        std::set<uint32_t> seen;
        for (const auto& s : p.sccs)
            for (uint32_t r : s.rules) EXPECT_TRUE(seen.insert(r).second) << name;
        EXPECT_EQ(seen.size(), p.rules.size()) << name;
        std::set<uint32_t> cores;
        for (const auto& r : p.rules) cores.insert(r.core_rule);
        EXPECT_EQ(cores.size(), core.rules.size()) << name;
    }
}
