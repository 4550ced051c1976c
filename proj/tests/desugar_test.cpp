#include <gtest/gtest.h>

#include "slog/desugar.hpp"
#include "slog/parser.hpp"
#include "support.hpp"

using namespace slog;
using slog::testing::AlphaMatcher;
using slog::testing::CoreReader;

namespace {

std::string dump(const std::vector<CoreRule>& rules) {
    std::string out;
    for (const auto& r : rules) out += to_text(r) + "\n";
    return out;
}

void rename_vars(Item& it, std::map<std::string, std::string>& names, int& next) {
    if (it.kind == ItemKind::Var || it.kind == ItemKind::Unif) {
        auto [pos, fresh] = names.emplace(it.name, "");
        if (fresh) pos->second = "w" + std::to_string(next++);
        it.name = pos->second;
    }
    for (auto& c : it.items) rename_vars(c, names, next);
    if (it.rule) {
        auto copy = std::make_shared<SurfaceRule>(*it.rule);
        for (auto& h : copy->heads) rename_vars(h, names, next);
        for (auto& b : copy->bodies) rename_vars(b, names, next);
        it.rule = copy;
    }
}

}  // namespace

TEST(Desugar, FreeMatchesHandDesugaring) {
    auto want = CoreReader::read(R"(
        [(= e (ref x)) --> (free e x)]
        [(= e (lam x Eb)) (free Eb y) (=/= x y) --> (free e y)]
        [(= e (app Ef Ea)) (free Ef x) --> (free e x)]
        [(= e (app Ef Ea)) (free Ea x) --> (free e x)]
    )");
    auto got = compile_source(read_corpus_program("free")).rules;
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, SubstSplitsAtEachRequest) {
    auto want = CoreReader::read(R"(
        [(= e (ref x)) --> (free e x)]
        [(= e (lam x Eb)) (free Eb y) (=/= x y) --> (free e y)]
        [(= e (app Ef Ea)) (free Ef x) --> (free e x)]
        [(= e (app Ef Ea)) (free Ea x) --> (free e x)]

        [(= d (do-subst r x E)) (= r (ref x)) --> (subst d E)]
        [(=/= x y) (= d (do-subst r y E)) (= r (ref x)) --> (= r2 (ref x)) (subst d r2)]
        [(= d (do-subst l x E)) (= l (lam x Ebody)) --> (= l2 (lam x Ebody)) (subst d l2)]

        [(=/= x y) ~(free E x) (= do (do-subst l y E)) (= l (lam x Ebody))
         --> (= do2 (do-subst Ebody y E)) (rule7-midpoint do do2 x)]
        [(rule7-midpoint do do2 x) (subst do2 Ebody2) --> (= l2 (lam x Ebody2)) (subst do l2)]

        [(= do (do-subst a x E)) (= a (app Ef Ea))
         --> (= d1 (do-subst Ef x E)) (= d2 (do-subst Ea x E)) (rule8-midpoint do d1 d2)]
        [(rule8-midpoint do d1 d2) (subst d1 v1) (subst d2 v2) --> (= a2 (app v1 v2)) (subst do a2)]
    )");
    auto got = compile_source(read_corpus_program("subst")).rules;
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, LeavesNoSugarBehind) {
    for (const auto& name : slog::testing::corpus_programs()) {
        CoreProgram core = compile_source(read_corpus_program(name));
        for (const auto& r : core.rules) {
            for (const auto& h : r.heads) {
                EXPECT_EQ(h.kind, ClauseKind::Rel) << name;
                EXPECT_FALSE(h.id.empty()) << name;
            }
            for (const auto& b : r.body) {
                EXPECT_NE(b.tag, "or") << name;
                EXPECT_NE(b.tag, "and") << name;
            }
            std::string text = to_text(r);
            for (const char* s : {"?(", "!(", "{", "...", "-->"})
                EXPECT_EQ(text.find(s), std::string::npos) << name << ": " << text;
        }
    }
}

TEST(Desugar, EqualityOfVariablesMerges) {
    auto got = compile_source("[(p x) <-- (q x) (r y) (= x y)]").rules;
    auto want = CoreReader::read("[(p x) <-- (q x) (r x)]");
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, EqualityNamesAFact) {
    auto got = compile_source("[(p e) <-- (= e (ref x)) (q x)]").rules;
    auto want = CoreReader::read("[(p e) <-- (= e (ref x)) (q x)]");
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, ConflictingLiteralsDropTheRule) {
    CoreProgram core = compile_source("(q 1)\n[(p x) <-- (q x) (= x 1) (= x 2)]");
    ASSERT_EQ(core.rules.size(), 1u);
    ASSERT_EQ(core.warnings.size(), 1u);
    EXPECT_EQ(core.warnings[0].severity, Severity::Warning);
    EXPECT_EQ(core.warnings[0].span.line, 2u);
}

TEST(Desugar, CurlyInBodyBecomesAJoin) {
    auto got = compile_source("[(p v) <-- (q x) (r {f x} v)]").rules;
    auto want = CoreReader::read("[(p v) <-- (q x) (f x y) (r y v)]");
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, DisjunctionSplitsTheRule) {
    auto got = compile_source("[(p x) <-- (or (a x) (and (b x) (c x)))]").rules;
    auto want = CoreReader::read("[(p x) <-- (a x)] [(p x) <-- (b x) (c x)]");
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, NestedRulesInheritTheBody) {
    auto got = compile_source("[(a x) --> [(b y) --> (c x y)]]").rules;
    auto want = CoreReader::read("[(c x y) <-- (a x) (b y)]");
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, UnrelatedHeadsGetTheirOwnRules) {
    auto got = compile_source("[(p x) (q y) <-- (r x y)]").rules;
    auto want = CoreReader::read("[(p x) <-- (r x y)] [(q y) <-- (r x y)]");
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, ListsBecomeConsCells) {
    auto got = compile_source("[(p [x 1]) <-- (q x)]").rules;
    auto want = CoreReader::read("[(= n ($nil)) (= c1 ($cons 1 n)) (= c0 ($cons x c1)) (p c0) <-- (q x)]");
    EXPECT_TRUE(AlphaMatcher::same_program(want, got)) << dump(got);
}

TEST(Desugar, InnerSpliceUsesGeneratedAppend) {
    CoreProgram core = compile_source("[(p [xs ... 1]) <-- (q xs)]");
    bool append = false;
    for (const auto& r : core.rules)
        for (const auto& h : r.heads) append |= h.tag == "$append";
    EXPECT_TRUE(append) << to_text(core);
    CoreProgram tail = compile_source("[(p [1 xs ...]) <-- (q xs)]");
    EXPECT_EQ(tail.rules.size(), 1u);
}

TEST(Desugar, IndependentRequestsShareAStage) {
    auto got = compile_source("[(out v w) <-- (in x y) (res !(f x) v) (res !(g y) w)]").rules;
    ASSERT_EQ(got.size(), 2u) << dump(got);
    EXPECT_EQ(got[0].heads.size(), 3u);
    EXPECT_TRUE(is_generated_relation(got[0].heads.back().tag));
    // Second stage: the midpoint plus one lookup per request.
    EXPECT_EQ(got[1].body.size(), 3u);
}

TEST(Desugar, DependentRequestsChain) {
    auto got = compile_source("[(out w) <-- (in x) (res !(g x) v) (res !(f v) w)]").rules;
    EXPECT_EQ(got.size(), 3u) << dump(got);
    std::set<std::string> mids;
    for (const auto& r : got)
        for (const auto& h : r.heads)
            if (is_generated_relation(h.tag)) mids.insert(h.tag);
    EXPECT_EQ(mids.size(), 2u);
}

TEST(Desugar, MidpointNamesAreReservedAndUnique) {
    for (const auto& name : slog::testing::corpus_programs()) {
        CoreProgram core = compile_source(read_corpus_program(name));
        std::map<std::string, int> writers;
        for (const auto& r : core.rules)
            for (const auto& h : r.heads)
                if (h.tag.find("-mid") != std::string::npos) {
                    EXPECT_TRUE(is_generated_relation(h.tag)) << h.tag;
                    ++writers[h.tag];
                }
        for (const auto& [tag, n] : writers) EXPECT_EQ(n, 1) << name << " " << tag;
    }
}

TEST(Desugar, OutputIsByteStable) {
    for (const auto& name : slog::testing::corpus_programs()) {
        std::string text = read_corpus_program(name);
        EXPECT_EQ(to_text(compile_source(text)), to_text(compile_source(text))) << name;
    }
}

TEST(Desugar, PrintedCoreReadsBack) {
    ParseOptions opts;
    opts.allow_reserved = true;
    for (const auto& name : slog::testing::corpus_programs()) {
        CoreProgram once = compile_source(read_corpus_program(name));
        CoreProgram twice = compile_source(to_text(once), opts);
        // Re-reading may split a stage's unrelated heads apart, after which
        // printing is a fixpoint.
        CoreProgram thrice = compile_source(to_text(twice), opts);
        EXPECT_TRUE(AlphaMatcher::same_program(twice.rules, thrice.rules)) << name;
        auto seeds = slog::testing::corpus_seeds(name);
        EXPECT_EQ(listing_of(naive_fixpoint(once, seeds).db), listing_of(naive_fixpoint(twice, seeds).db)) << name;
    }
}

// Renaming variables and reordering rules does not change the core program
// beyond renaming.
TEST(DesugarProperty, AlphaRenamingCommutes) {
    std::mt19937_64 rng(31);
    for (const auto& name : slog::testing::corpus_programs()) {
        SurfaceProgram p = parse_program(read_corpus_program(name));
        for (int round = 0; round < 3; ++round) {
            SurfaceProgram q = p;
            for (auto& r : q.rules) {
                std::map<std::string, std::string> names;
                int next = static_cast<int>(rng() % 100);
                for (auto& h : r.heads) rename_vars(h, names, next);
                for (auto& b : r.bodies) rename_vars(b, names, next);
            }
            std::shuffle(q.rules.begin(), q.rules.end(), rng);
            auto a = compile_to_core(p).rules, b = compile_to_core(q).rules;
            EXPECT_TRUE(AlphaMatcher::same_program(a, b)) << name << "\n" << dump(b);
        }
    }
}
