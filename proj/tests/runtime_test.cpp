#include <gtest/gtest.h>

#include "slog/engine.hpp"
#include "slog/runtime.hpp"
#include "support.hpp"

using namespace slog;
using namespace slog::testing;

namespace {

const char* kTc = "[(path x y) <-- (edge x y)]\n[(path x z) <-- (edge x y) (path y z)]";

RuntimeConfig config(uint32_t workers, uint32_t buckets = 64) {
    RuntimeConfig cfg;
    cfg.workers = workers;
    cfg.buckets = buckets;
    return cfg;
}

Listing run(const Compiled& c, const std::vector<TreePtr>& edb, const RuntimeConfig& cfg) {
    auto r = run_parallel(c, edb, cfg);
    EXPECT_FALSE(r.storage_error.has_value()) << *r.storage_error;
    EXPECT_FALSE(r.stats.fuel_exhausted);
    return listing_of(*r.db);
}

}  // namespace

TEST(Placement, BucketHashesOnlyTheKeyColumns) {
    // Expected values come from a separate Python rendering of the hash.
    IndexSpec idx{.rel = 0, .order = {2, 1, 0}, .key_len = 1};
    Value a[] = {Value::integer(7), Value::integer(3), Value::fact(InternKey::make(5, 9))};
    Value b[] = {Value::integer(7), Value::integer(4), Value::fact(InternKey::make(1, 1))};
    EXPECT_EQ(bucket_of(idx, a, 4096), 2885u);
    EXPECT_EQ(bucket_of(idx, a, 256), 69u);
    EXPECT_EQ(bucket_of(idx, b, 4096), 2885u);
    EXPECT_EQ(subbucket_of(idx, a, 8), 4u);
    EXPECT_EQ(subbucket_of(idx, a, 64), 44u);
    EXPECT_EQ(subbucket_of(idx, a, 1), 0u);
    IndexSpec scan{.rel = 0, .order = {1, 0}, .key_len = 0};
    EXPECT_EQ(bucket_of(scan, a, 4096), 2152u);
}

TEST(Placement, CanonicalIndexAgreesWithInternBucket) {
    Database db(256);
    IndexSpec canon{.rel = 0, .order = {1, 2, 0}, .key_len = 2, .canonical = true};
    for (int i = 0; i < 200; ++i) {
        Value args[] = {Value::integer(i), Value::integer(i * 7 % 13)};
        InternKey k = db.intern_fact("edge", args).key;
        Value ordered[] = {args[0], args[1], Value::fact(k)};
        EXPECT_EQ(bucket_of(canon, ordered, 256), k.bucket());
    }
}

TEST(Placement, OwnerRotatesWithSubbucket) {
    EXPECT_EQ(owner_of(0, 0, 4), 0u);
    EXPECT_EQ(owner_of(5, 0, 4), 1u);
    EXPECT_EQ(owner_of(5, 3, 4), 0u);
    EXPECT_EQ(owner_of(123, 7, 1), 0u);
}

TEST(Runtime, RingOfOneHundred) {
    Compiled c = compile_program(kTc);
    for (uint32_t w : {1u, 2u, 8u}) {
        auto l = run(c, edge_facts(ring_graph(100)), config(w, 256));
        EXPECT_EQ(l.at("path").size(), 10000u) << w;
    }
}

TEST(Runtime, RejectsZeroWorkers) {
    Compiled c = compile_program(kTc);
    Database db(16);
    EXPECT_THROW(Runtime(c.plan, db, config(0)), std::invalid_argument);
}

TEST(Runtime, FuelBoundsSupersteps) {
    Compiled c = compile_program("(s (z))\n[(s (n x)) <-- (s x)]");
    RuntimeConfig cfg = config(2);
    cfg.fuel = 10;
    auto r = run_parallel(c, {}, cfg);
    EXPECT_TRUE(r.stats.fuel_exhausted);
    EXPECT_LE(r.stats.supersteps, 10u);
    EXPECT_FALSE(r.storage_error.has_value());
    EXPECT_FALSE(r.db->check_subfact_closure().has_value());
}

TEST(Runtime, OverflowIsAnError) {
    Compiled c = compile_program("(a 9223372036854775807)\n[(b y) <-- (a x) (+ x 1 y)]");
    EXPECT_THROW(run_parallel(c, {}, config(2)), BuiltinError);
}

TEST(Runtime, FreeVariables) {
    Compiled c = compile_program(read_corpus_program("free"));
    auto l = run(c, parse_facts(R"((lam "x" (app (ref "x") (ref "y"))))"), config(4));
    EXPECT_EQ(l.at("free"), (std::vector<std::string>{
                                R"((free (app (ref "x") (ref "y")) "x"))",
                                R"((free (app (ref "x") (ref "y")) "y"))",
                                R"((free (lam "x" (app (ref "x") (ref "y"))) "y"))",
                                R"((free (ref "x") "x"))",
                                R"((free (ref "y") "y"))",
                            }));
}

TEST(Runtime, SimplyTypedLambdaCalculus) {
    Compiled c = compile_program(read_corpus_program("stlc"));
    auto l = run(c, corpus_seeds("stlc"), config(4));
    EXPECT_EQ(l.at("success").size(), 2u);
    ASSERT_EQ(l.at("failure").size(), 1u);
    EXPECT_EQ(l.at("failure")[0], R"((failure (mt-env) (λ "x" (nat) (ref "x")) (-> (nat) (bool))))");
    for (const auto& s : l.at("success")) EXPECT_EQ(s.find("(bool)"), std::string::npos);
}

TEST(Runtime, KeyEqualTuplesShareABucket) {
    // Many facts with the same first argument: the (1 | 2 0) index of path
    // places them together, so that bucket grows far past the mean and is
    // split. The chain keeps deltas flowing and spreads the other paths.
    Compiled c = compile_program(kTc);
    std::vector<Edge> star;
    for (int i = 100; i < 300; ++i) star.emplace_back(0, i);
    for (int i = 0; i < 30; ++i) star.emplace_back(i, i + 1);
    Database db(64);
    for (const auto& t : edge_facts(star)) db.ingest(*t);
    RuntimeConfig cfg = config(4);
    cfg.rho = 1.5;
    Runtime rt(c.plan, db, cfg);
    rt.load_database();
    rt.run();
    EXPECT_FALSE(rt.verify_storage().has_value());
    RelId path = c.plan.relation_id("path", 2);
    EXPECT_EQ(rt.stored(path), 200u + 31u * 30u / 2u);
    uint32_t by_src = 0;
    for (uint32_t i : c.plan.relations[path].indices)
        if (c.plan.indices[i].key_len == 1 && c.plan.indices[i].order[0] == 1) by_src = i;
    Value zero[] = {Value::integer(0)};
    uint32_t hot = bucket_of(c.plan.indices[by_src], zero, 64);
    EXPECT_GT(rt.subbuckets(by_src, hot), 1u);
    EXPECT_LE(rt.subbuckets(by_src, hot), cfg.max_subbuckets);
}

// Results do not depend on worker count, bucket count or how finely hot
// buckets are split.
TEST(RuntimeProperty, PlacementDoesNotChangeResults) {
    Compiled c = compile_program(kTc);
    for (uint64_t seed = 0; seed < 6; ++seed) {
        auto edges = random_graph(40, 60 + static_cast<int64_t>(seed) * 10, seed);
        auto want = path_lines(reachability(edges));
        for (uint32_t w : {1u, 2u, 8u})
            for (uint32_t maxsub : {1u, 2u, 4u}) {
                RuntimeConfig cfg = config(w, seed % 2 ? 16 : 1024);
                cfg.max_subbuckets = maxsub;
                cfg.rho = 1.1;
                auto l = run(c, edge_facts(edges), cfg);
                EXPECT_EQ(l.at("path"), want) << seed << " w=" << w << " sub=" << maxsub;
            }
    }
}

TEST(RuntimeProperty, CorpusAgreesWithNaive) {
    for (const auto& name : corpus_programs()) {
        Compiled c = compile_program(read_corpus_program(name));
        auto seeds = corpus_seeds(name);
        auto want = listing_of(naive_fixpoint(c.core, seeds).db);
        for (uint32_t w : {1u, 3u}) EXPECT_EQ(run(c, seeds, config(w)), want) << name << " w=" << w;
    }
}

TEST(RuntimeProperty, StoredFactsAreSubfactClosed) {
    for (const auto& name : corpus_programs()) {
        Compiled c = compile_program(read_corpus_program(name));
        auto r = run_parallel(c, corpus_seeds(name), config(2));
        EXPECT_FALSE(r.db->check_subfact_closure().has_value()) << name;
        EXPECT_FALSE(r.storage_error.has_value()) << name;
    }
}
