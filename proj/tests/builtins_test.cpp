#include <gtest/gtest.h>

#include <climits>
#include <optional>
#include <random>

#include "slog/builtins.hpp"
#include "slog/engine.hpp"

using namespace slog;

namespace {

// Plain integers stand in for runtime values.
struct IntOps {
    static std::optional<int64_t> as_int(const int64_t& v) { return v; }
    static int64_t make_int(int64_t i) { return i; }
};

bool eval(BuiltinId id, std::vector<int64_t>& vals, uint32_t bound) {
    return eval_builtin<IntOps, int64_t>(id, std::span<int64_t>(vals), bound);
}

BuiltinId id_of(std::string_view name) { return find_builtin(name)->id; }

std::vector<std::string> run(std::string_view program, const std::string& tag) {
    Compiled c = compile_program(program);
    auto naive = listing_of(naive_fixpoint(c.core, {}).db);
    auto par = run_parallel(c, {}, RuntimeConfig{.workers = 2, .buckets = 16});
    EXPECT_EQ(listing_of(*par.db), naive);
    return naive.contains(tag) ? naive.at(tag) : std::vector<std::string>{};
}

}  // namespace

TEST(Builtins, Catalog) {
    for (const char* n : {"+", "=/=", "<", ">", "<=", ">=", "="}) ASSERT_NE(find_builtin(n), nullptr) << n;
    EXPECT_EQ(find_builtin("+")->arity, 3u);
    EXPECT_EQ(find_builtin("<")->arity, 2u);
    EXPECT_EQ(find_builtin("-"), nullptr);
    EXPECT_FALSE(is_builtin("edge"));
}

TEST(Builtins, AddRunsInEveryDirection) {
    std::vector<int64_t> v = {2, 3, 0};
    ASSERT_TRUE(eval(BuiltinId::Add, v, 0b011));
    EXPECT_EQ(v[2], 5);
    v = {2, 0, 5};
    ASSERT_TRUE(eval(BuiltinId::Add, v, 0b101));
    EXPECT_EQ(v[1], 3);
    v = {0, 3, 5};
    ASSERT_TRUE(eval(BuiltinId::Add, v, 0b110));
    EXPECT_EQ(v[0], 2);
    v = {2, 3, 5};
    EXPECT_TRUE(eval(BuiltinId::Add, v, 0b111));
    v = {2, 3, 6};
    EXPECT_FALSE(eval(BuiltinId::Add, v, 0b111));
}

TEST(Builtins, ModeChecks) {
    EXPECT_FALSE(builtin_mode_ok(BuiltinId::Add, 0b001));
    EXPECT_TRUE(builtin_mode_ok(BuiltinId::Add, 0b101));
    EXPECT_FALSE(builtin_mode_ok(BuiltinId::Lt, 0b01));
    EXPECT_TRUE(builtin_mode_ok(BuiltinId::Eq, 0b10));
    EXPECT_FALSE(builtin_mode_ok(BuiltinId::Eq, 0b00));
    EXPECT_FALSE(builtin_mode_ok(BuiltinId::Neq, 0b01));
    std::vector<int64_t> v = {1, 0, 0};
    EXPECT_THROW(eval(BuiltinId::Add, v, 0b001), BuiltinError);
}

TEST(Builtins, OverflowThrows) {
    std::vector<int64_t> v = {INT64_MAX, 1, 0};
    EXPECT_THROW(eval(BuiltinId::Add, v, 0b011), BuiltinError);
    v = {0, -1, INT64_MAX};
    EXPECT_THROW(eval(BuiltinId::Add, v, 0b110), BuiltinError);
    v = {INT64_MIN, -1, 0};
    EXPECT_THROW(eval(BuiltinId::Add, v, 0b011), BuiltinError);
    v = {INT64_MAX, INT64_MIN, -1};
    EXPECT_TRUE(eval(BuiltinId::Add, v, 0b111));
}

TEST(Builtins, Comparisons) {
    struct Case {
        const char* op;
        int64_t a, b;
        bool want;
    } cases[] = {
        {"<", 1, 2, true},   {"<", 2, 2, false},  {">", 3, 2, true},   {">", 2, 3, false},
        {"<=", 2, 2, true},  {"<=", 3, 2, false}, {">=", 2, 2, true},  {">=", 1, 2, false},
        {"=/=", 1, 2, true}, {"=/=", 2, 2, false}, {"=", 4, 4, true},  {"=", 4, 5, false},
        {"<", INT64_MIN, INT64_MAX, true},
    };
    for (const auto& c : cases) {
        std::vector<int64_t> v = {c.a, c.b};
        EXPECT_EQ(eval(id_of(c.op), v, 0b11), c.want) << c.op << " " << c.a << " " << c.b;
    }
}

TEST(Builtins, EqualityBindsTheFreeSide) {
    std::vector<int64_t> v = {0, 9};
    ASSERT_TRUE(eval(BuiltinId::Eq, v, 0b10));
    EXPECT_EQ(v[0], 9);
}

TEST(BuiltinsProperty, AddAgreesWithArithmetic) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 5000; ++i) {
        int64_t a = static_cast<int64_t>(rng() >> 2) - (INT64_MAX >> 2);
        int64_t b = static_cast<int64_t>(rng() >> 2) - (INT64_MAX >> 2);
        std::vector<int64_t> v = {a, b, 0};
        ASSERT_TRUE(eval(BuiltinId::Add, v, 0b011));
        EXPECT_EQ(v[2], a + b);
        std::vector<int64_t> w = {0, b, a + b};
        ASSERT_TRUE(eval(BuiltinId::Add, w, 0b110));
        EXPECT_EQ(w[0], a);
    }
}

TEST(BuiltinsInPrograms, ArithmeticAndFilters) {
    EXPECT_EQ(run("(n 1) (n 2) (n 3)\n[(sum z) <-- (n x) (n y) (< x y) (+ x y z)]", "sum"),
              (std::vector<std::string>{"(sum 3)", "(sum 4)", "(sum 5)"}));
    EXPECT_EQ(run("(n 5)\n[(pred x) <-- (n z) (+ x 1 z)]", "pred"), (std::vector<std::string>{"(pred 4)"}));
    EXPECT_EQ(run("(n 1) (n 2)\n[(diff x y) <-- (n x) (n y) (=/= x y)]", "diff"),
              (std::vector<std::string>{"(diff 1 2)", "(diff 2 1)"}));
}

TEST(BuiltinsInPrograms, NonIntegersNeverCompare) {
    EXPECT_EQ(run("(v \"a\") (v 1)\n[(small x) <-- (v x) (< x 10)]", "small"),
              (std::vector<std::string>{"(small 1)"}));
    EXPECT_EQ(run("(v \"a\") (v \"b\")\n[(ne x y) <-- (v x) (v y) (=/= x y)]", "ne").size(), 2u);
}
