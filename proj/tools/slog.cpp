// Command-line driver: run, compile, query, bench.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "slog/builtins.hpp"
#include "slog/engine.hpp"
#include "slog/parser.hpp"
#include "slog/workloads.hpp"

namespace fs = std::filesystem;
using namespace slog;

namespace {

enum Exit { kOk = 0, kFuel = 1, kUsage = 2, kDiagnostics = 3 };

struct Failure {
    int code;
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Failure{kUsage, "cannot read " + path};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

uint32_t default_workers() {
    if (const char* env = std::getenv("SLOG_WORKERS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<uint32_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Compiled compile_file(const std::string& path) {
    std::string text = read_file(path);
    try {
        Compiled c = compile_program(text);
        for (const auto& w : c.warnings) std::cerr << w.format(path) << "\n";
        return c;
    } catch (const CompileError& e) {
        std::string msg;
        for (const auto& d : e.diagnostics()) msg += d.format(path) + "\n";
        if (!msg.empty()) msg.pop_back();
        throw Failure{kDiagnostics, msg};
    }
}

void print_listing(const Listing& l) {
    for (const auto& [tag, lines] : l)
        for (const auto& line : lines) std::cout << line << "\n";
}

struct RunOptions {
    std::string program, facts, out, engine = "parallel";
    uint32_t workers = default_workers();
    uint32_t buckets = 4096;
    size_t fuel = 100000;
    double rho = 4.0;
    bool keep_ids = false, timing = false;
};

void report_timing(const RunStats& st) {
    std::fprintf(stderr, "supersteps %zu, passes %zu, derived %zu\n", st.supersteps, st.passes, st.derived);
    for (const auto& s : st.sccs)
        if (s.runs) std::fprintf(stderr, "  stratum %zu: %zu run(s), %zu superstep(s)\n", s.scc, s.runs, s.supersteps);
    const auto& t = st.times;
    std::fprintf(stderr, "  gather %.3fs  join %.3fs  exchange %.3fs  intern %.3fs  advance %.3fs\n", t.gather, t.join,
                 t.exchange, t.intern, t.advance);
}

int cmd_run(const RunOptions& o) {
    if (o.workers < 1) throw Failure{kUsage, "--workers must be at least 1"};
    if (o.buckets == 0 || (o.buckets & (o.buckets - 1)) || o.buckets > 65536)
        throw Failure{kUsage, "--buckets must be a power of two no larger than 65536"};
    Compiled c = compile_file(o.program);
    std::vector<TreePtr> edb;
    try {
        if (!o.facts.empty()) edb = read_fact_dir(o.facts);
    } catch (const std::exception& e) {
        throw Failure{kUsage, e.what()};
    }
    Listing listing;
    bool exhausted = false;
    auto t0 = std::chrono::steady_clock::now();
    if (o.engine == "naive") {
        auto res = naive_fixpoint(c.core, edb, o.fuel);
        exhausted = res.fuel_exhausted;
        listing = listing_of(res.db);
        if (o.timing) std::fprintf(stderr, "iterations %zu\n", res.iterations);
    } else {
        RuntimeConfig cfg{o.workers, o.buckets, o.rho, 64, o.fuel};
        auto res = run_parallel(c, edb, cfg);
        exhausted = res.stats.fuel_exhausted;
        if (res.storage_error) throw Failure{kUsage, "internal error: " + *res.storage_error};
        listing = o.keep_ids ? keyed_listing_of(*res.db) : listing_of(*res.db);
        if (o.timing) report_timing(res.stats);
    }
    if (o.timing)
        std::fprintf(stderr, "wall %.3fs\n",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (o.out.empty()) {
        print_listing(listing);
    } else {
        try {
            write_listing(listing, o.out);
        } catch (const std::exception& e) {
            throw Failure{kUsage, e.what()};
        }
    }
    if (exhausted) {
        std::cerr << "fuel exhausted after " << o.fuel << (o.engine == "naive" ? " iterations" : " supersteps")
                  << "; output is partial\n";
        return kFuel;
    }
    return kOk;
}

int cmd_compile(const std::string& program, const std::string& stage) {
    IrStage s;
    if (stage == "surface") s = IrStage::Surface;
    else if (stage == "core") s = IrStage::Core;
    else if (stage == "plan") s = IrStage::Plan;
    else throw Failure{kUsage, "unknown IR stage '" + stage + "' (expected surface, core or plan)"};
    if (s == IrStage::Surface) {
        // Surface syntax is printed as parsed, before any checking.
        std::string text = read_file(program);
        try {
            std::cout << to_text(parse_program(text));
        } catch (const CompileError& e) {
            std::string msg;
            for (const auto& d : e.diagnostics()) msg += d.format(program) + "\n";
            if (!msg.empty()) msg.pop_back();
            throw Failure{kDiagnostics, msg};
        }
        return kOk;
    }
    std::cout << emit_ir(compile_file(program), s);
    return kOk;
}

int cmd_query(const std::string& dir, const std::string& pattern) {
    Query q;
    try {
        q = parse_query(pattern);
    } catch (const CompileError& e) {
        std::string msg;
        for (const auto& d : e.diagnostics()) msg += d.format("<query>") + "\n";
        if (!msg.empty()) msg.pop_back();
        throw Failure{kDiagnostics, msg};
    }
    std::vector<TreePtr> facts;
    try {
        facts = read_fact_dir(dir);
    } catch (const std::exception& e) {
        throw Failure{kUsage, e.what()};
    }
    bool known = std::any_of(facts.begin(), facts.end(),
                             [&](const TreePtr& t) { return t->tag == q.tag && t->arity() == q.arity; });
    std::string file = q.tag;
    std::replace(file.begin(), file.end(), '/', '%');
    if (!known && !fs::exists(fs::path(dir) / (file + ".facts")))
        throw Failure{kUsage, "unknown relation " + q.tag + "/" + std::to_string(q.arity)};
    std::vector<std::string> lines;
    for (const auto& m : q.run(facts)) {
        std::string line = to_text(*m.fact);
        for (const auto& [name, v] : m.bindings) line += "\t" + name + "=" + to_text(v);
        lines.push_back(std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    for (const auto& l : lines) std::cout << l << "\n";
    return kOk;
}

int cmd_bench(const std::vector<uint32_t>& worker_counts, int64_t scale) {
    struct Case {
        std::string name, program;
        std::vector<TreePtr> edb;
    };
    std::vector<Case> cases;
    std::string tc = read_corpus_program("tc");
    cases.push_back({"tc-ring" + std::to_string(scale), tc, edge_facts(ring_graph(scale))});
    int64_t n = scale * 2;
    cases.push_back({"tc-random" + std::to_string(n), tc, edge_facts(random_graph(n, n + n / 2, 7))});
    for (const char* cfa : {"kcfa", "mcfa"}) {
        auto seeds = read_fact_file(corpus_dir() + "/" + cfa + ".facts");
        cases.push_back({cfa, read_corpus_program(cfa), seeds});
    }
    std::printf("%-18s %12s %10s", "name", "facts", "steps");
    for (uint32_t w : worker_counts) std::printf(" %9s", ("w=" + std::to_string(w)).c_str());
    std::printf("\n");
    for (const auto& cs : cases) {
        Compiled c = compile_program(cs.program);
        size_t facts = 0, steps = 0;
        std::vector<double> times;
        for (uint32_t w : worker_counts) {
            auto t0 = std::chrono::steady_clock::now();
            auto res = run_parallel(c, cs.edb, RuntimeConfig{w, 4096, 4.0, 64, 100000});
            times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            facts = res.db->fact_count();
            steps = res.stats.supersteps;
        }
        std::printf("%-18s %12zu %10zu", cs.name.c_str(), facts, steps);
        for (double t : times) std::printf(" %8.3fs", t);
        std::printf("\n");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slog: Datalog with first-class nested facts"};
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Compile and evaluate a program");
    run->add_option("program", ro.program, "Program file (.slog)")->required();
    run->add_option("--facts", ro.facts, "Directory of input *.facts files");
    run->add_option("--out", ro.out, "Output directory (default: print to stdout)");
    run->add_option("--engine", ro.engine, "naive or parallel")->check(CLI::IsMember({"naive", "parallel"}));
    run->add_option("--workers", ro.workers, "Worker threads (default $SLOG_WORKERS or core count)");
    run->add_option("--buckets", ro.buckets, "Bucket count, a power of two <= 65536");
    run->add_option("--fuel", ro.fuel, "Superstep (parallel) or iteration (naive) limit");
    run->add_option("--rho", ro.rho, "Subbucket refinement threshold");
    run->add_flag("--keep-ids", ro.keep_ids, "Write raw keyed rows instead of reified facts");
    run->add_flag("--timing", ro.timing, "Report per-stratum and per-phase timings on stderr");

    std::string cprog, stage = "core";
    auto* comp = app.add_subcommand("compile", "Print an intermediate representation");
    comp->add_option("program", cprog, "Program file (.slog)")->required();
    comp->add_option("--emit-ir", stage, "surface, core or plan");

    std::string qdir, qpat;
    auto* query = app.add_subcommand("query", "Match a pattern against a run's output");
    query->add_option("dir", qdir, "Output directory of a previous run")->required();
    query->add_option("pattern", qpat, "Clause pattern, e.g. '(path 1 x)'")->required();

    std::vector<uint32_t> bench_workers{1, 2, 4, 8};
    int64_t scale = 200;
    auto* bench = app.add_subcommand("bench", "Run the TC and CFA suites across worker counts");
    bench->add_option("--workers", bench_workers, "Worker counts")->delimiter(',');
    bench->add_option("--scale", scale, "Ring size for the TC cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    try {
        if (*run) return cmd_run(ro);
        if (*comp) return cmd_compile(cprog, stage);
        if (*query) return cmd_query(qdir, qpat);
        if (*bench) return cmd_bench(bench_workers, scale);
    } catch (const Failure& f) {
        std::cerr << f.message << "\n";
        return f.code;
    } catch (const BuiltinError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kOk;
}
