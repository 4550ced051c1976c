#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slog/core_ir.hpp"
#include "slog/database.hpp"
#include "slog/oracle.hpp"
#include "slog/planner.hpp"
#include "slog/runtime.hpp"
#include "slog/surface.hpp"

namespace slog {

// Everything the compiler produces for one program.
struct Compiled {
    SurfaceProgram surface;
    CoreProgram core;
    Plan plan;
    std::vector<Diagnostic> warnings;
};

// Throws CompileError.
Compiled compile_program(std::string_view text);

enum class IrStage { Surface, Core, Plan };
std::string emit_ir(const Compiled& c, IrStage stage);

// Sorted text of every fact in a user relation (tags without a `$`),
// grouped by tag.
using Listing = std::map<std::string, std::vector<std::string>>;

Listing listing_of(const Database& db);
Listing listing_of(const FactSet& facts);
// Raw rows `<key> <tag> <arg>...` with fact arguments written `@<key>`.
Listing keyed_listing_of(const Database& db);

struct ParallelResult {
    std::unique_ptr<Database> db;
    RunStats stats;
    std::optional<std::string> storage_error;
};

ParallelResult run_parallel(const Compiled& c, const std::vector<TreePtr>& edb, const RuntimeConfig& cfg);

// Reads every `*.facts` file of a directory, in file-name order.
// Throws std::runtime_error (or FactParseError) on failure.
std::vector<TreePtr> read_fact_dir(const std::filesystem::path& dir);
std::vector<TreePtr> read_fact_file(const std::filesystem::path& file);

// Writes `<tag>.facts` per listed tag, one fact per line.
void write_listing(const Listing& listing, const std::filesystem::path& dir);

// Matches a pattern such as `(interp ?(do-interp _) v)` against facts.
// Each match is reported with its variable bindings in order of first
// appearance. Throws CompileError for malformed patterns.
struct QueryMatch {
    TreePtr fact;
    std::vector<std::pair<std::string, TreeChild>> bindings;
};
struct Query {
    std::string tag;
    uint32_t arity = 0;
    std::vector<QueryMatch> run(const std::vector<TreePtr>& facts) const;

    std::shared_ptr<const Item> pattern;
};
Query parse_query(std::string_view text);

std::string corpus_dir();

}  // namespace slog
