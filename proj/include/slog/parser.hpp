#pragma once

#include <string_view>

#include "slog/surface.hpp"

namespace slog {

struct ParseOptions {
    // Accept `$`-prefixed tags and variables, which are reserved for
    // compiler-generated relations. Needed to re-read printed core IR.
    bool allow_reserved = false;
};

// Parses surface syntax and checks that `?` and `!` forms, negation,
// disjunction and hints appear only where they are meaningful.
// Throws CompileError with spans on failure.
SurfaceProgram parse_program(std::string_view text, const ParseOptions& opts = {});

}  // namespace slog
