#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slog {

struct Span {
    uint32_t begin = 0;
    uint32_t end = 0;
    uint32_t line = 0;
    uint32_t col = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    Span span;
    std::string message;

    std::string format(const std::string& file = "") const;
};

// Thrown when compilation cannot continue; carries every error collected so far.
class CompileError : public std::runtime_error {
public:
    explicit CompileError(std::vector<Diagnostic> diags);
    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

[[noreturn]] inline void compile_error(Span span, std::string message) {
    throw CompileError({Diagnostic{Severity::Error, span, std::move(message)}});
}

}  // namespace slog
