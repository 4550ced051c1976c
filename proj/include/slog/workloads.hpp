#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slog/fact_text.hpp"

namespace slog {

using Edge = std::pair<int64_t, int64_t>;

// Directed cycle 0 -> 1 -> ... -> n-1 -> 0.
std::vector<Edge> ring_graph(int64_t n);
// G(n, m): `m` distinct directed edges without self loops, seeded.
std::vector<Edge> random_graph(int64_t n, int64_t m, uint64_t seed);

std::vector<TreePtr> edge_facts(const std::vector<Edge>& edges, const std::string& tag = "edge");

// Reads `<corpus>/<name>.slog`.
std::string read_corpus_program(const std::string& name);

}  // namespace slog
