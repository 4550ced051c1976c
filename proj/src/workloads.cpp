#include "slog/workloads.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "slog/engine.hpp"

namespace slog {

std::vector<Edge> ring_graph(int64_t n) {
    std::vector<Edge> out;
    for (int64_t i = 0; i < n; ++i) out.emplace_back(i, (i + 1) % n);
    return out;
}

std::vector<Edge> random_graph(int64_t n, int64_t m, uint64_t seed) {
    if (n < 2 || m > n * (n - 1)) throw std::invalid_argument("random_graph: too many edges");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int64_t> node(0, n - 1);
    std::set<Edge> seen;
    std::vector<Edge> out;
    while (static_cast<int64_t>(out.size()) < m) {
        Edge e{node(rng), node(rng)};
        if (e.first != e.second && seen.insert(e).second) out.push_back(e);
    }
    return out;
}

std::vector<TreePtr> edge_facts(const std::vector<Edge>& edges, const std::string& tag) {
    std::vector<TreePtr> out;
    out.reserve(edges.size());
    for (auto [a, b] : edges) out.push_back(FactTree::make(tag, {Literal::integer(a), Literal::integer(b)}));
    return out;
}

std::string read_corpus_program(const std::string& name) {
    std::string path = corpus_dir() + "/" + name + ".slog";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace slog
