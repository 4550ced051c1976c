#include "slog/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slog/desugar.hpp"
#include "slog/parser.hpp"

namespace slog {

Compiled compile_program(std::string_view text) {
    Compiled c;
    c.surface = parse_program(text);
    c.core = compile_to_core(c.surface);
    c.plan = plan_program(c.core);
    c.warnings = c.core.warnings;
    c.warnings.insert(c.warnings.end(), c.plan.warnings.begin(), c.plan.warnings.end());
    return c;
}

std::string emit_ir(const Compiled& c, IrStage stage) {
    switch (stage) {
        case IrStage::Surface: return to_text(c.surface);
        case IrStage::Core: return to_text(c.core);
        case IrStage::Plan: return c.plan.dump();
    }
    return {};
}

namespace {

bool user_tag(std::string_view tag) { return !tag.empty() && tag[0] != '$'; }

void sort_listing(Listing& l) {
    for (auto& [tag, lines] : l) {
        std::sort(lines.begin(), lines.end());
        lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    }
}

}  // namespace

Listing listing_of(const Database& db) {
    Listing out;
    Reifier reify(db);
    db.for_each_fact([&](InternKey key, const FactIdentity& f) {
        const auto& tag = db.relation(f.rel).tag;
        if (user_tag(tag)) out[tag].push_back(to_text(*reify(key)));
    });
    sort_listing(out);
    return out;
}

Listing listing_of(const FactSet& facts) {
    Listing out;
    for (const auto& t : facts.all())
        if (user_tag(t->tag)) out[t->tag].push_back(to_text(*t));
    sort_listing(out);
    return out;
}

Listing keyed_listing_of(const Database& db) {
    Listing out;
    db.for_each_fact([&](InternKey key, const FactIdentity& f) {
        const auto& tag = db.relation(f.rel).tag;
        if (!user_tag(tag)) return;
        std::string line = std::to_string(key.raw) + " " + tag;
        for (Value v : f.args)
            line += " " + (v.is_fact() ? "@" + std::to_string(v.bits()) : to_text(db.value_literal(v)));
        out[tag].push_back(std::move(line));
    });
    sort_listing(out);
    return out;
}

ParallelResult run_parallel(const Compiled& c, const std::vector<TreePtr>& edb, const RuntimeConfig& cfg) {
    ParallelResult res;
    res.db = std::make_unique<Database>(cfg.buckets);
    for (const auto& t : edb) res.db->ingest(*t);
    Runtime rt(c.plan, *res.db, cfg);
    rt.load_database();
    res.stats = rt.run();
    res.storage_error = rt.verify_storage();
    return res;
}

std::vector<TreePtr> read_fact_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_facts(ss.str());
    } catch (const FactParseError& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

std::vector<TreePtr> read_fact_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error("facts directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".facts") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<TreePtr> out;
    for (const auto& f : files) {
        auto facts = read_fact_file(f);
        out.insert(out.end(), facts.begin(), facts.end());
    }
    return out;
}

void write_listing(const Listing& listing, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [tag, lines] : listing) {
        std::string name = tag;
        std::replace(name.begin(), name.end(), '/', '%');
        std::ofstream out(dir / (name + ".facts"));
        if (!out) throw std::runtime_error("cannot write " + (dir / (name + ".facts")).string());
        for (const auto& l : lines) out << l << '\n';
    }
}

// ---------------------------------------------------------------------------
// queries

namespace {

using Bindings = std::vector<std::pair<std::string, TreeChild>>;

bool match_item(const Item& p, const TreeChild& v, Bindings& b);

bool match_list(const std::vector<Item>& elems, size_t i, const TreeChild& v, Bindings& b) {
    if (i == elems.size()) {
        const auto* t = std::get_if<TreePtr>(&v);
        return t && (*t)->tag == kNilTag && (*t)->arity() == 0;
    }
    if (elems[i].splice && i + 1 == elems.size()) return match_item(elems[i], v, b);
    const auto* t = std::get_if<TreePtr>(&v);
    if (!t || (*t)->tag != kConsTag || (*t)->arity() != 2) return false;
    return match_item(elems[i], (*t)->children[0], b) && match_list(elems, i + 1, (*t)->children[1], b);
}

bool match_item(const Item& p, const TreeChild& v, Bindings& b) {
    switch (p.kind) {
        case ItemKind::Wildcard: return true;
        case ItemKind::Var: {
            for (const auto& [name, val] : b)
                if (name == p.name) return child_equal(val, v);
            b.emplace_back(p.name, v);
            return true;
        }
        case ItemKind::Lit: return child_equal(TreeChild{p.lit}, v);
        case ItemKind::Clause:
        case ItemKind::Huh: {
            const auto* t = std::get_if<TreePtr>(&v);
            if (!t || (*t)->tag != p.name || (*t)->arity() != p.items.size()) return false;
            for (size_t k = 0; k < p.items.size(); ++k)
                if (!match_item(p.items[k], (*t)->children[k], b)) return false;
            return true;
        }
        case ItemKind::List:
        case ItemKind::HuhList: return match_list(p.items, 0, v, b);
        default: return false;
    }
}

void check_pattern(const Item& p) {
    switch (p.kind) {
        case ItemKind::Wildcard:
        case ItemKind::Var:
        case ItemKind::Lit: return;
        case ItemKind::Clause:
        case ItemKind::Huh:
        case ItemKind::List:
        case ItemKind::HuhList:
            for (const auto& i : p.items) check_pattern(i);
            return;
        default: compile_error(p.span, "query patterns may only contain clauses, lists, variables and literals");
    }
}

}  // namespace

Query parse_query(std::string_view text) {
    SurfaceProgram prog = parse_program(text);
    if (prog.rules.size() != 1 || !prog.rules[0].bare || prog.rules[0].heads.size() != 1 ||
        prog.rules[0].heads[0].kind != ItemKind::Clause)
        compile_error(prog.rules.empty() ? Span{} : prog.rules[0].span, "a query is a single clause pattern");
    const Item& p = prog.rules[0].heads[0];
    check_pattern(p);
    Query q;
    q.tag = p.name;
    q.arity = static_cast<uint32_t>(p.items.size());
    q.pattern = std::make_shared<const Item>(p);
    return q;
}

std::vector<QueryMatch> Query::run(const std::vector<TreePtr>& facts) const {
    std::vector<QueryMatch> out;
    for (const auto& f : facts) {
        Bindings b;
        if (match_item(*pattern, TreeChild{f}, b)) out.push_back({f, std::move(b)});
    }
    return out;
}

std::string corpus_dir() {
    if (const char* env = std::getenv("SLOG_CORPUS")) return env;
    return SLOG_CORPUS_DIR;
}

}  // namespace slog
