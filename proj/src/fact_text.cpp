#include "slog/fact_text.hpp"

#include <absl/hash/hash.h>

#include <cctype>
#include <optional>
#include <charconv>

namespace slog {

size_t child_hash(const TreeChild& c) {
    if (const auto* t = std::get_if<TreePtr>(&c)) return (*t)->hash;
    return hash_literal(std::get<Literal>(c)) * 0x9e3779b97f4a7c15ULL + 1;
}

TreePtr FactTree::make(std::string tag, std::vector<TreeChild> children) {
    auto t = std::make_shared<FactTree>();
    uint64_t h = mix64(std::hash<std::string>{}(tag) ^ (children.size() << 48));
    for (const auto& c : children) h = mix64(h ^ child_hash(c));
    t->tag = std::move(tag);
    t->children = std::move(children);
    t->hash = h;
    return t;
}

bool child_equal(const TreeChild& a, const TreeChild& b) {
    if (a.index() != b.index()) return false;
    if (const auto* ta = std::get_if<TreePtr>(&a)) {
        const auto& tb = std::get<TreePtr>(b);
        return *ta == tb || tree_equal(**ta, *tb);
    }
    return std::get<Literal>(a) == std::get<Literal>(b);
}

bool tree_equal(const FactTree& a, const FactTree& b) {
    if (&a == &b) return true;
    if (a.hash != b.hash || a.tag != b.tag || a.children.size() != b.children.size()) return false;
    for (size_t i = 0; i < a.children.size(); ++i)
        if (!child_equal(a.children[i], b.children[i])) return false;
    return true;
}

namespace {

void print_child(const TreeChild& c, std::string& out);

void print_tree(const FactTree& t, std::string& out) {
    if (t.tag == kConsTag && t.arity() == 2) {
        out.push_back('[');
        const FactTree* cur = &t;
        bool first = true;
        while (true) {
            if (!first) out.push_back(' ');
            first = false;
            print_child(cur->children[0], out);
            const TreeChild& rest = cur->children[1];
            const auto* rt = std::get_if<TreePtr>(&rest);
            if (rt && (*rt)->tag == kConsTag && (*rt)->arity() == 2) {
                cur = rt->get();
                continue;
            }
            if (rt && (*rt)->tag == kNilTag && (*rt)->arity() == 0) break;
            out.push_back(' ');
            print_child(rest, out);
            out += " ...";
            break;
        }
        out.push_back(']');
        return;
    }
    if (t.tag == kNilTag && t.arity() == 0) {
        out += "[]";
        return;
    }
    out.push_back('(');
    out += t.tag;
    for (const auto& c : t.children) {
        out.push_back(' ');
        print_child(c, out);
    }
    out.push_back(')');
}

void print_child(const TreeChild& c, std::string& out) {
    if (const auto* t = std::get_if<TreePtr>(&c))
        print_tree(**t, out);
    else
        out += to_text(std::get<Literal>(c));
}

class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }

    TreeChild read_child() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') return read_clause();
        if (c == '[') return read_list();
        if (c == '"') return Literal::string(read_string());
        std::string tok = read_symbol();
        if (tok.empty()) fail(std::string("unexpected character '") + c + "'");
        return atom(tok);
    }

    TreePtr read_clause() {
        expect('(');
        skip_ws();
        std::string tag = read_symbol();
        if (tag.empty()) fail("expected a tag after '('");
        std::vector<TreeChild> kids;
        while (true) {
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated clause");
            if (s_[pos_] == ')') {
                ++pos_;
                break;
            }
            kids.push_back(read_child());
        }
        return FactTree::make(std::move(tag), std::move(kids));
    }

    [[noreturn]] void fail(const std::string& msg) const { throw FactParseError(line_, msg); }

private:
    TreePtr read_list() {
        expect('[');
        std::vector<TreeChild> elems;
        std::optional<TreeChild> rest;
        while (true) {
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated list");
            if (s_[pos_] == ']') {
                ++pos_;
                break;
            }
            if (rest) fail("'...' must mark the final list element");
            size_t save = pos_;
            std::string sym = s_[pos_] == '(' || s_[pos_] == '[' || s_[pos_] == '"' ? "" : read_symbol();
            if (sym == "..." || sym == "…") {
                if (elems.empty()) fail("'...' with no preceding element");
                rest = std::move(elems.back());
                elems.pop_back();
                continue;
            }
            pos_ = save;
            elems.push_back(read_child());
        }
        TreeChild acc = rest ? std::move(*rest) : TreeChild(FactTree::make(std::string(kNilTag), {}));
        for (size_t i = elems.size(); i-- > 0;)
            acc = FactTree::make(std::string(kConsTag), {std::move(elems[i]), std::move(acc)});
        auto* t = std::get_if<TreePtr>(&acc);
        if (!t) fail("a list tail must be a fact");
        return *t;
    }

    TreeChild atom(const std::string& tok) {
        if (tok == "#t") return Literal::boolean(true);
        if (tok == "#f") return Literal::boolean(false);
        int64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec == std::errc() && p == tok.data() + tok.size()) return Literal::integer(v);
        if (ec == std::errc::result_out_of_range) fail("integer literal out of range: " + tok);
        fail("unexpected symbol '" + tok + "' in ground fact");
    }

    void skip_ws() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == ';') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string read_symbol() {
        size_t start = pos_;
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' ||
                c == ']' || c == '{' || c == '}' || c == '"' || c == ';')
                break;
            ++pos_;
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string read_string() {
        expect('"');
        std::string out;
        while (true) {
            if (pos_ >= s_.size()) fail("unterminated string");
            char c = s_[pos_++];
            if (c == '"') break;
            if (c == '\n') ++line_;
            if (c == '\\') {
                if (pos_ >= s_.size()) fail("unterminated string");
                char e = s_[pos_++];
                out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
            } else {
                out.push_back(c);
            }
        }
        return out;
    }

    std::string_view s_;
    size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

std::string to_text(const FactTree& t) {
    std::string out;
    print_tree(t, out);
    return out;
}

std::string to_text(const TreeChild& c) {
    std::string out;
    print_child(c, out);
    return out;
}

std::vector<TreePtr> parse_facts(std::string_view text) {
    Reader r(text);
    std::vector<TreePtr> out;
    while (!r.at_end()) {
        TreeChild c = r.read_child();
        auto* t = std::get_if<TreePtr>(&c);
        if (!t) r.fail("a top-level fact must be a clause or list");
        out.push_back(std::move(*t));
    }
    return out;
}

TreePtr parse_fact(std::string_view text) {
    auto facts = parse_facts(text);
    if (facts.size() != 1) throw FactParseError(1, "expected exactly one fact");
    return facts[0];
}

}  // namespace slog
