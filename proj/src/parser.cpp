#include "slog/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace slog {
namespace {

enum class Tok {
    LParen, RParen, LBrack, RBrack, LBrace, RBrace,
    HuhParen, HuhBrack, BangParen, BangBrack, NegParen,
    Symbol, String, End,
};

struct Token {
    Tok kind;
    std::string text;
    Span span;
};

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    Token next() {
        skip_ws();
        Span sp{static_cast<uint32_t>(pos_), 0, line_, col()};
        if (pos_ >= s_.size()) return finish(Tok::End, "", sp);
        char c = s_[pos_];
        auto single = [&](Tok k) {
            ++pos_;
            return finish(k, std::string(1, c), sp);
        };
        switch (c) {
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case '[': return single(Tok::LBrack);
            case ']': return single(Tok::RBrack);
            case '{': return single(Tok::LBrace);
            case '}': return single(Tok::RBrace);
            case '"': return finish(Tok::String, read_string(sp), sp);
            default: break;
        }
        if ((c == '?' || c == '!' || c == '~') && pos_ + 1 < s_.size()) {
            char n = s_[pos_ + 1];
            if (n == '(' || (n == '[' && c != '~')) {
                pos_ += 2;
                Tok k = c == '?' ? (n == '(' ? Tok::HuhParen : Tok::HuhBrack)
                        : c == '!' ? (n == '(' ? Tok::BangParen : Tok::BangBrack)
                                   : Tok::NegParen;
                return finish(k, std::string(s_.substr(sp.begin, 2)), sp);
            }
        }
        size_t start = pos_;
        while (pos_ < s_.size() && !delimiter(s_[pos_])) ++pos_;
        return finish(Tok::Symbol, std::string(s_.substr(start, pos_ - start)), sp);
    }

private:
    static bool delimiter(char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' || c == ']' ||
               c == '{' || c == '}' || c == '"' || c == ';';
    }

    uint32_t col() const { return static_cast<uint32_t>(pos_ - line_start_ + 1); }

    Token finish(Tok k, std::string text, Span sp) {
        sp.end = static_cast<uint32_t>(pos_);
        return Token{k, std::move(text), sp};
    }

    void skip_ws() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '\n') {
                ++pos_;
                ++line_;
                line_start_ = pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == ';') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string read_string(Span sp) {
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= s_.size()) compile_error(sp, "unterminated string literal");
            char c = s_[pos_++];
            if (c == '"') break;
            if (c == '\n') {
                ++line_;
                line_start_ = pos_;
            }
            if (c == '\\' && pos_ < s_.size()) {
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
    size_t line_start_ = 0;
    uint32_t line_ = 1;
};

bool is_rest_marker(const Token& t) { return t.kind == Tok::Symbol && (t.text == "..." || t.text == "…"); }
bool is_arrow(const Token& t) { return t.kind == Tok::Symbol && (t.text == "<--" || t.text == "-->"); }

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& opts) : lex_(text), opts_(opts) { advance(); }

    SurfaceProgram program() {
        SurfaceProgram prog;
        while (cur_.kind != Tok::End) {
            Span sp = cur_.span;
            if (cur_.kind == Tok::LBrack) {
                advance();
                Item it = bracket(sp, ItemKind::List);
                if (it.kind == ItemKind::Rule) {
                    prog.rules.push_back(std::move(*it.rule));
                    continue;
                }
                prog.rules.push_back(bare(std::move(it)));
            } else if (cur_.kind == Tok::LParen) {
                prog.rules.push_back(bare(item()));
            } else {
                compile_error(sp, "expected a rule or a fact at top level, found '" + cur_.text + "'");
            }
        }
        return prog;
    }

private:
    static SurfaceRule bare(Item it) {
        SurfaceRule r;
        r.bare = true;
        r.span = it.span;
        r.heads.push_back(std::move(it));
        return r;
    }

    void advance() { cur_ = lex_.next(); }

    Item item() {
        Token t = cur_;
        advance();
        switch (t.kind) {
            case Tok::LParen: return paren(t.span);
            case Tok::HuhParen: return clause(t.span, ItemKind::Huh, Tok::RParen);
            case Tok::BangParen: return clause(t.span, ItemKind::Bang, Tok::RParen);
            case Tok::NegParen: return clause(t.span, ItemKind::Neg, Tok::RParen);
            case Tok::LBrace: return clause(t.span, ItemKind::Curly, Tok::RBrace);
            case Tok::LBrack: return bracket(t.span, ItemKind::List);
            case Tok::HuhBrack: return bracket(t.span, ItemKind::HuhList);
            case Tok::BangBrack: return bracket(t.span, ItemKind::BangList);
            case Tok::String: {
                Item it;
                it.kind = ItemKind::Lit;
                it.lit = Literal::string(t.text);
                it.span = t.span;
                return it;
            }
            case Tok::Symbol: return atom(t);
            case Tok::End: compile_error(t.span, "unexpected end of input");
            default: compile_error(t.span, "unexpected '" + t.text + "'");
        }
    }

    Item atom(const Token& t) {
        Item it;
        it.span = t.span;
        if (t.text == "_") {
            it.kind = ItemKind::Wildcard;
            return it;
        }
        if (t.text == "#t" || t.text == "#f") {
            it.kind = ItemKind::Lit;
            it.lit = Literal::boolean(t.text == "#t");
            return it;
        }
        if (t.text == "--") {
            it.kind = ItemKind::HintSep;
            return it;
        }
        if (is_rest_marker(t) || is_arrow(t)) compile_error(t.span, "unexpected '" + t.text + "'");
        int64_t v = 0;
        const char* b = t.text.data();
        const char* e = b + t.text.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec == std::errc::result_out_of_range) compile_error(t.span, "integer literal out of range");
        if (ec == std::errc() && p == e) {
            it.kind = ItemKind::Lit;
            it.lit = Literal::integer(v);
            return it;
        }
        if (t.text[0] == '$' && !opts_.allow_reserved)
            compile_error(t.span, "names starting with '$' are reserved");
        it.kind = ItemKind::Var;
        it.name = t.text;
        return it;
    }

    std::string tag(Span open) {
        if (cur_.kind != Tok::Symbol || is_arrow(cur_) || is_rest_marker(cur_) || cur_.text == "_" ||
            cur_.text == "--")
            compile_error(cur_.kind == Tok::End ? open : cur_.span, "expected a relation tag");
        int64_t dummy;
        auto [p, ec] = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), dummy);
        if (ec == std::errc() && p == cur_.text.data() + cur_.text.size())
            compile_error(cur_.span, "a relation tag cannot be a number");
        if (cur_.text[0] == '$' && !opts_.allow_reserved)
            compile_error(cur_.span, "tags starting with '$' are reserved");
        std::string s = cur_.text;
        advance();
        return s;
    }

    void items_until(Tok close, Span open, std::vector<Item>& out) {
        while (cur_.kind != close) {
            if (cur_.kind == Tok::End) compile_error(open, "unclosed form");
            out.push_back(item());
        }
        advance();
    }

    Item clause(Span open, ItemKind kind, Tok close) {
        Item it;
        it.kind = kind;
        it.name = tag(open);
        items_until(close, open, it.items);
        it.span = open;
        return it;
    }

    Item paren(Span open) {
        if (cur_.kind == Tok::Symbol && (cur_.text == "or" || cur_.text == "and")) {
            Item it;
            it.kind = cur_.text == "or" ? ItemKind::Or : ItemKind::And;
            advance();
            items_until(Tok::RParen, open, it.items);
            it.span = open;
            return it;
        }
        Item it = clause(open, ItemKind::Clause, Tok::RParen);
        if (it.name == "=" && it.items.size() == 2 &&
            (it.items[0].kind == ItemKind::Var || it.items[0].kind == ItemKind::Wildcard) &&
            (it.items[1].kind == ItemKind::Clause || it.items[1].kind == ItemKind::List)) {
            Item u;
            u.kind = ItemKind::Unif;
            u.name = it.items[0].kind == ItemKind::Var ? it.items[0].name : "_";
            u.items.push_back(std::move(it.items[1]));
            u.span = open;
            return u;
        }
        return it;
    }

    // After '[': either a nested rule (contains an arrow) or a list.
    Item bracket(Span open, ItemKind list_kind) {
        std::vector<Item> left, right;
        std::optional<Token> arrow;
        while (cur_.kind != Tok::RBrack) {
            if (cur_.kind == Tok::End) compile_error(open, "unclosed '['");
            if (is_arrow(cur_)) {
                if (arrow) compile_error(cur_.span, "a rule may contain only one arrow");
                if (list_kind != ItemKind::List) compile_error(cur_.span, "'?[' and '![' cannot hold rules");
                arrow = cur_;
                advance();
                continue;
            }
            if (is_rest_marker(cur_)) {
                auto& side = arrow ? right : left;
                if (arrow || side.empty() || side.back().splice)
                    compile_error(cur_.span, "'...' must follow a list element");
                side.back().splice = true;
                advance();
                continue;
            }
            (arrow ? right : left).push_back(item());
        }
        advance();
        Item it;
        it.span = open;
        if (!arrow) {
            it.kind = list_kind;
            it.items = std::move(left);
            return it;
        }
        auto rule = std::make_shared<SurfaceRule>();
        rule->span = open;
        rule->forward = arrow->text == "-->";
        rule->heads = std::move(rule->forward ? right : left);
        rule->bodies = std::move(rule->forward ? left : right);
        if (rule->heads.empty()) compile_error(open, "rule has no head");
        it.kind = ItemKind::Rule;
        it.rule = std::move(rule);
        return it;
    }

    Lexer lex_;
    ParseOptions opts_;
    Token cur_;
};

// Placement checks: `?` forms belong in head positions, `!` forms in body
// positions; negation, disjunction and hints only at the top of a body.
class ContextChecker {
public:
    std::vector<Diagnostic> diags;

    void rule(const SurfaceRule& r) {
        for (const auto& h : r.heads) head_top(h);
        for (const auto& b : r.bodies) body_top(b);
    }

private:
    void error(Span sp, std::string msg) { diags.push_back({Severity::Error, sp, std::move(msg)}); }

    void head_top(const Item& it) {
        switch (it.kind) {
            case ItemKind::Rule: rule(*it.rule); return;
            case ItemKind::Clause:
            case ItemKind::Unif:
            case ItemKind::List: nested(it, true); return;
            case ItemKind::Bang:
            case ItemKind::BangList: error(it.span, "'!' clause in head position"); return;
            case ItemKind::HintSep: error(it.span, "'--' is only meaningful in a rule body"); return;
            default: error(it.span, "expected a clause in head position, found '" + to_text(it) + "'");
        }
    }

    void body_top(const Item& it) {
        switch (it.kind) {
            case ItemKind::Rule: rule(*it.rule); return;
            case ItemKind::HintSep: return;
            case ItemKind::Or:
            case ItemKind::And:
                for (const auto& c : it.items) {
                    if (c.kind == ItemKind::HintSep || c.kind == ItemKind::Rule)
                        error(c.span, "hints and nested rules are not allowed inside or/and");
                    else
                        body_top(c);
                }
                return;
            case ItemKind::Neg:
                for (const auto& c : it.items) nested(c, false);
                return;
            case ItemKind::Clause:
            case ItemKind::Unif:
            case ItemKind::List:
            case ItemKind::Curly:
            case ItemKind::Bang:
            case ItemKind::BangList: nested(it, false); return;
            case ItemKind::Huh:
            case ItemKind::HuhList: error(it.span, "'?' clause in body position"); return;
            default: error(it.span, "expected a clause in body position, found '" + to_text(it) + "'");
        }
    }

    // Checks an item (and its children) in head or body context.
    void nested(const Item& it, bool head) {
        switch (it.kind) {
            case ItemKind::Var:
            case ItemKind::Wildcard:
            case ItemKind::Lit: return;
            case ItemKind::Huh:
            case ItemKind::HuhList:
                if (!head) error(it.span, "'?' clause in body position");
                children(it, false);
                return;
            case ItemKind::Bang:
            case ItemKind::BangList:
                if (head) error(it.span, "'!' clause in head position");
                children(it, true);
                return;
            case ItemKind::Curly: children(it, false); return;
            case ItemKind::Clause:
            case ItemKind::Unif:
            case ItemKind::List: children(it, head); return;
            case ItemKind::Neg: error(it.span, "negation is only allowed at the top of a rule body"); return;
            case ItemKind::Or:
            case ItemKind::And: error(it.span, "or/and are only allowed at the top of a rule body"); return;
            case ItemKind::HintSep: error(it.span, "unexpected '--'"); return;
            case ItemKind::Rule: error(it.span, "a rule cannot appear as a clause argument"); return;
        }
    }

    void children(const Item& it, bool head) {
        for (const auto& c : it.items) nested(c, head);
    }
};

}  // namespace

SurfaceProgram parse_program(std::string_view text, const ParseOptions& opts) {
    SurfaceProgram prog = Parser(text, opts).program();
    ContextChecker check;
    for (const auto& r : prog.rules) check.rule(r);
    if (!check.diags.empty()) throw CompileError(std::move(check.diags));
    return prog;
}

}  // namespace slog
