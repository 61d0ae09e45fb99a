#include "treesat/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "treesat/errors.hpp"

namespace treesat {

Program converse(Program p) {
    switch (p) {
    case Program::child1: return Program::parent1;
    case Program::child2: return Program::parent2;
    case Program::parent1: return Program::child1;
    case Program::parent2: return Program::child2;
    }
    return p;
}

bool is_downward(Program p) { return p == Program::child1 || p == Program::child2; }

std::string to_string(Program p) {
    switch (p) {
    case Program::child1: return "1";
    case Program::child2: return "2";
    case Program::parent1: return "-1";
    case Program::parent2: return "-2";
    }
    return "?";
}

namespace fm {

namespace {
FormulaPtr make(FormulaKind k) { return std::make_shared<const Formula>(k); }

FormulaPtr make_named(FormulaKind k, const std::string& n) {
    auto f = std::make_shared<Formula>(k);
    f->name = n;
    return f;
}

FormulaPtr make_op(FormulaKind k, std::vector<FormulaPtr> kids) {
    auto f = std::make_shared<Formula>(k);
    f->kids = std::move(kids);
    return f;
}
}  // namespace

FormulaPtr top() {
    static const FormulaPtr t = make(FormulaKind::True);
    return t;
}
FormulaPtr bottom() {
    static const FormulaPtr f = make(FormulaKind::False);
    return f;
}
FormulaPtr name(const std::string& n) { return make_named(FormulaKind::Name, n); }
FormulaPtr prop(const std::string& n) { return make_named(FormulaKind::Prop, n); }
FormulaPtr start() {
    static const FormulaPtr s = make(FormulaKind::Start);
    return s;
}
FormulaPtr lor(FormulaPtr a, FormulaPtr b) { return make_op(FormulaKind::Or, {std::move(a), std::move(b)}); }
FormulaPtr land(FormulaPtr a, FormulaPtr b) { return make_op(FormulaKind::And, {std::move(a), std::move(b)}); }
FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
    return make_op(FormulaKind::Implies, {std::move(a), std::move(b)});
}
FormulaPtr equiv(FormulaPtr a, FormulaPtr b) { return make_op(FormulaKind::Equiv, {std::move(a), std::move(b)}); }
FormulaPtr lnot(FormulaPtr a) { return make_op(FormulaKind::Not, {std::move(a)}); }
FormulaPtr modal(Program p, FormulaPtr a) {
    auto f = std::make_shared<Formula>(FormulaKind::Modality);
    f->program = p;
    f->kids = {std::move(a)};
    return f;
}
FormulaPtr attr(const std::string& n) { return make_named(FormulaKind::Attribute, n); }
FormulaPtr var(const std::string& n) { return make_named(FormulaKind::Variable, n); }
FormulaPtr let(std::vector<Binding> bindings, FormulaPtr body) {
    auto f = std::make_shared<Formula>(FormulaKind::Let);
    f->bindings = std::move(bindings);
    f->kids = {std::move(body)};
    return f;
}
FormulaPtr call(const std::string& n, std::vector<FormulaPtr> args) {
    auto f = std::make_shared<Formula>(FormulaKind::Call);
    f->name = n;
    f->kids = std::move(args);
    return f;
}
FormulaPtr str(const std::string& s) { return make_named(FormulaKind::String, s); }

FormulaPtr conj(const std::vector<FormulaPtr>& parts) {
    FormulaPtr acc;
    for (const auto& p : parts) {
        if (p->kind == FormulaKind::True) continue;
        if (p->kind == FormulaKind::False) return bottom();
        acc = acc ? land(acc, p) : p;
    }
    return acc ? acc : top();
}

FormulaPtr disj(const std::vector<FormulaPtr>& parts) {
    FormulaPtr acc;
    for (const auto& p : parts) {
        if (p->kind == FormulaKind::False) continue;
        if (p->kind == FormulaKind::True) return top();
        acc = acc ? lor(acc, p) : p;
    }
    return acc ? acc : bottom();
}

}  // namespace fm

// ---------------------------------------------------------------- printing

namespace {

int level(const FormulaPtr& f) {
    switch (f->kind) {
    case FormulaKind::Let: return 0;
    case FormulaKind::Equiv: return 1;
    case FormulaKind::Implies: return 2;
    case FormulaKind::Or: return 3;
    case FormulaKind::And: return 4;
    case FormulaKind::Not:
    case FormulaKind::Modality: return 5;
    default: return 6;
    }
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

void print(const FormulaPtr& f, int min_level, std::string& out);

void print_operand(const FormulaPtr& f, int min_level, std::string& out) {
    if (level(f) < min_level) {
        out += '(';
        print(f, 0, out);
        out += ')';
    } else {
        print(f, min_level, out);
    }
}

void print(const FormulaPtr& f, int, std::string& out) {
    switch (f->kind) {
    case FormulaKind::True: out += 'T'; break;
    case FormulaKind::False: out += 'F'; break;
    case FormulaKind::Name:
    case FormulaKind::Prop: out += f->name; break;
    case FormulaKind::Start: out += '#'; break;
    case FormulaKind::Variable: out += '$' + f->name; break;
    case FormulaKind::Attribute: out += '<' + f->name + ">T"; break;
    case FormulaKind::String: out += quote(f->name); break;
    case FormulaKind::Or:
    case FormulaKind::And: {
        int l = level(f);
        const char* op = f->kind == FormulaKind::Or ? " | " : " & ";
        print_operand(f->kids[0], l, out);
        out += op;
        print_operand(f->kids[1], l + 1, out);
        break;
    }
    case FormulaKind::Implies:
        print_operand(f->kids[0], 3, out);
        out += " => ";
        print_operand(f->kids[1], 2, out);
        break;
    case FormulaKind::Equiv:
        print_operand(f->kids[0], 2, out);
        out += " <=> ";
        print_operand(f->kids[1], 2, out);
        break;
    case FormulaKind::Not:
        out += '~';
        print_operand(f->kids[0], 5, out);
        break;
    case FormulaKind::Modality:
        out += '<' + to_string(f->program) + '>';
        print_operand(f->kids[0], 5, out);
        break;
    case FormulaKind::Let: {
        out += "let ";
        for (std::size_t i = 0; i < f->bindings.size(); ++i) {
            if (i) out += ", ";
            out += '$' + f->bindings[i].var + " = ";
            print(f->bindings[i].body, 0, out);
        }
        out += " in ";
        print(f->kids[0], 0, out);
        break;
    }
    case FormulaKind::Call: {
        out += f->name + '(';
        for (std::size_t i = 0; i < f->kids.size(); ++i) {
            if (i) out += ", ";
            print(f->kids[i], 0, out);
        }
        out += ')';
        break;
    }
    }
}

}  // namespace

std::string to_string(const FormulaPtr& f) {
    std::string out;
    print(f, 0, out);
    return out;
}

// ----------------------------------------------------------------- parsing

namespace {

enum class Tok {
    Ident, Var, String, Hash, LParen, RParen, Comma, Eq, Bar, Amp, Implies, Equiv,
    Tilde, ModProg, ModAttr, KwT, KwF, KwLet, KwIn, End
};

struct Token {
    Tok kind;
    std::string text;
    Program program = Program::child1;
    int line = 1;
    int column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '-';
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : s_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            Token t;
            t.line = line_;
            t.column = col_;
            if (i_ >= s_.size()) {
                t.kind = Tok::End;
                out.push_back(t);
                return out;
            }
            char c = s_[i_];
            if (c == '<') {
                lex_angle(t);
            } else if (c == '=' && peek(1) == '>') {
                advance(2);
                t.kind = Tok::Implies;
            } else if (c == '$') {
                advance(1);
                if (i_ >= s_.size() || !ident_start(s_[i_])) fail("variable name expected");
                t.kind = Tok::Var;
                t.text = read_ident();
            } else if (c == '"') {
                t.kind = Tok::String;
                t.text = read_string();
            } else if (ident_start(c)) {
                t.text = read_ident();
                if (t.text == "T") t.kind = Tok::KwT;
                else if (t.text == "F") t.kind = Tok::KwF;
                else if (t.text == "let") t.kind = Tok::KwLet;
                else if (t.text == "in") t.kind = Tok::KwIn;
                else t.kind = Tok::Ident;
            } else {
                advance(1);
                switch (c) {
                case '#': t.kind = Tok::Hash; break;
                case '(': t.kind = Tok::LParen; break;
                case ')': t.kind = Tok::RParen; break;
                case ',': t.kind = Tok::Comma; break;
                case '=': t.kind = Tok::Eq; break;
                case '|': t.kind = Tok::Bar; break;
                case '&': t.kind = Tok::Amp; break;
                case '~': t.kind = Tok::Tilde; break;
                default: fail(std::string("unexpected character '") + c + "'");
                }
            }
            out.push_back(t);
        }
    }

private:
    char peek(std::size_t k) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }

    void advance(std::size_t n) {
        for (std::size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
            if (s_[i_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    void skip_blank() {
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance(1);
            } else if (c == '/' && peek(1) == '/') {
                while (i_ < s_.size() && s_[i_] != '\n') advance(1);
            } else {
                break;
            }
        }
    }

    std::string read_ident() {
        std::size_t b = i_;
        while (i_ < s_.size() && ident_char(s_[i_])) {
            advance(1);
        }
        return s_.substr(b, i_ - b);
    }

    std::string read_string() {
        advance(1);
        std::string out;
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) advance(1);
            out += s_[i_];
            advance(1);
        }
        if (i_ >= s_.size()) fail("unterminated string");
        advance(1);
        return out;
    }

    void lex_angle(Token& t) {
        if (peek(1) == '=' && peek(2) == '>') {
            advance(3);
            t.kind = Tok::Equiv;
            return;
        }
        std::size_t j = i_ + 1;
        std::string inner;
        while (j < s_.size() && s_[j] != '>' && !std::isspace(static_cast<unsigned char>(s_[j]))) inner += s_[j++];
        if (j >= s_.size() || s_[j] != '>') fail("malformed modality");
        if (inner == "1" || inner == "2" || inner == "-1" || inner == "-2") {
            t.kind = Tok::ModProg;
            t.program = inner == "1"    ? Program::child1
                        : inner == "2"  ? Program::child2
                        : inner == "-1" ? Program::parent1
                                        : Program::parent2;
        } else if (!inner.empty() && ident_start(inner[0])) {
            for (char c : inner)
                if (!ident_char(c)) fail("malformed attribute modality");
            t.kind = Tok::ModAttr;
            t.text = inner;
        } else {
            fail("unknown program '" + inner + "'");
        }
        advance(j + 1 - i_);
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, bool allow_calls) : t_(std::move(toks)), calls_(allow_calls) {}

    FormulaPtr parse_all() {
        FormulaPtr f = expr();
        if (cur().kind != Tok::End) fail("unexpected token '" + describe(cur()) + "'");
        return f;
    }

    FormulaPtr expr() { return equiv(); }

private:
    const Token& cur() const { return t_[p_]; }
    const Token& ahead(std::size_t k) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
    bool accept(Tok k) {
        if (cur().kind != k) return false;
        ++p_;
        return true;
    }
    void expect(Tok k, const char* what) {
        if (!accept(k)) fail(std::string("expected ") + what + ", found '" + describe(cur()) + "'");
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur().line, cur().column); }

    static std::string describe(const Token& t) {
        switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::Var: return "$" + t.text;
        case Tok::String: return "\"" + t.text + "\"";
        case Tok::Ident: return t.text;
        case Tok::KwT: return "T";
        case Tok::KwF: return "F";
        case Tok::KwLet: return "let";
        case Tok::KwIn: return "in";
        case Tok::Hash: return "#";
        case Tok::LParen: return "(";
        case Tok::RParen: return ")";
        case Tok::Comma: return ",";
        case Tok::Eq: return "=";
        case Tok::Bar: return "|";
        case Tok::Amp: return "&";
        case Tok::Implies: return "=>";
        case Tok::Equiv: return "<=>";
        case Tok::Tilde: return "~";
        case Tok::ModProg: return "<" + to_string(t.program) + ">";
        case Tok::ModAttr: return "<" + t.text + ">";
        }
        return "?";
    }

    FormulaPtr equiv() {
        FormulaPtr l = implies();
        while (accept(Tok::Equiv)) l = fm::equiv(l, implies());
        return l;
    }

    FormulaPtr implies() {
        FormulaPtr l = disj();
        if (accept(Tok::Implies)) return fm::implies(l, implies());
        return l;
    }

    FormulaPtr disj() {
        FormulaPtr l = conj();
        while (accept(Tok::Bar)) l = fm::lor(l, conj());
        return l;
    }

    FormulaPtr conj() {
        FormulaPtr l = unary();
        while (accept(Tok::Amp)) l = fm::land(l, unary());
        return l;
    }

    FormulaPtr unary() {
        if (accept(Tok::Tilde)) return fm::lnot(unary());
        if (cur().kind == Tok::ModProg) {
            Program p = cur().program;
            ++p_;
            return fm::modal(p, unary());
        }
        if (cur().kind == Tok::ModAttr) {
            std::string n = cur().text;
            ++p_;
            expect(Tok::KwT, "'T' after attribute modality");
            return fm::attr(n);
        }
        return primary();
    }

    FormulaPtr primary() {
        const Token t = cur();
        switch (t.kind) {
        case Tok::KwT: ++p_; return fm::top();
        case Tok::KwF: ++p_; return fm::bottom();
        case Tok::Hash: ++p_; return fm::start();
        case Tok::Var: ++p_; return fm::var(t.text);
        case Tok::LParen: {
            ++p_;
            FormulaPtr f = expr();
            expect(Tok::RParen, "')'");
            return f;
        }
        case Tok::KwLet: return let_expr();
        case Tok::String:
            if (!calls_) fail("string literal outside a predicate call");
            ++p_;
            return fm::str(t.text);
        case Tok::Ident:
            ++p_;
            if (cur().kind == Tok::LParen) {
                if (!calls_) fail("predicate call '" + t.text + "' not allowed here");
                ++p_;
                std::vector<FormulaPtr> args;
                if (!accept(Tok::RParen)) {
                    do {
                        args.push_back(expr());
                    } while (accept(Tok::Comma));
                    expect(Tok::RParen, "')' closing argument list");
                }
                return fm::call(t.text, std::move(args));
            }
            return t.text[0] == '_' ? fm::prop(t.text) : fm::name(t.text);
        default: fail("unexpected token '" + describe(t) + "'");
        }
    }

    FormulaPtr let_expr() {
        expect(Tok::KwLet, "'let'");
        std::vector<Binding> bs;
        for (;;) {
            if (cur().kind != Tok::Var) fail("variable expected in let binding");
            std::string v = cur().text;
            ++p_;
            expect(Tok::Eq, "'=' in let binding");
            FormulaPtr body = expr();
            for (const auto& b : bs)
                if (b.var == v) fail("variable $" + v + " bound twice");
            bs.push_back({v, body});
            if (cur().kind == Tok::Comma && ahead(1).kind == Tok::Var && ahead(2).kind == Tok::Eq) {
                ++p_;
                continue;
            }
            break;
        }
        expect(Tok::KwIn, "'in'");
        FormulaPtr body = expr();
        return fm::let(std::move(bs), body);
    }

    std::vector<Token> t_;
    std::size_t p_ = 0;
    bool calls_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, bool allow_calls) {
    Lexer lx(text);
    Parser p(lx.run(), allow_calls);
    return p.parse_all();
}

// --------------------------------------------------------------- utilities

std::size_t formula_size(const FormulaPtr& f) {
    std::size_t n = 1;
    for (const auto& k : f->kids) n += formula_size(k);
    for (const auto& b : f->bindings) n += formula_size(b.body);
    return n;
}

namespace {
void walk(const FormulaPtr& f, const std::function<void(const Formula&)>& fn) {
    fn(*f);
    for (const auto& k : f->kids) walk(k, fn);
    for (const auto& b : f->bindings) walk(b.body, fn);
}
}  // namespace

std::set<std::string> element_names_in(const FormulaPtr& f) {
    std::set<std::string> out;
    walk(f, [&](const Formula& g) {
        if (g.kind == FormulaKind::Name) out.insert(g.name);
    });
    return out;
}

std::set<std::string> attribute_names_in(const FormulaPtr& f) {
    std::set<std::string> out;
    walk(f, [&](const Formula& g) {
        if (g.kind == FormulaKind::Attribute) out.insert(g.name);
    });
    return out;
}

std::set<std::string> propositions_in(const FormulaPtr& f) {
    std::set<std::string> out;
    walk(f, [&](const Formula& g) {
        if (g.kind == FormulaKind::Prop) out.insert(g.name);
    });
    return out;
}

bool contains_start(const FormulaPtr& f) {
    bool found = false;
    walk(f, [&](const Formula& g) { found = found || g.kind == FormulaKind::Start; });
    return found;
}

bool contains_calls(const FormulaPtr& f) {
    bool found = false;
    walk(f, [&](const Formula& g) {
        found = found || g.kind == FormulaKind::Call || g.kind == FormulaKind::String;
    });
    return found;
}

namespace {
void collect_free(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
    if (f->kind == FormulaKind::Variable) {
        if (!bound.count(f->name)) out.insert(f->name);
        return;
    }
    if (f->kind == FormulaKind::Let) {
        std::set<std::string> inner = bound;
        for (const auto& b : f->bindings) inner.insert(b.var);
        for (const auto& b : f->bindings) collect_free(b.body, inner, out);
        collect_free(f->kids[0], inner, out);
        return;
    }
    for (const auto& k : f->kids) collect_free(k, bound, out);
}
}  // namespace

std::set<std::string> free_variables(const FormulaPtr& f) {
    std::set<std::string> bound, out;
    collect_free(f, bound, out);
    return out;
}

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind || a->name != b->name || a->kids.size() != b->kids.size() ||
        a->bindings.size() != b->bindings.size())
        return false;
    if (a->kind == FormulaKind::Modality && a->program != b->program) return false;
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!structurally_equal(a->kids[i], b->kids[i])) return false;
    for (std::size_t i = 0; i < a->bindings.size(); ++i) {
        if (a->bindings[i].var != b->bindings[i].var) return false;
        if (!structurally_equal(a->bindings[i].body, b->bindings[i].body)) return false;
    }
    return true;
}

}  // namespace treesat
