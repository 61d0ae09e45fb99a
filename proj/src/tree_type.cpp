#include "treesat/tree_type.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>

#include "treesat/errors.hpp"

namespace treesat {

namespace tt {

TypePtr none() {
    static const TypePtr t = std::make_shared<const TreeType>(TypeKind::EmptySet);
    return t;
}

TypePtr empty() {
    static const TypePtr t = std::make_shared<const TreeType>(TypeKind::EmptySeq);
    return t;
}

TypePtr alt(TypePtr a, TypePtr b) {
    auto t = std::make_shared<TreeType>(TypeKind::Or);
    t->kids = {std::move(a), std::move(b)};
    return t;
}

TypePtr seq(TypePtr a, TypePtr b) {
    auto t = std::make_shared<TreeType>(TypeKind::Concat);
    t->kids = {std::move(a), std::move(b)};
    return t;
}

TypePtr element(const std::string& name, AttrExpr attrs, TypePtr content) {
    auto t = std::make_shared<TreeType>(TypeKind::Element);
    t->name = name;
    t->attrs = std::move(attrs);
    t->kids = {std::move(content)};
    return t;
}

TypePtr var(const std::string& name) {
    auto t = std::make_shared<TreeType>(TypeKind::Var);
    t->name = name;
    return t;
}

TypePtr bind(std::vector<TypeBinding> bindings, TypePtr body) {
    auto t = std::make_shared<TreeType>(TypeKind::Bind);
    t->bindings = std::move(bindings);
    t->kids = {std::move(body)};
    return t;
}

}  // namespace tt

// ------------------------------------------------------------------- parser

namespace {

struct Pos {
    int line = 1;
    int column = 1;
};

struct VarRef {
    std::string name;
    Pos pos;
};

struct Parsed {
    TypePtr type;
    std::vector<VarRef> tails;     // unguarded references in tail position
    std::vector<VarRef> nontails;  // unguarded references elsewhere
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '.' || c == ':' || c == '-'; }

class TypeParser {
public:
    explicit TypeParser(const std::string& s) : s_(s) {}

    TypePtr run() {
        Parsed p = alternation();
        skip();
        if (i_ < s_.size()) fail("unexpected text");
        return p.type;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_.line, pos_.column); }
    [[noreturn]] static void fail_at(const std::string& msg, Pos p) { throw ParseError(msg, p.line, p.column); }

    void advance(std::size_t n = 1) {
        for (std::size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
            if (s_[i_] == '\n') {
                ++pos_.line;
                pos_.column = 1;
            } else {
                ++pos_.column;
            }
        }
    }

    void skip() {
        for (;;) {
            while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
            if (s_.compare(i_, 2, "//") == 0) {
                while (i_ < s_.size() && s_[i_] != '\n') advance();
                continue;
            }
            break;
        }
    }

    bool peek(const char* tok) {
        skip();
        return s_.compare(i_, std::char_traits<char>::length(tok), tok) == 0;
    }

    bool accept(const char* tok) {
        if (!peek(tok)) return false;
        advance(std::char_traits<char>::length(tok));
        return true;
    }

    void expect(const char* tok) {
        if (!accept(tok)) fail(std::string("expected '") + tok + "'");
    }

    bool peek_ident() {
        skip();
        return i_ < s_.size() && ident_start(static_cast<unsigned char>(s_[i_]));
    }

    std::string ident() {
        skip();
        if (!peek_ident()) fail("name expected");
        std::size_t b = i_;
        while (i_ < s_.size() && ident_char(static_cast<unsigned char>(s_[i_]))) advance();
        return s_.substr(b, i_ - b);
    }

    bool keyword_ahead(const char* kw) {
        skip();
        std::size_t n = std::char_traits<char>::length(kw);
        if (s_.compare(i_, n, kw) != 0) return false;
        return i_ + n >= s_.size() || !ident_char(static_cast<unsigned char>(s_[i_ + n]));
    }

    Parsed alternation() {
        Parsed l = sequence();
        while (accept("|")) {
            Parsed r = sequence();
            l.type = tt::alt(l.type, r.type);
            l.tails.insert(l.tails.end(), r.tails.begin(), r.tails.end());
            l.nontails.insert(l.nontails.end(), r.nontails.begin(), r.nontails.end());
        }
        return l;
    }

    Parsed sequence() {
        Parsed l = primary();
        while (accept(",")) {
            Parsed r = primary();
            l.type = tt::seq(l.type, r.type);
            l.nontails.insert(l.nontails.end(), l.tails.begin(), l.tails.end());
            l.nontails.insert(l.nontails.end(), r.nontails.begin(), r.nontails.end());
            l.tails = std::move(r.tails);
        }
        return l;
    }

    Parsed primary() {
        skip();
        if (accept("(")) {
            if (accept(")")) return {tt::empty(), {}, {}};
            Parsed p = alternation();
            expect(")");
            return p;
        }
        if (accept("\xE2\x88\x85")) return {tt::none(), {}, {}};
        if (keyword_ahead("none")) {
            advance(4);
            return {tt::none(), {}, {}};
        }
        if (keyword_ahead("let")) return let_expr();
        if (!peek_ident()) fail("type expression expected");
        Pos at = pos_;
        std::string name = ident();
        if (peek("[") || peek("{")) {
            AttrExpr attrs;
            if (accept("[")) attrs = attr_expr();
            expect("{");
            TypePtr content;
            if (peek("}")) content = tt::empty();
            else content = alternation().type;
            expect("}");
            return {tt::element(name, std::move(attrs), content), {}, {}};
        }
        if (name == "in" || name == "let") fail_at("unexpected keyword '" + name + "'", at);
        return {tt::var(name), {{name, at}}, {}};
    }

    AttrExpr attr_expr() {
        AttrExpr a;
        if (accept("]")) {
            a.alternatives.push_back({});
            return a;
        }
        for (;;) {
            AttrList list;
            std::set<std::string> seen;
            for (;;) {
                AttrItem item{AttrItem::Kind::Required, {}};
                if (accept("~")) item.kind = AttrItem::Kind::Prohibited;
                item.name = ident();
                if (item.kind == AttrItem::Kind::Required && accept("?")) item.kind = AttrItem::Kind::Optional;
                if (!seen.insert(item.name).second) fail("attribute " + item.name + " listed twice");
                list.push_back(item);
                if (!accept(",")) break;
            }
            a.alternatives.push_back(std::move(list));
            if (!accept("|")) break;
            if (accept("()")) break;  // explicit empty tail
        }
        expect("]");
        return a;
    }

    Parsed let_expr() {
        advance(3);
        std::vector<TypeBinding> bs;
        std::vector<Parsed> bodies;
        std::set<std::string> group;
        for (;;) {
            Pos at = pos_;
            std::string v = ident();
            if (!group.insert(v).second) fail_at("variable " + v + " bound twice", at);
            expect("=");
            Parsed body = alternation();
            bs.push_back({v, body.type});
            bodies.push_back(std::move(body));
            if (!accept(";")) break;
        }
        if (!keyword_ahead("in")) fail("expected 'in'");
        advance(2);
        Parsed body = alternation();

        Parsed out;
        out.type = tt::bind(std::move(bs), body.type);
        auto keep = [&](const std::vector<VarRef>& refs, std::vector<VarRef>& into) {
            for (const auto& r : refs)
                if (!group.count(r.name)) into.push_back(r);
        };
        for (const auto& b : bodies) {
            for (const auto& r : b.nontails)
                if (group.count(r.name))
                    fail_at("recursive use of " + r.name + " outside tail position must be enclosed in an element", r.pos);
            keep(b.tails, out.tails);
            keep(b.nontails, out.nontails);
        }
        keep(body.tails, out.tails);
        keep(body.nontails, out.nontails);
        return out;
    }

    const std::string& s_;
    std::size_t i_ = 0;
    Pos pos_;
};

// ------------------------------------------------------------------ printer

void print(const TypePtr& t, int level, std::string& out);

void print_attrs(const AttrExpr& a, std::string& out) {
    for (std::size_t i = 0; i < a.alternatives.size(); ++i) {
        if (i) out += " | ";
        const auto& list = a.alternatives[i];
        for (std::size_t k = 0; k < list.size(); ++k) {
            if (k) out += ", ";
            if (list[k].kind == AttrItem::Kind::Prohibited) out += '~';
            out += list[k].name;
            if (list[k].kind == AttrItem::Kind::Optional) out += '?';
        }
    }
}

int level_of(const TypePtr& t) {
    switch (t->kind) {
    case TypeKind::Or: return 0;
    case TypeKind::Concat: return 1;
    case TypeKind::Bind: return -1;
    default: return 2;
    }
}

void print_operand(const TypePtr& t, int level, std::string& out) {
    if (level_of(t) < level) {
        out += '(';
        print(t, 0, out);
        out += ')';
    } else {
        print(t, level, out);
    }
}

void print(const TypePtr& t, int, std::string& out) {
    switch (t->kind) {
    case TypeKind::EmptySet: out += "none"; break;
    case TypeKind::EmptySeq: out += "()"; break;
    case TypeKind::Or:
        print_operand(t->kids[0], 0, out);
        out += " | ";
        print_operand(t->kids[1], 1, out);
        break;
    case TypeKind::Concat:
        print_operand(t->kids[0], 1, out);
        out += ", ";
        print_operand(t->kids[1], 2, out);
        break;
    case TypeKind::Element:
        out += t->name;
        if (!t->attrs.empty()) {
            out += '[';
            print_attrs(t->attrs, out);
            out += ']';
        }
        out += '{';
        if (t->kids[0]->kind != TypeKind::EmptySeq) print(t->kids[0], 0, out);
        out += '}';
        break;
    case TypeKind::Var: out += t->name; break;
    case TypeKind::Bind:
        out += "let ";
        for (std::size_t i = 0; i < t->bindings.size(); ++i) {
            if (i) out += "; ";
            out += t->bindings[i].var + " = ";
            print(t->bindings[i].body, 0, out);
        }
        out += " in ";
        print(t->kids[0], 0, out);
        break;
    }
}

void collect(const TypePtr& t, std::set<std::string>* elems, std::set<std::string>* attrs) {
    if (t->kind == TypeKind::Element) {
        if (elems) elems->insert(t->name);
        if (attrs)
            for (const auto& list : t->attrs.alternatives)
                for (const auto& item : list) attrs->insert(item.name);
    }
    for (const auto& k : t->kids) collect(k, elems, attrs);
    for (const auto& b : t->bindings) collect(b.body, elems, attrs);
}

}  // namespace

TypePtr parse_internal(const std::string& text) {
    TypeParser p(text);
    return p.run();
}

std::string to_string(const TypePtr& t) {
    std::string out;
    print(t, 0, out);
    return out;
}

std::string to_string(const AttrExpr& a) {
    std::string out;
    print_attrs(a, out);
    return out;
}

std::set<std::string> element_names(const TypePtr& t) {
    std::set<std::string> out;
    collect(t, &out, nullptr);
    return out;
}

std::set<std::string> attribute_names(const TypePtr& t) {
    std::set<std::string> out;
    collect(t, nullptr, &out);
    return out;
}

namespace {
std::set<std::string> difference(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}
}  // namespace

std::set<std::string> added_element(const TypePtr& before, const TypePtr& after) {
    return difference(element_names(after), element_names(before));
}

std::set<std::string> added_attribute(const TypePtr& before, const TypePtr& after) {
    return difference(attribute_names(after), attribute_names(before));
}

}  // namespace treesat
