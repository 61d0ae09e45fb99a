#include "treesat/xpath.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <vector>

#include "treesat/errors.hpp"

namespace treesat::xpath {

namespace {

const std::vector<std::pair<const char*, Axis>>& axis_names() {
    static const std::vector<std::pair<const char*, Axis>> names = {
        {"self", Axis::self},
        {"child", Axis::child},
        {"parent", Axis::parent},
        {"descendant-or-self", Axis::descendant_or_self},
        {"descendant", Axis::descendant},
        {"ancestor-or-self", Axis::ancestor_or_self},
        {"ancestor", Axis::ancestor},
        {"following-sibling", Axis::following_sibling},
        {"preceding-sibling", Axis::preceding_sibling},
        {"following", Axis::following},
        {"preceding", Axis::preceding},
    };
    return names;
}

const char* any_node = "node()";

PathPtr step(Axis a, std::string test) {
    auto p = std::make_shared<Path>();
    p->kind = Path::Kind::Step;
    p->axis = a;
    p->test = std::move(test);
    return p;
}

PathPtr compose(PathPtr l, PathPtr r) {
    auto p = std::make_shared<Path>();
    p->kind = Path::Kind::Compose;
    p->left = std::move(l);
    p->right = std::move(r);
    return p;
}

PathPtr qualified(PathPtr l, QualPtr q) {
    auto p = std::make_shared<Path>();
    p->kind = Path::Kind::Qualified;
    p->left = std::move(l);
    p->qualifier = std::move(q);
    return p;
}

QualPtr qual(Qualifier::Kind k, QualPtr a = nullptr, QualPtr b = nullptr) {
    auto q = std::make_shared<Qualifier>();
    q->kind = k;
    q->a = std::move(a);
    q->b = std::move(b);
    return q;
}

QualPtr qual_path(PathPtr p) {
    auto q = std::make_shared<Qualifier>();
    q->kind = Qualifier::Kind::Path;
    q->path = std::move(p);
    return q;
}

QueryPtr query(Query::Kind k, PathPtr p, QueryPtr a = nullptr, QueryPtr b = nullptr) {
    auto q = std::make_shared<Query>();
    q->kind = k;
    q->path = std::move(p);
    q->a = std::move(a);
    q->b = std::move(b);
    return q;
}

// ------------------------------------------------------------------- parser

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    QueryPtr run() {
        QueryPtr q = union_expr();
        skip();
        if (i_ < s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return q;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, static_cast<int>(i_) + 1); }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    bool peek(const char* t) {
        skip();
        return s_.compare(i_, std::char_traits<char>::length(t), t) == 0;
    }

    bool accept(const char* t) {
        if (!peek(t)) return false;
        i_ += std::char_traits<char>::length(t);
        return true;
    }

    void expect(const char* t) {
        if (!accept(t)) fail(std::string("expected '") + t + "'");
    }

    // A keyword not followed by a name character.
    bool peek_word(const char* w) {
        skip();
        std::size_t n = std::char_traits<char>::length(w);
        return s_.compare(i_, n, w) == 0 && (i_ + n >= s_.size() || !name_char(s_[i_ + n]));
    }

    bool accept_word(const char* w) {
        if (!peek_word(w)) return false;
        i_ += std::char_traits<char>::length(w);
        return true;
    }

    // Name followed by '(' (after optional blanks)?
    bool peek_call(const char* w) {
        if (!peek_word(w)) return false;
        std::size_t j = i_ + std::char_traits<char>::length(w);
        while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
        return j < s_.size() && s_[j] == '(';
    }

    std::string name() {
        skip();
        if (i_ >= s_.size() || !name_start(s_[i_])) fail("name expected");
        std::size_t b = i_;
        while (i_ < s_.size()) {
            if (name_char(s_[i_])) {
                ++i_;
            } else if (s_[i_] == ':' && i_ + 1 < s_.size() && s_[i_ + 1] != ':' && name_start(s_[i_ + 1])) {
                ++i_;
            } else {
                break;
            }
        }
        return s_.substr(b, i_ - b);
    }

    int number() {
        skip();
        if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_]))) fail("number expected");
        int v = 0;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) v = v * 10 + (s_[i_++] - '0');
        return v;
    }

    QueryPtr union_expr() {
        QueryPtr q = intersect_expr();
        while (accept("|")) q = query(Query::Kind::Union, nullptr, q, intersect_expr());
        return q;
    }

    QueryPtr intersect_expr() {
        QueryPtr q = primary_query();
        while (accept_word("intersect") || accept("\xE2\x88\xA9")) q = query(Query::Kind::Intersection, nullptr, q, primary_query());
        return q;
    }

    QueryPtr primary_query() {
        if (accept("(")) {
            QueryPtr q = union_expr();
            expect(")");
            return q;
        }
        if (accept("//")) return query(Query::Kind::Absolute, compose(step(Axis::descendant_or_self, any_node), rel_path()));
        if (accept("/")) {
            skip();
            if (i_ >= s_.size() || s_[i_] == ')' || s_[i_] == '|') return query(Query::Kind::Absolute, nullptr);
            return query(Query::Kind::Absolute, rel_path());
        }
        return query(Query::Kind::Relative, rel_path());
    }

    // Stops before a "/@name" tail, which only qualifiers accept.
    PathPtr rel_path() {
        PathPtr p = step_expr();
        for (;;) {
            if (peek("//")) {
                i_ += 2;
                p = compose(p, step(Axis::descendant_or_self, any_node));
                p = compose(p, step_expr());
            } else if (peek("/") && !attr_tail_ahead()) {
                ++i_;
                p = compose(p, step_expr());
            } else {
                return p;
            }
        }
    }

    bool attr_tail_ahead() {
        std::size_t j = i_ + 1;
        while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
        return j < s_.size() && s_[j] == '@';
    }

    PathPtr step_expr() {
        if (accept("..")) return step(Axis::parent, "*");
        if (accept(".")) return step(Axis::self, "*");
        if (peek("@")) fail("attribute steps are only allowed in qualifiers");
        Axis axis = Axis::child;
        skip();
        for (const auto& [n, a] : axis_names()) {
            std::size_t len = std::char_traits<char>::length(n);
            if (s_.compare(i_, len, n) == 0) {
                std::size_t j = i_ + len;
                while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
                if (s_.compare(j, 2, "::") == 0) {
                    axis = a;
                    i_ = j + 2;
                    break;
                }
            }
        }
        std::string test;
        if (accept("*")) {
            test = "*";
        } else if (peek_call("node")) {
            name();
            expect("(");
            expect(")");
            test = any_node;
        } else {
            test = name();
        }
        PathPtr p = step(axis, test);
        while (accept("[")) {
            p = qualified(p, qualifier());
            expect("]");
        }
        return p;
    }

    QualPtr qualifier() {
        QualPtr q = and_qualifier();
        while (accept_word("or")) q = qual(Qualifier::Kind::Or, q, and_qualifier());
        return q;
    }

    QualPtr and_qualifier() {
        QualPtr q = unary_qualifier();
        while (accept_word("and")) q = qual(Qualifier::Kind::And, q, unary_qualifier());
        return q;
    }

    QualPtr unary_qualifier() {
        skip();
        if (peek_call("not")) {
            name();
            expect("(");
            QualPtr q = qualifier();
            expect(")");
            return qual(Qualifier::Kind::Not, q);
        }
        if (peek_call("position")) {
            name();
            expect("(");
            expect(")");
            expect("=");
            auto q = std::make_shared<Qualifier>();
            q->kind = Qualifier::Kind::Position;
            if (peek_call("last")) {
                name();
                expect("(");
                expect(")");
                q->k = 0;
            } else {
                q->k = number();
                if (q->k < 1) fail("position must be at least 1");
            }
            return q;
        }
        if (peek_call("count")) {
            name();
            expect("(");
            auto q = std::make_shared<Qualifier>();
            q->kind = Qualifier::Kind::Count;
            q->path = rel_path();
            expect(")");
            if (accept("=")) q->op = '=';
            else if (accept(">")) q->op = '>';
            else fail("expected '=' or '>' after count()");
            q->k = number();
            return q;
        }
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            auto q = std::make_shared<Qualifier>();
            q->kind = Qualifier::Kind::Position;
            q->k = number();
            if (q->k < 1) fail("position must be at least 1");
            return q;
        }
        if (accept("(")) {
            QualPtr q = qualifier();
            expect(")");
            return q;
        }
        if (accept("@")) {
            auto q = std::make_shared<Qualifier>();
            q->kind = Qualifier::Kind::AttrStep;
            q->attribute = name();
            return q;
        }
        PathPtr p = rel_path();
        if (peek("/")) {
            ++i_;
            expect("@");
            auto q = std::make_shared<Qualifier>();
            q->kind = Qualifier::Kind::AttrPath;
            q->path = p;
            q->attribute = name();
            return q;
        }
        return qual_path(p);
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

// ----------------------------------------------------------------- desugar

PathPtr repeat(Axis a, const std::string& test, int k) {
    PathPtr p = step(a, test);
    for (int i = 1; i < k; ++i) p = compose(p, step(a, test));
    return p;
}

QualPtr desugar_qual(const QualPtr& q);

PathPtr desugar_path(const PathPtr& p) {
    switch (p->kind) {
    case Path::Kind::Step: return p;
    case Path::Kind::Compose: return compose(desugar_path(p->left), desugar_path(p->right));
    case Path::Kind::Qualified: break;
    }
    PathPtr base = desugar_path(p->left);
    const Qualifier& q = *p->qualifier;
    auto is_child_step = [&] { return base->kind == Path::Kind::Step && base->axis == Axis::child; };

    if (q.kind == Qualifier::Kind::Position) {
        if (!is_child_step()) throw UnsupportedSugar("position() is only rewritten on a child step: " + to_string(p));
        const std::string& nt = base->test;
        if (q.k == 1) return qualified(base, qual(Qualifier::Kind::Not, qual_path(step(Axis::preceding_sibling, nt))));
        if (q.k == 0) return qualified(base, qual(Qualifier::Kind::Not, qual_path(step(Axis::following_sibling, nt))));
        return qualified(base, qual_path(repeat(Axis::preceding_sibling, nt, q.k - 1)));
    }
    // preceding-sibling::*[position()=last() and q]
    if (q.kind == Qualifier::Kind::And && q.a->kind == Qualifier::Kind::Position && q.a->k == 0 &&
        base->kind == Path::Kind::Step && base->axis == Axis::preceding_sibling && base->test == "*") {
        QualPtr first = qual(Qualifier::Kind::Not, qual_path(step(Axis::preceding_sibling, "*")));
        return qualified(base, qual(Qualifier::Kind::And, first, desugar_qual(q.b)));
    }
    return qualified(base, desugar_qual(p->qualifier));
}

QualPtr desugar_qual(const QualPtr& q) {
    switch (q->kind) {
    case Qualifier::Kind::And:
    case Qualifier::Kind::Or: return qual(q->kind, desugar_qual(q->a), desugar_qual(q->b));
    case Qualifier::Kind::Not: return qual(q->kind, desugar_qual(q->a));
    case Qualifier::Kind::Path: return qual_path(desugar_path(q->path));
    case Qualifier::Kind::AttrPath: {
        auto r = std::make_shared<Qualifier>(*q);
        r->path = desugar_path(q->path);
        return r;
    }
    case Qualifier::Kind::AttrStep: return q;
    case Qualifier::Kind::Position:
        throw UnsupportedSugar("position() is only rewritten as the whole qualifier of a child step");
    case Qualifier::Kind::Count: {
        PathPtr p = desugar_path(q->path);
        if (q->op == '=' && q->k == 0) return qual(Qualifier::Kind::Not, qual_path(p));
        if (q->op == '>' && q->k == 0) return qual_path(p);
        if (q->op == '>' && p->kind == Path::Kind::Step && p->axis == Axis::child)
            return qual_path(compose(p, repeat(Axis::following_sibling, p->test, q->k)));
        throw UnsupportedSugar("count() form has no rewriting: " + to_string(q));
    }
    }
    return q;
}

QueryPtr desugar_query(const QueryPtr& q) {
    switch (q->kind) {
    case Query::Kind::Absolute:
    case Query::Kind::Relative: return query(q->kind, q->path ? desugar_path(q->path) : nullptr);
    case Query::Kind::Union:
    case Query::Kind::Intersection: return query(q->kind, nullptr, desugar_query(q->a), desugar_query(q->b));
    }
    return q;
}

// ---------------------------------------------------------------- compiling

FormulaPtr up(Program p, const FormulaPtr& f) { return fm::modal(p, f); }

FormulaPtr no(Program p) { return fm::lnot(fm::modal(p, fm::top())); }

FormulaPtr name_test(const std::string& t) {
    if (t == "*" || t == any_node) return fm::top();
    return fm::name(t);
}

class Compiler {
public:
    Compiler(FreshNames& names, bool attributes) : names_(names), attributes_(attributes) {}

    FormulaPtr exists(Axis axis, const FormulaPtr& psi) {
        switch (axis) {
        case Axis::self: return psi;
        case Axis::child: return up(Program::child1, chain(psi, Program::child2));
        case Axis::following_sibling: return up(Program::child2, chain(psi, Program::child2));
        case Axis::preceding_sibling: return up(Program::parent2, chain(psi, Program::parent2));
        case Axis::parent: {
            std::string x = names_.next();
            return fm::let({{x, fm::lor(up(Program::parent1, psi), up(Program::parent2, fm::var(x)))}}, fm::var(x));
        }
        case Axis::descendant: {
            std::string y = names_.next();
            FormulaPtr body = fm::disj({psi, up(Program::child1, fm::var(y)), up(Program::child2, fm::var(y))});
            return up(Program::child1, fm::let({{y, body}}, fm::var(y)));
        }
        case Axis::descendant_or_self: return fm::lor(psi, exists(Axis::descendant, psi));
        case Axis::ancestor: {
            std::string x = names_.next();
            FormulaPtr body = fm::lor(up(Program::parent1, fm::lor(psi, fm::var(x))), up(Program::parent2, fm::var(x)));
            return fm::let({{x, body}}, fm::var(x));
        }
        case Axis::ancestor_or_self: return fm::lor(psi, exists(Axis::ancestor, psi));
        case Axis::following:
            return exists(Axis::ancestor_or_self,
                          exists(Axis::following_sibling, exists(Axis::descendant_or_self, psi)));
        case Axis::preceding:
            return exists(Axis::ancestor_or_self,
                          exists(Axis::preceding_sibling, exists(Axis::descendant_or_self, psi)));
        }
        return fm::bottom();
    }

    // Some node of the whole tree satisfies psi.
    FormulaPtr anywhere(const FormulaPtr& psi) {
        std::string d = names_.next();
        FormulaPtr below = fm::let(
            {{d, fm::disj({psi, up(Program::child1, fm::var(d)), up(Program::child2, fm::var(d))})}}, fm::var(d));
        std::string u = names_.next();
        FormulaPtr body = fm::disj({fm::conj({no(Program::parent1), no(Program::parent2), below}),
                                    up(Program::parent1, fm::var(u)), up(Program::parent2, fm::var(u))});
        return fm::let({{u, body}}, fm::var(u));
    }

    // Unranked roots: the binary root and its next-sibling chain.
    FormulaPtr top_level() {
        std::string x = names_.next();
        FormulaPtr body = fm::lor(fm::conj({no(Program::parent1), no(Program::parent2)}), up(Program::parent2, fm::var(x)));
        return fm::conj({no(Program::parent1), fm::let({{x, body}}, fm::var(x))});
    }

    // Nodes reached through p from nodes satisfying from (plus the document
    // node when from_doc is set). Sets doc when the document node itself is
    // in the result.
    FormulaPtr select(const PathPtr& p, const FormulaPtr& from, bool from_doc, bool& doc) {
        switch (p->kind) {
        case Path::Kind::Step: {
            FormulaPtr reach = exists(converse(p->axis), from);
            if (from_doc) reach = fm::lor(reach, doc_region(p->axis));
            doc = from_doc && p->test == any_node &&
                  (p->axis == Axis::self || p->axis == Axis::descendant_or_self || p->axis == Axis::ancestor_or_self);
            return fm::land(name_test(p->test), reach);
        }
        case Path::Kind::Compose: {
            bool mid = false;
            FormulaPtr l = select(p->left, from, from_doc, mid);
            return select(p->right, l, mid, doc);
        }
        case Path::Kind::Qualified: {
            bool ignored = false;
            FormulaPtr l = select(p->left, from, from_doc, ignored);
            doc = false;
            return fm::land(l, qualifier(p->qualifier));
        }
        }
        return fm::bottom();
    }

    FormulaPtr doc_region(Axis a) {
        switch (a) {
        case Axis::child: return top_level();
        case Axis::descendant:
        case Axis::descendant_or_self: return fm::top();
        default: return fm::bottom();
        }
    }

    // Holds at n iff p selects from n some node satisfying psi.
    FormulaPtr exists_path(const PathPtr& p, const FormulaPtr& psi) {
        switch (p->kind) {
        case Path::Kind::Step: return exists(p->axis, fm::land(name_test(p->test), psi));
        case Path::Kind::Compose: return exists_path(p->left, exists_path(p->right, psi));
        case Path::Kind::Qualified: return exists_path(p->left, fm::land(qualifier(p->qualifier), psi));
        }
        return fm::bottom();
    }

    FormulaPtr qualifier(const QualPtr& q) {
        switch (q->kind) {
        case Qualifier::Kind::And: return fm::land(qualifier(q->a), qualifier(q->b));
        case Qualifier::Kind::Or: return fm::lor(qualifier(q->a), qualifier(q->b));
        case Qualifier::Kind::Not: return fm::lnot(qualifier(q->a));
        case Qualifier::Kind::Path: return exists_path(q->path, fm::top());
        case Qualifier::Kind::AttrPath: return exists_path(q->path, attr(q->attribute));
        case Qualifier::Kind::AttrStep: return attr(q->attribute);
        case Qualifier::Kind::Position:
        case Qualifier::Kind::Count: throw UnsupportedSugar("query must be desugared before compilation: " + to_string(q));
        }
        return fm::bottom();
    }

    FormulaPtr select_query(const QueryPtr& q, const FormulaPtr& ctx) {
        switch (q->kind) {
        case Query::Kind::Absolute: {
            if (!q->path) throw UnsupportedQuery("the query \"/\" selects only the document node");
            bool doc = false;
            return fm::land(select(q->path, fm::bottom(), true, doc), anywhere(ctx));
        }
        case Query::Kind::Relative: {
            bool doc = false;
            return select(q->path, ctx, false, doc);
        }
        case Query::Kind::Union: return fm::lor(select_query(q->a, ctx), select_query(q->b, ctx));
        case Query::Kind::Intersection: return fm::land(select_query(q->a, ctx), select_query(q->b, ctx));
        }
        return fm::bottom();
    }

    FormulaPtr exists_query(const QueryPtr& q, const FormulaPtr& ctx) {
        switch (q->kind) {
        case Query::Kind::Absolute: {
            if (!q->path) return ctx;
            bool doc = false;
            return fm::land(ctx, anywhere(select(q->path, fm::bottom(), true, doc)));
        }
        case Query::Kind::Relative: return fm::land(ctx, exists_path(q->path, fm::top()));
        case Query::Kind::Union: return fm::lor(exists_query(q->a, ctx), exists_query(q->b, ctx));
        case Query::Kind::Intersection:
            throw UnsupportedQuery("existence of an intersection is not expressible without a node marker");
        }
        return fm::bottom();
    }

private:
    // let $Y = psi | <p>$Y in $Y
    FormulaPtr chain(const FormulaPtr& psi, Program p) {
        std::string y = names_.next();
        return fm::let({{y, fm::lor(psi, up(p, fm::var(y)))}}, fm::var(y));
    }

    FormulaPtr attr(const std::string& a) const { return attributes_ ? fm::attr(a) : fm::top(); }

    FreshNames& names_;
    bool attributes_;
};

// ------------------------------------------------------------------- oracle

class Oracle {
public:
    explicit Oracle(const Forest& doc) {
        for (const auto& root : doc) add(root, -1);
    }

    std::set<int> eval_query(const QueryPtr& q, const std::set<int>& ctx) {
        switch (q->kind) {
        case Query::Kind::Absolute: {
            if (!q->path) return {};
            return real(path(q->path, {-1}));
        }
        case Query::Kind::Relative: return real(path(q->path, ctx));
        case Query::Kind::Union: {
            auto a = eval_query(q->a, ctx);
            for (int n : eval_query(q->b, ctx)) a.insert(n);
            return a;
        }
        case Query::Kind::Intersection: {
            auto a = eval_query(q->a, ctx);
            auto b = eval_query(q->b, ctx);
            std::set<int> out;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            return out;
        }
        }
        return {};
    }

private:
    static std::set<int> real(std::set<int> s) {
        s.erase(-1);
        return s;
    }

    void add(const Element& e, int parent) {
        int id = static_cast<int>(elems_.size());
        elems_.push_back(&e);
        parent_.push_back(parent);
        kids_.emplace_back();
        end_.push_back(0);
        if (parent >= 0) kids_[parent].push_back(id);
        else roots_.push_back(id);
        for (const auto& c : e.children) add(c, id);
        end_[id] = static_cast<int>(elems_.size());
    }

    int size() const { return static_cast<int>(elems_.size()); }

    const std::vector<int>& siblings(int n) const { return parent_[n] < 0 ? roots_ : kids_[parent_[n]]; }

    // Nodes on the axis from n, in axis order (reverse axes nearest first).
    std::vector<int> axis(Axis a, int n) const {
        std::vector<int> out;
        if (n < 0) {
            switch (a) {
            case Axis::self: out.push_back(-1); break;
            case Axis::child: out = roots_; break;
            case Axis::descendant_or_self: out.push_back(-1); [[fallthrough]];
            case Axis::descendant:
                for (int m = 0; m < size(); ++m) out.push_back(m);
                break;
            case Axis::ancestor_or_self: out.push_back(-1); break;
            default: break;
            }
            return out;
        }
        switch (a) {
        case Axis::self: out.push_back(n); break;
        case Axis::child: out = kids_[n]; break;
        case Axis::parent:
            if (parent_[n] >= 0) out.push_back(parent_[n]);
            break;
        case Axis::descendant_or_self: out.push_back(n); [[fallthrough]];
        case Axis::descendant:
            for (int m = n + 1; m < end_[n]; ++m) out.push_back(m);
            break;
        case Axis::ancestor_or_self: out.push_back(n); [[fallthrough]];
        case Axis::ancestor:
            for (int m = parent_[n]; m >= 0; m = parent_[m]) out.push_back(m);
            break;
        case Axis::following_sibling: {
            const auto& s = siblings(n);
            for (auto it = std::find(s.begin(), s.end(), n) + 1; it != s.end(); ++it) out.push_back(*it);
            break;
        }
        case Axis::preceding_sibling: {
            const auto& s = siblings(n);
            auto at = std::find(s.begin(), s.end(), n);
            for (auto it = at; it != s.begin();) out.push_back(*--it);
            break;
        }
        case Axis::following:
            for (int m = end_[n]; m < size(); ++m) out.push_back(m);
            break;
        case Axis::preceding: {
            std::set<int> anc;
            for (int m = parent_[n]; m >= 0; m = parent_[m]) anc.insert(m);
            for (int m = n - 1; m >= 0; --m)
                if (!anc.count(m)) out.push_back(m);
            break;
        }
        }
        return out;
    }

    bool test(const std::string& t, int m) const {
        if (m < 0) return t == any_node;
        return t == "*" || t == any_node || elems_[m]->name == t;
    }

    std::set<int> path(const PathPtr& p, const std::set<int>& ctx) {
        switch (p->kind) {
        case Path::Kind::Step: {
            std::set<int> out;
            for (int c : ctx)
                for (int m : axis(p->axis, c))
                    if (test(p->test, m)) out.insert(m);
            return out;
        }
        case Path::Kind::Compose: return path(p->right, path(p->left, ctx));
        case Path::Kind::Qualified: break;
        }
        // Peel the qualifiers down to the step, applied innermost first, so
        // positions count along the step's axis for each context node.
        std::vector<QualPtr> quals;
        PathPtr base = p;
        while (base->kind == Path::Kind::Qualified) {
            quals.push_back(base->qualifier);
            base = base->left;
        }
        std::reverse(quals.begin(), quals.end());
        std::set<int> out;
        if (base->kind == Path::Kind::Step) {
            for (int c : ctx) {
                std::vector<int> list;
                for (int m : axis(base->axis, c))
                    if (test(base->test, m) && m >= 0) list.push_back(m);
                for (const auto& q : quals) list = filter(list, q);
                out.insert(list.begin(), list.end());
            }
        } else {
            std::set<int> r = path(base, ctx);
            r.erase(-1);
            std::vector<int> list(r.begin(), r.end());
            for (const auto& q : quals) list = filter(list, q);
            out.insert(list.begin(), list.end());
        }
        return out;
    }

    std::vector<int> filter(const std::vector<int>& list, const QualPtr& q) {
        std::vector<int> out;
        int size = static_cast<int>(list.size());
        for (int i = 0; i < size; ++i)
            if (holds(q, list[i], i + 1, size)) out.push_back(list[i]);
        return out;
    }

    bool has_attr(int m, const std::string& a) const { return m >= 0 && elems_[m]->attributes.count(a) > 0; }

    bool holds(const QualPtr& q, int m, int pos, int size) {
        switch (q->kind) {
        case Qualifier::Kind::And: return holds(q->a, m, pos, size) && holds(q->b, m, pos, size);
        case Qualifier::Kind::Or: return holds(q->a, m, pos, size) || holds(q->b, m, pos, size);
        case Qualifier::Kind::Not: return !holds(q->a, m, pos, size);
        case Qualifier::Kind::Path: return !real(path(q->path, {m})).empty();
        case Qualifier::Kind::AttrPath:
            for (int r : path(q->path, {m}))
                if (has_attr(r, q->attribute)) return true;
            return false;
        case Qualifier::Kind::AttrStep: return has_attr(m, q->attribute);
        case Qualifier::Kind::Position: return q->k == 0 ? pos == size : pos == q->k;
        case Qualifier::Kind::Count: {
            int c = static_cast<int>(real(path(q->path, {m})).size());
            return q->op == '=' ? c == q->k : c > q->k;
        }
        }
        return false;
    }

    std::vector<const Element*> elems_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> kids_;
    std::vector<int> end_;
    std::vector<int> roots_;
};

}  // namespace

std::string to_string(Axis a) {
    for (const auto& [n, x] : axis_names())
        if (x == a) return n;
    return "?";
}

Axis converse(Axis a) {
    switch (a) {
    case Axis::self: return Axis::self;
    case Axis::child: return Axis::parent;
    case Axis::parent: return Axis::child;
    case Axis::descendant: return Axis::ancestor;
    case Axis::ancestor: return Axis::descendant;
    case Axis::descendant_or_self: return Axis::ancestor_or_self;
    case Axis::ancestor_or_self: return Axis::descendant_or_self;
    case Axis::following_sibling: return Axis::preceding_sibling;
    case Axis::preceding_sibling: return Axis::following_sibling;
    case Axis::following: return Axis::preceding;
    case Axis::preceding: return Axis::following;
    }
    return a;
}

QueryPtr parse(const std::string& text) {
    Parser p(text);
    return p.run();
}

QueryPtr desugar(const QueryPtr& q) { return desugar_query(q); }

std::string to_string(const PathPtr& p) {
    switch (p->kind) {
    case Path::Kind::Step: return to_string(p->axis) + "::" + p->test;
    case Path::Kind::Compose: return to_string(p->left) + "/" + to_string(p->right);
    case Path::Kind::Qualified: return to_string(p->left) + "[" + to_string(p->qualifier) + "]";
    }
    return "";
}

std::string to_string(const QualPtr& q) {
    switch (q->kind) {
    case Qualifier::Kind::And: return "(" + to_string(q->a) + " and " + to_string(q->b) + ")";
    case Qualifier::Kind::Or: return "(" + to_string(q->a) + " or " + to_string(q->b) + ")";
    case Qualifier::Kind::Not: return "not(" + to_string(q->a) + ")";
    case Qualifier::Kind::Path: return to_string(q->path);
    case Qualifier::Kind::AttrPath: return to_string(q->path) + "/@" + q->attribute;
    case Qualifier::Kind::AttrStep: return "@" + q->attribute;
    case Qualifier::Kind::Position: return q->k == 0 ? "position()=last()" : "position()=" + std::to_string(q->k);
    case Qualifier::Kind::Count:
        return "count(" + to_string(q->path) + ")" + std::string(1, q->op) + std::to_string(q->k);
    }
    return "";
}

std::string to_string(const QueryPtr& q) {
    switch (q->kind) {
    case Query::Kind::Absolute: return "/" + (q->path ? to_string(q->path) : std::string());
    case Query::Kind::Relative: return to_string(q->path);
    case Query::Kind::Union: return "(" + to_string(q->a) + " | " + to_string(q->b) + ")";
    case Query::Kind::Intersection: return "(" + to_string(q->a) + " intersect " + to_string(q->b) + ")";
    }
    return "";
}

FormulaPtr axis_exists(Axis axis, const FormulaPtr& psi, FreshNames& names) {
    Compiler c(names, true);
    return c.exists(axis, psi);
}

FormulaPtr compile_select(const QueryPtr& q, const FormulaPtr& ctx, FreshNames& names, bool attributes) {
    Compiler c(names, attributes);
    return c.select_query(q, ctx);
}

FormulaPtr compile_select(const QueryPtr& q, const FormulaPtr& ctx) {
    FreshNames names;
    return compile_select(q, ctx, names);
}

FormulaPtr compile_exists(const QueryPtr& q, const FormulaPtr& ctx, FreshNames& names, bool attributes) {
    Compiler c(names, attributes);
    return c.exists_query(q, ctx);
}

FormulaPtr compile_exists(const QueryPtr& q, const FormulaPtr& ctx) {
    FreshNames names;
    return compile_exists(q, ctx, names);
}

std::set<int> eval_oracle(const QueryPtr& q, const Forest& doc, const std::set<int>& context) {
    Oracle o(doc);
    return o.eval_query(q, context);
}

}  // namespace treesat::xpath
