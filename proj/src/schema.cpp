#include "treesat/schema.hpp"

#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "treesat/errors.hpp"

namespace treesat {

// ------------------------------------------------------------------ binarize

namespace {

// Renames bound variables apart and collects every binding in one table.
class Flattener {
public:
    std::map<std::string, TypePtr> env;

    TypePtr go(const TypePtr& t, const std::map<std::string, std::string>& scope) {
        switch (t->kind) {
        case TypeKind::EmptySet:
        case TypeKind::EmptySeq: return t;
        case TypeKind::Or: return tt::alt(go(t->kids[0], scope), go(t->kids[1], scope));
        case TypeKind::Concat: return tt::seq(go(t->kids[0], scope), go(t->kids[1], scope));
        case TypeKind::Element: return tt::element(t->name, t->attrs, go(t->kids[0], scope));
        case TypeKind::Var: {
            auto it = scope.find(t->name);
            if (it == scope.end()) throw Error("unbound type variable " + t->name);
            return tt::var(it->second);
        }
        case TypeKind::Bind: {
            auto inner = scope;
            for (const auto& b : t->bindings) {
                std::string u = b.var;
                for (int k = 1; env.count(u) || reserved_.count(u); ++k) u = b.var + "'" + std::to_string(k);
                reserved_.insert(u);
                inner[b.var] = u;
            }
            for (const auto& b : t->bindings) env[inner[b.var]] = go(b.body, inner);
            return go(t->kids[0], inner);
        }
        }
        return t;
    }

private:
    std::set<std::string> reserved_;
};

using Stack = std::vector<const TreeType*>;  // top of stack at the back

class Binarizer {
public:
    explicit Binarizer(const TypePtr& t) {
        root_ = flat_.go(t, {});
        for (const auto& [name, body] : flat_.env) bodies_[name] = body.get();
    }

    BinaryTreeType run() {
        BinaryTreeType out;
        out.start = state({root_.get()});
        for (std::size_t i = 0; i < stacks_.size(); ++i) expand(static_cast<int>(i), out);
        prune(out);
        return out;
    }

private:
    int state(Stack s) {
        while (!s.empty() && s.back()->kind == TypeKind::EmptySeq) s.pop_back();
        auto [it, fresh] = ids_.emplace(s, static_cast<int>(stacks_.size()));
        if (fresh) stacks_.push_back(std::move(s));
        return it->second;
    }

    void expand(int id, BinaryTreeType& out) {
        std::set<Stack> seen;
        BinaryVar v;
        std::function<void(Stack)> dfs = [&](Stack s) {
            if (!seen.insert(s).second) return;
            if (s.empty()) {
                v.nullable = true;
                return;
            }
            const TreeType* t = s.back();
            s.pop_back();
            switch (t->kind) {
            case TypeKind::EmptySet: return;
            case TypeKind::EmptySeq: dfs(std::move(s)); return;
            case TypeKind::Or: {
                Stack l = s;
                l.push_back(t->kids[0].get());
                dfs(std::move(l));
                s.push_back(t->kids[1].get());
                dfs(std::move(s));
                return;
            }
            case TypeKind::Concat:
                s.push_back(t->kids[1].get());
                s.push_back(t->kids[0].get());
                dfs(std::move(s));
                return;
            case TypeKind::Element: {
                int first = state({t->kids[0].get()});
                int next = state(std::move(s));
                for (const auto& d : v.defs)
                    if (d.name == t->name && d.first == first && d.next == next && d.attrs == t->attrs) return;
                v.defs.push_back({t->name, t->attrs, first, next});
                return;
            }
            case TypeKind::Var:
                s.push_back(bodies_.at(t->name));
                dfs(std::move(s));
                return;
            case TypeKind::Bind: break;  // removed by flattening
            }
        };
        dfs(stacks_[id]);
        if (out.vars.size() <= static_cast<std::size_t>(id)) out.vars.resize(id + 1);
        out.vars[id] = std::move(v);
    }

    // Drops definitions that cannot finish into a finite tree and variables
    // unreachable from the start.
    static void prune(BinaryTreeType& b) {
        std::size_t n = b.vars.size();
        std::vector<bool> productive(n, false);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t x = 0; x < n; ++x) {
                if (productive[x]) continue;
                bool p = b.vars[x].nullable;
                for (const auto& d : b.vars[x].defs) p = p || (productive[d.first] && productive[d.next]);
                if (p) productive[x] = changed = true;
            }
        }
        for (auto& v : b.vars)
            std::erase_if(v.defs, [&](const BinaryDef& d) { return !productive[d.first] || !productive[d.next]; });

        std::vector<int> renum(n, -1);
        std::vector<int> order{b.start};
        renum[b.start] = 0;
        for (std::size_t i = 0; i < order.size(); ++i)
            for (const auto& d : b.vars[order[i]].defs)
                for (int s : {d.first, d.next})
                    if (renum[s] < 0) {
                        renum[s] = static_cast<int>(order.size());
                        order.push_back(s);
                    }
        BinaryTreeType out;
        for (int x : order) {
            BinaryVar v = b.vars[x];
            for (auto& d : v.defs) {
                d.first = renum[d.first];
                d.next = renum[d.next];
            }
            out.vars.push_back(std::move(v));
        }
        out.start = 0;
        b = std::move(out);
    }

    Flattener flat_;
    TypePtr root_;
    std::map<std::string, const TreeType*> bodies_;
    std::map<Stack, int> ids_;
    std::vector<Stack> stacks_;
};

}  // namespace

BinaryTreeType binarize(const TypePtr& t) {
    Binarizer b(t);
    return b.run();
}

bool nullable(const BinaryTreeType& b, int x) { return b.vars.at(x).nullable; }

std::string to_string(const BinaryTreeType& b) {
    std::string out;
    for (std::size_t x = 0; x < b.vars.size(); ++x) {
        out += "x" + std::to_string(x) + (static_cast<int>(x) == b.start ? "* =" : " =");
        bool first = true;
        for (const auto& d : b.vars[x].defs) {
            out += first ? " " : " | ";
            first = false;
            out += d.name;
            if (!d.attrs.empty()) out += "[" + to_string(d.attrs) + "]";
            out += "(x" + std::to_string(d.first) + ", x" + std::to_string(d.next) + ")";
        }
        if (b.vars[x].nullable) out += first ? " ()" : " | ()";
        else if (first) out += " none";
        out += "\n";
    }
    return out;
}

// ----------------------------------------------------------------- compiling

namespace {

FormulaPtr item_formula(const AttrItem& item) {
    FormulaPtr a = fm::attr(item.name);
    switch (item.kind) {
    case AttrItem::Kind::Optional: return fm::lor(a, fm::lnot(a));
    case AttrItem::Kind::Required: return a;
    case AttrItem::Kind::Prohibited: return fm::lnot(a);
    }
    return a;
}

FormulaPtr absent(const AttrList& list) {
    std::vector<FormulaPtr> args;
    for (const auto& item : list) args.push_back(fm::str(item.name));
    return fm::call(absent_placeholder, std::move(args));
}

}  // namespace

FormulaPtr compile_attr(const AttrExpr& a) {
    if (a.empty()) return absent({});
    std::vector<FormulaPtr> alts;
    for (const auto& list : a.alternatives) {
        std::vector<FormulaPtr> parts;
        for (const auto& item : list) parts.push_back(item_formula(item));
        parts.push_back(absent(list));
        alts.push_back(fm::conj(parts));
    }
    return fm::disj(alts);
}

FormulaPtr compile_type(const BinaryTreeType& b, const FormulaPtr& tag, const FormulaPtr& frontier,
                        const CompileOptions& opts) {
    auto name = [&](int x) { return opts.var_prefix + std::to_string(x); };
    auto succ = [&](int x, Program p) -> FormulaPtr {
        const BinaryVar& v = b.vars[x];
        FormulaPtr none = fm::lnot(fm::modal(p, fm::top()));
        if (v.defs.empty()) return v.nullable ? none : fm::bottom();
        FormulaPtr some = fm::modal(p, fm::var(name(x)));
        return v.nullable ? fm::lor(none, some) : some;
    };

    // The label part is shared by every definition of the same element.
    std::map<std::pair<std::string, std::string>, FormulaPtr> labels;
    auto label = [&](const BinaryDef& d) {
        auto key = std::make_pair(d.name, to_string(d.attrs) + (d.attrs.empty() ? "" : "|"));
        auto it = labels.find(key);
        if (it != labels.end()) return it->second;
        FormulaPtr a = opts.attributes ? compile_attr(d.attrs) : fm::top();
        FormulaPtr l = fm::conj({fm::name(d.name), tag, a});
        labels.emplace(key, l);
        return l;
    };

    std::vector<Binding> bs;
    for (std::size_t x = 0; x < b.vars.size(); ++x) {
        const BinaryVar& v = b.vars[x];
        if (v.defs.empty()) continue;
        std::vector<FormulaPtr> alts;
        for (const auto& d : v.defs)
            alts.push_back(fm::conj({label(d), succ(d.first, Program::child1), succ(d.next, Program::child2)}));
        alts.push_back(frontier);
        bs.push_back({name(static_cast<int>(x)), fm::disj(alts)});
    }
    if (b.vars[b.start].defs.empty()) return fm::disj({fm::bottom(), frontier});
    if (bs.empty()) return fm::bottom();
    return fm::let(std::move(bs), fm::var(name(b.start)));
}

std::set<std::string> attribute_universe(const FormulaPtr& f) {
    std::set<std::string> out;
    std::unordered_set<const Formula*> seen;
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        if (!seen.insert(g.get()).second) return;
        if (g->kind == FormulaKind::Attribute) out.insert(g->name);
        if (g->kind == FormulaKind::Call && g->name == absent_placeholder)
            for (const auto& a : g->kids) out.insert(a->name);
        for (const auto& k : g->kids) walk(k);
        for (const auto& b : g->bindings) walk(b.body);
    };
    walk(f);
    return out;
}

FormulaPtr resolve_placeholders(const FormulaPtr& f, const std::set<std::string>& universe) {
    std::unordered_map<const Formula*, FormulaPtr> memo;
    std::map<std::set<std::string>, FormulaPtr> resolved;
    std::function<FormulaPtr(const FormulaPtr&)> go = [&](const FormulaPtr& g) -> FormulaPtr {
        auto it = memo.find(g.get());
        if (it != memo.end()) return it->second;
        FormulaPtr r;
        if (g->kind == FormulaKind::Call && g->name == absent_placeholder) {
            std::set<std::string> present;
            for (const auto& a : g->kids) present.insert(a->name);
            auto rit = resolved.find(present);
            if (rit == resolved.end()) {
                std::vector<FormulaPtr> parts;
                for (const auto& u : universe)
                    if (!present.count(u)) parts.push_back(fm::lnot(fm::attr(u)));
                rit = resolved.emplace(present, fm::conj(parts)).first;
            }
            r = rit->second;
        } else if (g->kids.empty() && g->bindings.empty()) {
            r = g;
        } else {
            auto copy = std::make_shared<Formula>(*g);
            bool changed = false;
            for (auto& k : copy->kids) {
                FormulaPtr n = go(k);
                changed = changed || n != k;
                k = n;
            }
            for (auto& b : copy->bindings) {
                FormulaPtr n = go(b.body);
                changed = changed || n != b.body;
                b.body = n;
            }
            if (!changed) r = g;
            else if (g->kind == FormulaKind::And) r = fm::conj(copy->kids);
            else if (g->kind == FormulaKind::Or) r = fm::disj(copy->kids);
            else r = copy;
        }
        memo.emplace(g.get(), r);
        return r;
    };
    return go(f);
}

FormulaPtr resolve_placeholders(const FormulaPtr& f) { return resolve_placeholders(f, attribute_universe(f)); }

}  // namespace treesat
