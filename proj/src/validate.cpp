#include "treesat/validate.hpp"

#include <map>
#include <set>

namespace treesat {

bool attributes_match(const std::set<std::string>& present, const AttrExpr& a) {
    if (a.empty()) return present.empty();
    for (const auto& list : a.alternatives) {
        bool ok = true;
        std::set<std::string> listed;
        for (const auto& item : list) {
            listed.insert(item.name);
            bool has = present.count(item.name) > 0;
            if (item.kind == AttrItem::Kind::Required && !has) ok = false;
            if (item.kind == AttrItem::Kind::Prohibited && has) ok = false;
        }
        for (const auto& p : present)
            if (!listed.count(p)) ok = false;
        if (ok) return true;
    }
    return false;
}

namespace {

std::set<std::string> attribute_set(const Element& e) {
    std::set<std::string> out;
    for (const auto& [k, _] : e.attributes) out.insert(k);
    return out;
}

class Matcher {
public:
    Matcher(const TypePtr& t, bool attrs) : attrs_(attrs) { scope(t.get(), {}); }

    // Does e belong to Element type t? With shallow set, only the name counts.
    bool element_ok(const TreeType* t, const Element& e, bool shallow) {
        if (t->name != e.name) return false;
        if (shallow) return true;
        if (attrs_ && !attributes_match(attribute_set(e), t->attrs)) return false;
        auto key = std::make_pair(t, &e);
        auto it = elem_memo_.find(key);
        if (it != elem_memo_.end()) return it->second;
        bool r = sequence_ok(t->kids[0].get(), e.children, false);
        elem_memo_[key] = r;
        return r;
    }

    bool sequence_ok(const TreeType* c, const std::vector<Element>& kids, bool shallow) {
        Run run{kids, shallow, {}, {}, {}, false};
        std::set<int> r;
        do {
            run.changed = false;
            run.done.clear();
            r = ends(run, c, 0);
        } while (run.changed);
        return r.count(static_cast<int>(kids.size())) > 0;
    }

    // Element types that may occur directly in a content expression.
    std::vector<const TreeType*> children_of(const TreeType* c) const {
        std::vector<const TreeType*> out;
        std::set<const TreeType*> seen;
        collect(c, seen, out);
        return out;
    }

private:
    struct Run {
        const std::vector<Element>& kids;
        bool shallow;
        std::map<std::pair<const TreeType*, int>, std::set<int>> memo;
        std::set<std::pair<const TreeType*, int>> active;
        std::set<std::pair<const TreeType*, int>> done;
        bool changed;
    };

    // Positions j such that kids[i..j) matches t. Least fixpoint by
    // repeated passes; recursive occurrences read the previous estimate.
    std::set<int> ends(Run& run, const TreeType* t, int i) {
        auto key = std::make_pair(t, i);
        if (run.active.count(key) || run.done.count(key)) return run.memo[key];
        run.active.insert(key);
        std::set<int> r;
        int n = static_cast<int>(run.kids.size());
        switch (t->kind) {
        case TypeKind::EmptySet: break;
        case TypeKind::EmptySeq: r.insert(i); break;
        case TypeKind::Or:
            r = ends(run, t->kids[0].get(), i);
            for (int j : ends(run, t->kids[1].get(), i)) r.insert(j);
            break;
        case TypeKind::Concat:
            for (int j : ends(run, t->kids[0].get(), i))
                for (int k : ends(run, t->kids[1].get(), j)) r.insert(k);
            break;
        case TypeKind::Element:
            if (i < n && element_ok(t, run.kids[i], run.shallow)) r.insert(i + 1);
            break;
        case TypeKind::Var: r = ends(run, target_.at(t), i); break;
        case TypeKind::Bind: r = ends(run, t->kids[0].get(), i); break;
        }
        run.active.erase(key);
        run.done.insert(key);
        auto& slot = run.memo[key];
        if (slot != r) {
            slot = r;
            run.changed = true;
        }
        return r;
    }

    void collect(const TreeType* t, std::set<const TreeType*>& seen, std::vector<const TreeType*>& out) const {
        if (!seen.insert(t).second) return;
        switch (t->kind) {
        case TypeKind::Element: out.push_back(t); return;
        case TypeKind::Var: collect(target_.at(t), seen, out); return;
        default:
            for (const auto& k : t->kids) collect(k.get(), seen, out);
        }
    }

    void scope(const TreeType* t, std::map<std::string, const TreeType*> env) {
        switch (t->kind) {
        case TypeKind::Var: {
            auto it = env.find(t->name);
            if (it == env.end()) {
                static const TypePtr none = tt::none();
                target_[t] = none.get();  // unbound: matches nothing
            } else {
                target_[t] = it->second;
            }
            return;
        }
        case TypeKind::Bind:
            for (const auto& b : t->bindings) env[b.var] = b.body.get();
            for (const auto& b : t->bindings) scope(b.body.get(), env);
            scope(t->kids[0].get(), env);
            return;
        default:
            for (const auto& k : t->kids) scope(k.get(), env);
        }
    }

    bool attrs_;
    std::map<const TreeType*, const TreeType*> target_;
    std::map<std::pair<const TreeType*, const Element*>, bool> elem_memo_;
};

class Diagnoser {
public:
    Diagnoser(Matcher& m, bool attrs) : m_(m), attrs_(attrs) {}

    // e failed against all of cands (element types allowed at its position).
    bool run(const Element& e, int index, const std::vector<const TreeType*>& cands, const std::string& parent,
             Validation& out) {
        std::vector<const TreeType*> named;
        for (const auto* c : cands)
            if (c->name == e.name) named.push_back(c);
        if (named.empty()) {
            return fail(out, index,
                        parent.empty() ? "root element \"" + e.name + "\" is not allowed by the type"
                                       : "element \"" + e.name + "\" is not declared in \"" + parent +
                                             "\" list of possible children");
        }
        for (const auto* c : named)
            if (m_.element_ok(c, e, false)) return false;

        std::vector<const TreeType*> fitting;
        if (attrs_) {
            std::set<std::string> present = attribute_set(e);
            for (const auto* c : named)
                if (attributes_match(present, c->attrs)) fitting.push_back(c);
            if (fitting.empty()) return fail(out, index, attribute_message(e, named, present));
        } else {
            fitting = named;
        }

        std::vector<const TreeType*> allowed;
        std::set<std::string> allowed_names;
        for (const auto* c : fitting)
            for (const auto* k : m_.children_of(c->kids[0].get())) {
                allowed.push_back(k);
                allowed_names.insert(k->name);
            }
        int child_index = index + 1;
        for (const auto& k : e.children) {
            if (!allowed_names.count(k.name))
                return fail(out, child_index,
                            "element \"" + k.name + "\" is not declared in \"" + e.name + "\" list of possible children");
            child_index += static_cast<int>(element_count(k));
        }
        bool names_fit = false;
        for (const auto* c : fitting) names_fit = names_fit || m_.sequence_ok(c->kids[0].get(), e.children, true);
        if (!names_fit) return fail(out, index, "content of element \"" + e.name + "\" does not follow its declaration");

        child_index = index + 1;
        for (const auto& k : e.children) {
            if (run(k, child_index, allowed, e.name, out)) return true;
            child_index += static_cast<int>(element_count(k));
        }
        return fail(out, index, "content of element \"" + e.name + "\" does not follow its declaration");
    }

private:
    static bool fail(Validation& out, int index, std::string msg) {
        out.ok = false;
        out.node = index;
        out.message = std::move(msg);
        return true;
    }

    static std::string attribute_message(const Element& e, const std::vector<const TreeType*>& named,
                                         const std::set<std::string>& present) {
        std::set<std::string> declared, required;
        for (const auto* c : named)
            for (const auto& list : c->attrs.alternatives)
                for (const auto& item : list)
                    if (item.kind != AttrItem::Kind::Prohibited) declared.insert(item.name);
        for (const auto& p : present)
            if (!declared.count(p)) return "attribute \"" + p + "\" is not declared for element \"" + e.name + "\"";
        for (const auto* c : named)
            for (const auto& list : c->attrs.alternatives)
                for (const auto& item : list)
                    if (item.kind == AttrItem::Kind::Required && !present.count(item.name))
                        return "element \"" + e.name + "\" lacks required attribute \"" + item.name + "\"";
        return "attributes of element \"" + e.name + "\" do not match its declaration";
    }

    Matcher& m_;
    bool attrs_;
};

}  // namespace

Validation validate(const Element& doc, const TypePtr& t, bool check_attributes) {
    Matcher m(t, check_attributes);
    std::vector<Element> top{doc};
    Validation v;
    if (m.sequence_ok(t.get(), top, false)) return v;
    Diagnoser d(m, check_attributes);
    if (!d.run(top[0], 0, m.children_of(t.get()), "", v)) {
        v.ok = false;
        v.node = 0;
        v.message = "document does not match the type";
    }
    return v;
}

}  // namespace treesat
