// Shared generators for the test binaries.
#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "treesat/binary_tree.hpp"
#include "treesat/document.hpp"
#include "treesat/errors.hpp"
#include "treesat/formula.hpp"
#include "treesat/logic.hpp"

namespace testing {

using namespace treesat;

inline int pick(std::mt19937& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

// All forests with at most n nodes over the alphabet, smallest first.
inline std::vector<Forest> all_forests(int n, const std::vector<std::string>& alphabet) {
    std::vector<std::vector<Forest>> by(n + 1);
    by[0] = {Forest{}};
    for (int k = 1; k <= n; ++k)
        for (int m = 1; m <= k; ++m)
            for (const auto& a : alphabet)
                for (const auto& kids : by[m - 1])
                    for (const auto& rest : by[k - m]) {
                        Forest f;
                        Element e;
                        e.name = a;
                        e.children = kids;
                        f.push_back(std::move(e));
                        f.insert(f.end(), rest.begin(), rest.end());
                        by[k].push_back(std::move(f));
                    }
    std::vector<Forest> out;
    for (auto& v : by) out.insert(out.end(), v.begin(), v.end());
    return out;
}

inline std::vector<Element> all_documents(int n, const std::vector<std::string>& alphabet) {
    std::vector<Element> out;
    for (auto& f : all_forests(n, alphabet))
        if (f.size() == 1) out.push_back(std::move(f[0]));
    return out;
}

inline Element random_element(std::mt19937& rng, int depth, const std::vector<std::string>& names,
                              const std::vector<std::string>& attrs, int max_kids = 3) {
    Element e;
    e.name = names[pick(rng, static_cast<int>(names.size()))];
    for (const auto& a : attrs)
        if (pick(rng, 3) == 0) e.attributes[a] = "";
    if (depth > 0) {
        int k = pick(rng, max_kids + 1);
        for (int i = 0; i < k; ++i) e.children.push_back(random_element(rng, depth - 1, names, attrs, max_kids));
    }
    return e;
}

// Random forest of at most max_nodes elements.
inline Forest random_forest(std::mt19937& rng, int max_nodes, const std::vector<std::string>& names,
                            const std::vector<std::string>& attrs) {
    for (;;) {
        Forest f;
        int roots = 1 + pick(rng, 2);
        for (int i = 0; i < roots; ++i) f.push_back(random_element(rng, 3, names, attrs));
        std::size_t n = 0;
        for (const auto& e : f) n += element_count(e);
        if (static_cast<int>(n) <= max_nodes) return f;
    }
}

// Binary tree shapes with exactly n nodes: child1/child2 slots per node.
struct Shape {
    std::vector<int> child1, child2;
};

inline void shapes_rec(int n, std::vector<Shape>& out) {
    // Every shape of n nodes in preorder numbering: node 0 is the root, its
    // child1 subtree has k nodes, its child2 subtree n-1-k.
    if (n == 0) {
        out.push_back({});
        return;
    }
    for (int k = 0; k < n; ++k) {
        std::vector<Shape> left, right;
        shapes_rec(k, left);
        shapes_rec(n - 1 - k, right);
        for (const auto& l : left)
            for (const auto& r : right) {
                Shape s;
                s.child1.push_back(k > 0 ? 1 : -1);
                s.child2.push_back(n - 1 - k > 0 ? 1 + k : -1);
                for (std::size_t i = 0; i < l.child1.size(); ++i) {
                    s.child1.push_back(l.child1[i] < 0 ? -1 : l.child1[i] + 1);
                    s.child2.push_back(l.child2[i] < 0 ? -1 : l.child2[i] + 1);
                }
                for (std::size_t i = 0; i < r.child1.size(); ++i) {
                    s.child1.push_back(r.child1[i] < 0 ? -1 : r.child1[i] + 1 + k);
                    s.child2.push_back(r.child2[i] < 0 ? -1 : r.child2[i] + 1 + k);
                }
                out.push_back(std::move(s));
            }
    }
}

inline std::vector<Shape> shapes(int n) {
    std::vector<Shape> out;
    shapes_rec(n, out);
    return out;
}

// Node labels used by brute-force enumeration.
struct Label {
    std::string name;
    std::set<std::string> props;
    std::set<std::string> attrs;
};

// Every labelling of every binary tree with 1..max_nodes nodes; fn returns
// true to stop early.
inline bool for_each_tree(int max_nodes, const std::vector<Label>& labels,
                          const std::function<bool(const BinaryTree&)>& fn) {
    for (int n = 1; n <= max_nodes; ++n)
        for (const auto& s : shapes(n)) {
            std::vector<int> choice(n, 0);
            for (;;) {
                BinaryTree t;
                for (int i = 0; i < n; ++i) {
                    int id = t.add(labels[choice[i]].name);
                    t.nodes[id].props = labels[choice[i]].props;
                    t.nodes[id].attrs = labels[choice[i]].attrs;
                }
                for (int i = 0; i < n; ++i) {
                    if (s.child1[i] >= 0) t.set_child1(i, s.child1[i]);
                    if (s.child2[i] >= 0) t.set_child2(i, s.child2[i]);
                }
                t.root = 0;
                if (fn(t)) return true;
                int i = 0;
                while (i < n && ++choice[i] == static_cast<int>(labels.size())) choice[i++] = 0;
                if (i == n) break;
            }
        }
    return false;
}

// Random formula over names a, b, proposition _p and attribute x, with
// guarded recursion. Not necessarily cycle-free; callers filter.
class FormulaGen {
public:
    explicit FormulaGen(std::mt19937& rng) : rng_(rng) {}

    FormulaPtr operator()(int depth) {
        vars_.clear();
        return gen(depth);
    }

private:
    Program program() { return static_cast<Program>(pick(rng_, 4)); }

    FormulaPtr atom() {
        switch (pick(rng_, vars_.empty() ? 6 : 7)) {
        case 0: return fm::name("a");
        case 1: return fm::name("b");
        case 2: return fm::prop("_p");
        case 3: return fm::attr("x");
        case 4: return pick(rng_, 2) ? fm::top() : fm::bottom();
        case 5: return fm::name("a");
        default: return fm::modal(vars_.back().second, fm::var(vars_.back().first));
        }
    }

    FormulaPtr gen(int depth) {
        if (depth <= 0) return atom();
        switch (pick(rng_, 8)) {
        case 0: return fm::land(gen(depth - 1), gen(depth - 1));
        case 1: return fm::lor(gen(depth - 1), gen(depth - 1));
        case 2: return fm::lnot(gen(depth - 1));
        case 3:
        case 4: return fm::modal(program(), gen(depth - 1));
        case 5: {
            // let $X = psi | <p>$X in $X, with p fixed for the binding
            std::string x = "X" + std::to_string(++count_);
            Program p = program();
            vars_.emplace_back(x, p);
            FormulaPtr psi = gen(depth - 1);
            vars_.pop_back();
            FormulaPtr rec = fm::modal(p, fm::var(x));
            FormulaPtr body = pick(rng_, 3) ? fm::lor(psi, rec) : fm::land(psi, fm::lor(rec, fm::lnot(fm::modal(p, fm::top()))));
            return fm::let({{x, body}}, fm::var(x));
        }
        default: return atom();
        }
    }

    std::mt19937& rng_;
    std::vector<std::pair<std::string, Program>> vars_;
    int count_ = 0;
};

inline bool cycle_free(const FormulaPtr& f) {
    try {
        check_cycle_free(normalize(f));
        return true;
    } catch (const CycleError&) {
        return false;
    }
}

inline std::size_t node_count(const Forest& f) {
    std::size_t n = 0;
    for (const auto& e : f) n += element_count(e);
    return n;
}

}  // namespace testing
