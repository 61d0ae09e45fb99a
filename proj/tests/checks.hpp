// Randomized and exhaustive cross-checks shared by the property tests and the
// acceptance report. Each returns counts; a check passes with zero
// disagreements.
#pragma once

#include <algorithm>
#include <map>
#include <sstream>

#include "support.hpp"
#include "treesat/predicates.hpp"
#include "treesat/schema.hpp"
#include "treesat/solver.hpp"
#include "treesat/validate.hpp"
#include "treesat/xpath.hpp"

namespace testing {

struct CheckResult {
    int cases = 0;
    int disagreements = 0;
    int sat = 0;              // Sat verdicts seen
    int unsound = 0;          // Sat witnesses rejected by check_model
    std::string first_failure;

    void fail(const std::string& what) {
        if (disagreements++ == 0) first_failure = what;
    }
};

inline bool witness_holds(const FormulaPtr& f, const SatResult& r) {
    return r.sat && r.target >= 0 && check_model(normalize(f), r.witness, r.target);
}

// (a) solver verdicts against exhaustive search over binary trees of at most
// 4 nodes. A Sat verdict whose witness is larger than the search bound is
// not a disagreement; its witness is still model-checked.
inline CheckResult solver_vs_enumeration(int count, unsigned seed) {
    CheckResult out;
    std::mt19937 rng(seed);
    FormulaGen gen(rng);
    SolverOptions quiet;
    quiet.verify = false;  // the witness is checked below, independently
    while (out.cases < count) {
        FormulaPtr f = gen(1 + pick(rng, 4));
        if (!cycle_free(f)) continue;
        ++out.cases;
        FormulaPtr nf = normalize(f);

        std::vector<std::string> names = {"c"};
        for (const auto& n : element_names_in(nf)) names.push_back(n);
        std::vector<std::set<std::string>> props = {{}}, attrs = {{}};
        if (propositions_in(nf).count("_p")) props.push_back({"_p"});
        if (attribute_names_in(nf).count("x")) attrs.push_back({"x"});
        std::vector<Label> labels;
        for (const auto& n : names)
            for (const auto& p : props)
                for (const auto& a : attrs) labels.push_back({n, p, a});

        bool found = for_each_tree(4, labels, [&](const BinaryTree& t) {
            auto m = models(nf, t);
            return std::find(m.begin(), m.end(), true) != m.end();
        });
        SatResult r = satisfiable(f, quiet);
        if (r.sat) {
            ++out.sat;
            if (!witness_holds(f, r)) {
                ++out.unsound;
                out.fail("witness rejected for " + to_string(f));
            }
        }
        if (found && !r.sat) out.fail("solver Unsat, enumeration found a model: " + to_string(f));
        if (!found && r.sat && r.witness.size() <= 4)
            out.fail("solver witness within bound missed by enumeration: " + to_string(f));
    }
    return out;
}

// Random queries with at most `steps` steps per path over {a,b,c}.
class QueryGen {
public:
    explicit QueryGen(std::mt19937& rng) : rng_(rng) {}

    std::string query(int steps) {
        switch (pick(rng_, 8)) {
        case 0: return "/" + path(steps);
        case 1: return "//" + path(std::max(1, steps - 1));
        case 2: return path(steps / 2 + 1) + " | " + path(steps / 2 + 1);
        case 3: return path(steps / 2 + 1) + " intersect " + path(steps / 2 + 1);
        default: return path(steps);
        }
    }

private:
    std::string test() {
        static const char* names[] = {"a", "b", "c", "*"};
        return names[pick(rng_, 4)];
    }

    std::string step(int depth) {
        static const char* axes[] = {"self", "child", "parent", "descendant", "ancestor", "descendant-or-self",
                                     "ancestor-or-self", "following-sibling", "preceding-sibling", "following",
                                     "preceding"};
        std::string s = std::string(axes[pick(rng_, 11)]) + "::" + test();
        if (depth > 0 && pick(rng_, 3) == 0) s += "[" + qualifier(depth - 1) + "]";
        return s;
    }

    std::string qualifier(int depth) {
        switch (pick(rng_, depth > 0 ? 7 : 3)) {
        case 0: return "@x";
        case 1: return step(0);
        case 2: return step(0) + "/@x";
        case 3: return "not(" + qualifier(depth - 1) + ")";
        case 4: return qualifier(depth - 1) + " and " + qualifier(depth - 1);
        case 5: return "(" + qualifier(depth - 1) + " or " + qualifier(depth - 1) + ")";
        default: return step(depth - 1) + "/" + step(depth - 1);
        }
    }

    std::string path(int steps) {
        int n = 1 + pick(rng_, steps);
        std::string s = step(1);
        for (int i = 1; i < n; ++i) s += (pick(rng_, 4) ? "/" : "//") + step(1);
        return s;
    }

    std::mt19937& rng_;
};

inline std::set<int> selected(const FormulaPtr& f, const BinaryTree& t) {
    auto m = models(f, t);
    std::set<int> out;
    for (int i = 0; i < static_cast<int>(m.size()); ++i)
        if (m[i]) out.insert(i);
    return out;
}

// (b) compiled selection and existence formulas against the direct
// evaluator, on random forests of at most 10 nodes. Also checks that every
// compiled formula is cycle-free.
inline CheckResult xpath_vs_oracle(int count, unsigned seed) {
    CheckResult out;
    std::mt19937 rng(seed);
    QueryGen qg(rng);
    const std::vector<std::string> names = {"a", "b", "c"};
    while (out.cases < count) {
        Forest doc = random_forest(rng, 10, names, {"x"});
        int n = static_cast<int>(node_count(doc));
        std::set<int> ctx = {pick(rng, n)};
        if (pick(rng, 3) == 0) ctx.insert(pick(rng, n));
        std::string text = qg.query(4);
        xpath::QueryPtr q = xpath::desugar(xpath::parse(text));
        ++out.cases;
        BinaryTree t = to_binary(doc);
        for (int c : ctx) t.nodes[c].props.insert("#");

        FormulaPtr sel = xpath::compile_select(q, fm::start());
        if (!cycle_free(sel)) out.fail("compiled selection not cycle-free: " + text);
        auto want = xpath::eval_oracle(q, doc, ctx);
        if (selected(sel, t) != want) out.fail("selection differs for " + text);

        if (q->kind == xpath::Query::Kind::Intersection) continue;
        FormulaPtr ex = xpath::compile_exists(q, fm::start());
        auto holds = selected(ex, t);
        for (int c = 0; c < n; ++c) {
            bool expect = ctx.count(c) && !xpath::eval_oracle(q, doc, {c}).empty();
            if (expect != (holds.count(c) > 0)) {
                out.fail("existence differs for " + text + " at node " + std::to_string(c));
                break;
            }
        }
    }
    return out;
}

// Hand-written grammars in the internal syntax.
inline const std::vector<std::string>& grammar_corpus() {
    static const std::vector<std::string> g = {
        "a{()}",
        "a{b{()}}",
        "a{b{()} | ()}",
        "a{b{()}, b{()}}",
        "a{b{()} | a{()}}",
        "let x = b{()}, x | () in a{x}",
        "let x = b{()}, x | () in a{b{()}, x}",
        "let x = a{x}, x | () in a{x}",
        "let x = a{y}, x | (); y = b{()}, y | () in a{x}",
        "let x = a{x} | b{()} in x",
        "let x = a{()}, b{()}, x | () in a{x}",
        "let x = a{()}, y | (); y = b{()}, x in b{x}",
        "a{b{a{()}}} | b{()}",
        "let x = b{x} | () in a{x}",
        "let x = a{()}, x | b{()} in b{x}",
        "let x = a{y} ; y = b{x}, y | () in x",
        "a{b{()}, c{()}} | a{c{()}}",
        "let x = a{x}, b{()} | () in b{x}",
        "a{none} | b{()}",
        "let x = b{()} | a{x}, x in a{x}",
        "let x = a{()}, x | () ; y = b{x} in y",
        "a{(b{()} | ()), c{()}}",
    };
    return g;
}

inline const std::vector<std::string>& attribute_grammars() {
    static const std::vector<std::string> g = {
        "a[x]{()}",
        "a[x?]{b{()}}",
        "a[x?, y]{b[~x]{()} | ()}",
        "a[x | y]{()}",
        "let z = b[y?]{()}, z | () in a[x?]{z}",
    };
    return g;
}

inline std::vector<std::string> sorted_names(const TypePtr& t) {
    auto s = element_names(t);
    return {s.begin(), s.end()};
}

// (c) membership by compiled formula against the validator, for every
// document over the grammar's names with at most `max_nodes` nodes (plus
// documents with a foreign name up to 5 nodes), and attribute assignments on
// documents of at most 3 nodes for the attribute grammars.
inline CheckResult types_vs_validator(int max_nodes) {
    CheckResult out;
    auto check = [&](const TypePtr& t, const FormulaPtr& f, const Element& d, bool attrs) {
        ++out.cases;
        bool v = validate(d, t, attrs).ok;
        bool c = check_model(f, to_binary(d), 0);
        if (v != c) out.fail(to_string(t) + " on " + serialize(d));
    };
    for (const auto& text : grammar_corpus()) {
        TypePtr t = parse_internal(text);
        CompileOptions o;
        o.attributes = false;
        FormulaPtr f = normalize(resolve_placeholders(compile_type(binarize(t), fm::top(), fm::bottom(), o)));
        auto names = sorted_names(t);
        for (const auto& d : all_documents(names.size() > 2 ? max_nodes - 1 : max_nodes, names)) check(t, f, d, false);
        names.push_back("zz");
        for (const auto& d : all_documents(5, names)) check(t, f, d, false);
    }
    for (const auto& text : attribute_grammars()) {
        TypePtr t = parse_internal(text);
        FormulaPtr raw = compile_type(binarize(t), fm::top(), fm::bottom());
        auto universe = attribute_universe(raw);
        FormulaPtr f = normalize(resolve_placeholders(raw, universe));
        std::vector<std::string> attrs(universe.begin(), universe.end());
        for (const auto& shape : all_documents(3, sorted_names(t))) {
            // every attribute subset on every node
            std::vector<Element*> nodes;
            std::function<void(Element&)> collect = [&](Element& e) {
                nodes.push_back(&e);
                for (auto& k : e.children) collect(k);
            };
            Element d = shape;
            collect(d);
            std::size_t bits = nodes.size() * attrs.size();
            for (std::size_t mask = 0; mask < (std::size_t(1) << bits); ++mask) {
                for (std::size_t i = 0; i < nodes.size(); ++i) {
                    nodes[i]->attributes.clear();
                    for (std::size_t j = 0; j < attrs.size(); ++j)
                        if (mask >> (i * attrs.size() + j) & 1) nodes[i]->attributes[attrs[j]] = "";
                }
                check(t, f, d, true);
            }
        }
    }
    return out;
}

// (d) to_binary / from_binary round trip.
inline CheckResult binary_round_trip(int count, unsigned seed) {
    CheckResult out;
    std::mt19937 rng(seed);
    const std::vector<std::string> names = {"a", "b", "c", "d"};
    for (int i = 0; i < count; ++i) {
        ++out.cases;
        Forest f = random_forest(rng, 40, names, {"x", "y"});
        BinaryTree t = to_binary(f);
        if (t.size() != node_count(f)) out.fail("node count changed");
        if (!same_structure(forest_from_binary(t), f)) out.fail("forest round trip failed: " + serialize(f));
        if (f.size() == 1 && !same_structure(from_binary(to_binary(f[0])), f[0]))
            out.fail("document round trip failed: " + serialize(f));
    }
    return out;
}

// (e) the five regions self/ancestor/descendant/preceding/following
// partition the nodes, both by the direct evaluator and by the compiled
// region formulas.
inline CheckResult axis_partition(int count, unsigned seed) {
    CheckResult out;
    std::mt19937 rng(seed);
    const char* regions[] = {"self::*", "ancestor::*", "descendant::*", "preceding::*", "following::*"};
    const char* predicates[] = {"ancestor", "descendant", "preceding", "following"};
    for (int i = 0; i < count; ++i) {
        Forest doc = random_forest(rng, 10, {"a", "b"}, {});
        int n = static_cast<int>(node_count(doc));
        for (int c = 0; c < n; ++c) {
            ++out.cases;
            std::vector<int> hits(n, 0);
            for (const char* r : regions)
                for (int m : xpath::eval_oracle(xpath::parse(r), doc, {c})) ++hits[m];
            for (int m = 0; m < n; ++m)
                if (hits[m] != 1) out.fail("oracle regions overlap or miss a node");

            // Region formulas, evaluated at every node m against the mark on c:
            // m sees c in exactly one region.
            BinaryTree t = to_binary(doc);
            t.nodes[c].props.insert("_m");
            std::vector<int> seen(n, 0);
            xpath::FreshNames names;
            for (const char* p : predicates)
                for (int m : selected(axis_formula(p, fm::prop("_m"), names), t)) ++seen[m];
            ++seen[c];
            for (int m = 0; m < n; ++m)
                if (seen[m] != 1) out.fail("region formulas overlap or miss a node");
        }
    }
    return out;
}

}  // namespace testing
