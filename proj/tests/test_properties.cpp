#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "checks.hpp"
#include "treesat/run.hpp"

using namespace treesat;
using namespace testing;

namespace {

void require_clean(const CheckResult& r, int min_cases) {
    INFO(r.first_failure);
    CHECK(r.cases >= min_cases);
    CHECK(r.disagreements == 0);
    CHECK(r.unsound == 0);
}

std::set<std::string> names_of(const Element& e) {
    std::set<std::string> out = {e.name};
    for (const auto& k : e.children)
        for (const auto& n : names_of(k)) out.insert(n);
    return out;
}

}  // namespace

TEST_CASE("solver agrees with exhaustive search on small trees") {
    require_clean(solver_vs_enumeration(1000, 1), 1000);
}

TEST_CASE("compiled queries agree with the direct evaluator") {
    require_clean(xpath_vs_oracle(500, 2), 500);
}

TEST_CASE("compiled types agree with the validator") {
    require_clean(types_vs_validator(8), 20);
}

TEST_CASE("binary encoding round-trips") {
    require_clean(binary_round_trip(1000, 3), 1000);
}

TEST_CASE("axis regions partition the nodes") {
    require_clean(axis_partition(60, 4), 60);
}

TEST_CASE("desugaring preserves the selected nodes") {
    // Exact rewritings, with the step evaluated from every node.
    const std::vector<std::string> exact = {
        "descendant-or-self::*/a[1]",
        "descendant-or-self::*/*[position()=1]",
        "descendant-or-self::*/b[position()=last()]",
        "descendant-or-self::*[count(child::a)=0]",
        "descendant-or-self::*[count(descendant::b)>0]",
        "descendant-or-self::*[count(b)>1]",
        "descendant-or-self::*[count(*)>2]",
        "descendant-or-self::*/*/preceding-sibling::*[position()=last() and self::b]",
        "descendant-or-self::*/*[1][self::a]",
    };
    std::mt19937 rng(5);
    std::vector<Forest> docs;
    for (int i = 0; i < 300; ++i) docs.push_back({random_element(rng, 3, {"a", "b", "c"}, {}, 4)});
    for (const auto& text : exact) {
        auto q = xpath::parse(text);
        auto d = xpath::desugar(q);
        int differ = 0;
        for (const auto& doc : docs)
            if (xpath::eval_oracle(q, doc, {0}) != xpath::eval_oracle(d, doc, {0})) ++differ;
        INFO(text << " -> " << xpath::to_string(d));
        CHECK(differ == 0);
    }

    // position()=k for k > 1 becomes k-1 preceding-sibling steps: it selects
    // the nodes at position k or later.
    for (int k = 2; k <= 3; ++k) {
        auto q = xpath::desugar(xpath::parse("descendant-or-self::*/b[" + std::to_string(k) + "]"));
        for (const auto& doc : docs) {
            std::set<int> at_least;
            for (int m = 1; m <= 6; ++m) {
                if (m < k) continue;
                for (int n : xpath::eval_oracle(
                         xpath::parse("descendant-or-self::*/b[" + std::to_string(m) + "]"), doc, {0}))
                    at_least.insert(n);
            }
            CHECK(xpath::eval_oracle(q, doc, {0}) == at_least);
        }
    }
}

TEST_CASE("sugar outside the rewritable shapes is rejected") {
    for (const char* text : {"a[position()=2 and b]", "a[b][1]", "*[count(a/b)>2]", "a[count(b)=3]",
                             "following-sibling::a[position()=last() and b]"}) {
        std::string shown = text;
        INFO(shown);
        CHECK_THROWS_AS(xpath::desugar(xpath::parse(text)), UnsupportedSugar);
    }
}

TEST_CASE("exclude contradicts reachability") {
    xpath::FreshNames names;
    // following and preceding reach other top-level trees of a forest, so
    // they are only contradicted within a single document.
    FormulaPtr single = axis_formula("ancestor-or-self", parse_formula("~<-1>T & ~<-2>T & ~<2>T"), names);
    for (const char* atom : {"a", "b", "_p", "<x>T", "a & <1>b", "<2>_p"}) {
        FormulaPtr phi = parse_formula(atom);
        FormulaPtr ex = fm::lnot(
            axis_formula("ancestor-or-self", axis_formula("descendant-or-self", phi, names), names));
        for (const char* region : {"ancestor", "descendant", "descendant-or-self", "ancestor-or-self"}) {
            std::string where = std::string(atom) + " in " + region;
            INFO(where);
            CHECK_FALSE(satisfiable(fm::land(ex, axis_formula(region, phi, names))).sat);
        }
        for (const char* region : {"following", "preceding"}) {
            std::string where = std::string(atom) + " in " + region + " of one document";
            INFO(where);
            CHECK_FALSE(satisfiable(fm::conj({ex, single, axis_formula(region, phi, names)})).sat);
        }
        CHECK(satisfiable(ex).sat);
    }
}

TEST_CASE("backward_incompatible is unsat exactly on language inclusion") {
    // Pairs of two-letter grammars; inclusion is decided by enumerating every
    // document of at most 8 nodes.
    std::vector<std::string> corpus;
    for (const auto& g : grammar_corpus())
        if (sorted_names(parse_internal(g)).size() <= 2) corpus.push_back(g);
    std::vector<Element> docs = all_documents(8, {"a", "b"});
    std::vector<std::vector<bool>> member;
    for (const auto& g : corpus) {
        TypePtr t = parse_internal(g);
        std::vector<bool> m;
        for (const auto& d : docs) m.push_back(validate(d, t, false).ok);
        member.push_back(std::move(m));
    }
    int pairs = 0;
    for (std::size_t i = 0; i < corpus.size(); i += 2)
        for (std::size_t j = 1; j < corpus.size(); j += 3) {
            if (i == j) continue;
            ++pairs;
            bool included = true;
            for (std::size_t k = 0; k < docs.size() && included; ++k)
                if (member[j][k] && !member[i][k]) included = false;
            FormulaPtr goal = fm::conj({compile_type(binarize(parse_internal(corpus[j])), fm::top(), fm::bottom(),
                                               CompileOptions{false, "n"}),
                                  fm::lnot(compile_type(binarize(parse_internal(corpus[i])), fm::top(),
                                                        fm::bottom(), CompileOptions{false, "o"})),
                                  parse_formula("~<-1>T & ~<-2>T")});
            SatResult r = satisfiable(resolve_placeholders(goal));
            INFO("old " << corpus[i] << " new " << corpus[j]);
            if (!included) CHECK(r.sat);
            if (r.sat) {
                Element w = from_binary(r.witness);
                CHECK(validate(w, parse_internal(corpus[j]), false).ok);
                CHECK_FALSE(validate(w, parse_internal(corpus[i]), false).ok);
            }
        }
    CHECK(pairs >= 10);
}

TEST_CASE("expansion is deterministic and leaves no calls") {
    const char* text =
        "twice(x) = x & <1>x;\n"
        "twice(a) | select(\"a//b[ancestor::c]\", type(\"g1.txt\", \"a\")) & exclude(c) & exists(\"child::b\")";
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "treesat-purity";
    fs::create_directories(dir);
    std::ofstream(dir / "g1.txt") << "let x = b{x} | c{()}, x | () in a{x}";
    ProblemSpec spec = parse_spec(text);
    Environment env(dir.string());
    FormulaPtr once = expand(spec, env);
    FormulaPtr twice = expand(spec, env);
    CHECK_FALSE(contains_calls(once));
    CHECK(to_string(once) == to_string(twice));
    Environment fresh(dir.string());
    CHECK(to_string(expand(spec, fresh)) == to_string(once));
}

TEST_CASE("new_element_names targets carry names outside the old type") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "treesat-newnames";
    fs::create_directories(dir);
    std::ofstream(dir / "old.txt") << "let x = b{()}, x | () in a{x}";
    std::ofstream(dir / "new.txt") << "let x = b{()}, x | c{d{()}}, x | () in a{x}";
    for (const char* q : {"child::*", "descendant::*", "/a/*", "//*"}) {
        Environment env(dir.string());
        ProblemSpec spec = parse_spec(std::string("new_element_names(\"") + q + "\", \"old.txt\", \"new.txt\", \"a\")");
        FormulaPtr f = resolve_placeholders(expand(spec, env));
        SatResult r = satisfiable(f);
        std::string query = q;
        INFO(query);
        REQUIRE(r.sat);
        std::string target = r.witness.nodes[r.target].name;
        CHECK(element_names(parse_internal("let x = b{()}, x | () in a{x}")).count(target) == 0);
    }
}

TEST_CASE("runs are reproducible") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "treesat-determinism";
    fs::create_directories(dir);
    std::ofstream(dir / "old.txt") << "let x = b{()}, x | () in a{x}";
    std::ofstream(dir / "new.txt") << "let x = b{()}, x | c{()}, x | () in a{x}";
    RunConfig c;
    c.spec_path = (dir / "spec").string();
    c.spec_text = "backward_incompatible(\"old.txt\", \"new.txt\", \"a\")";
    RunReport r1 = run(c), r2 = run(c);
    REQUIRE(r1.sat);
    CHECK(r1.witness_xml == r2.witness_xml);
    CHECK(render(r1, OutputFormat::xml) == render(r2, OutputFormat::xml));
    CHECK(names_of(r1.witness[0]).count("c") == 1);
}
