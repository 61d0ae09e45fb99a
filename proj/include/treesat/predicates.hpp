#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "treesat/dtd.hpp"
#include "treesat/formula.hpp"
#include "treesat/schema.hpp"
#include "treesat/tree_type.hpp"
#include "treesat/xpath.hpp"

namespace treesat {

// name(p1, ..., pn) = body
struct Definition {
    std::string name;
    std::vector<std::string> params;
    FormulaPtr body;
};

struct ProblemSpec {
    std::vector<Definition> defs;
    FormulaPtr goal;
};

// Definitions separated by ';', then the goal formula. '//' starts a comment
// running to the end of the line (outside string literals). Every call must
// name a built-in or a definition with a matching number of arguments, and
// definitions may not be recursive.
// Throws ParseError, ArityError, UnknownPredicate.
ProblemSpec parse_spec(const std::string& text);

bool is_builtin(const std::string& name);

// Tag propositions reserved for the evolution predicates.
inline constexpr const char* tag_all = "_all";
inline constexpr const char* tag_old_complement = "_old_complement";

struct Schema {
    std::string path;  // as resolved on disk
    std::string root;
    TypePtr type;
    BinaryTreeType binary;
    DtdInfo info;  // counts stay zero for internal-grammar files
};

class Environment {
public:
    explicit Environment(std::string schema_dir = ".", bool attributes = false);

    bool attributes() const { return attributes_; }

    // Parsed once per (file, root). Files ending in .dtd are read as DTDs,
    // anything else with the internal tree-type grammar.
    // Throws UnknownSchemaFile, UnknownRoot, ParseError.
    const Schema& schema(const std::string& file, const std::string& root);

    // Schemas in first-use order.
    const std::vector<const Schema*>& used() const { return used_; }

    // Compilation of a schema with the given tag and frontier; each call gets
    // its own recursion-variable prefix.
    FormulaPtr type_formula(const Schema& s, const FormulaPtr& tag, const FormulaPtr& frontier);

    xpath::FreshNames& names() { return names_; }

    // Restarts variable numbering so that expansion is reproducible.
    void reset_names();

private:
    std::string dir_;
    bool attributes_;
    std::map<std::pair<std::string, std::string>, std::unique_ptr<Schema>> cache_;
    std::vector<const Schema*> used_;
    xpath::FreshNames names_;
    int types_ = 0;
};

// Holds at n iff some node in the named region of n satisfies phi. Regions:
// ancestor, descendant, following, preceding, ancestor-or-self,
// descendant-or-self (unranked tree axes).
FormulaPtr axis_formula(const std::string& axis, const FormulaPtr& phi, xpath::FreshNames& names);

// Replaces every predicate call by its logical definition. The result has no
// calls or string literals; attribute placeholders are left for
// resolve_placeholders.
FormulaPtr expand(const ProblemSpec& spec, Environment& env);

}  // namespace treesat
