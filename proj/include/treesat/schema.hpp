#pragma once

#include <set>
#include <string>
#include <vector>

#include "treesat/formula.hpp"
#include "treesat/tree_type.hpp"

namespace treesat {

// Two-variable normal form over first-child/next-sibling trees. Variable i
// stands for a remaining sibling sequence; its language is the binary
// encoding of the hedges that sequence admits.
struct BinaryDef {
    std::string name;
    AttrExpr attrs;
    int first;  // variable for the children
    int next;   // variable for the following siblings
};

struct BinaryVar {
    std::vector<BinaryDef> defs;
    bool nullable = false;  // admits the empty hedge
};

struct BinaryTreeType {
    std::vector<BinaryVar> vars;
    int start = 0;

    // No def and not nullable: the variable denotes the empty set.
    bool is_empty_set(int x) const { return vars[x].defs.empty() && !vars[x].nullable; }
};

// Unproductive definitions are dropped. Throws Error on an unbound variable.
BinaryTreeType binarize(const TypePtr& t);

bool nullable(const BinaryTreeType& b, int x);

std::string to_string(const BinaryTreeType& b);

struct CompileOptions {
    bool attributes = true;
    std::string var_prefix = "t";  // distinct per type in one formula
};

// let $x_i = OR(l & tag & A(attrs) & succ(first,1) & succ(next,2)) | frontier
// in $x_start. Attribute constraints carry __absent placeholders until
// resolve_placeholders runs.
FormulaPtr compile_type(const BinaryTreeType& b, const FormulaPtr& tag, const FormulaPtr& frontier,
                        const CompileOptions& opts = {});

FormulaPtr compile_attr(const AttrExpr& a);

// Attribute names of f, including those only mentioned by placeholders.
std::set<std::string> attribute_universe(const FormulaPtr& f);

// Replaces every __absent(l1,...,ln) by the conjunction of ~<u>T over the
// universe names u not among the li.
FormulaPtr resolve_placeholders(const FormulaPtr& f, const std::set<std::string>& universe);
FormulaPtr resolve_placeholders(const FormulaPtr& f);

inline constexpr const char* absent_placeholder = "__absent";

}  // namespace treesat
