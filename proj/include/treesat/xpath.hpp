#pragma once

#include <memory>
#include <set>
#include <string>

#include "treesat/document.hpp"
#include "treesat/formula.hpp"

namespace treesat::xpath {

enum class Axis {
    self,
    child,
    parent,
    descendant,
    ancestor,
    descendant_or_self,
    ancestor_or_self,
    following_sibling,
    preceding_sibling,
    following,
    preceding,
};

std::string to_string(Axis a);
Axis converse(Axis a);

struct Path;
struct Qualifier;
struct Query;
using PathPtr = std::shared_ptr<const Path>;
using QualPtr = std::shared_ptr<const Qualifier>;
using QueryPtr = std::shared_ptr<const Query>;

struct Path {
    enum class Kind { Step, Compose, Qualified };
    Kind kind = Kind::Step;
    Axis axis = Axis::child;
    std::string test = "*";  // element name, "*", or "node()" (from //, also matches the document node)
    PathPtr left, right;     // Compose: left/right; Qualified: left
    QualPtr qualifier;
};

struct Qualifier {
    // Position and Count only occur before desugaring.
    enum class Kind { And, Or, Not, Path, AttrPath, AttrStep, Position, Count };
    Kind kind = Kind::Path;
    QualPtr a, b;
    PathPtr path;
    std::string attribute;
    int k = 0;          // Position: k (0 = last()); Count: compared value
    char op = '=';      // Count: '=' or '>'
};

struct Query {
    enum class Kind { Absolute, Relative, Union, Intersection };
    Kind kind = Kind::Relative;
    PathPtr path;
    QueryPtr a, b;
};

// Abbreviations (//, @, ., .., *, [k], implicit child) are expanded while
// parsing. Throws ParseError.
QueryPtr parse(const std::string& text);

// Rewrites position()/last()/count() qualifiers into the core fragment.
// Throws UnsupportedSugar for shapes without a rewriting.
QueryPtr desugar(const QueryPtr& q);

// Unabbreviated syntax, re-parseable.
std::string to_string(const QueryPtr& q);
std::string to_string(const PathPtr& p);
std::string to_string(const QualPtr& q);

// Supplies recursion variable names that do not clash within one formula.
class FreshNames {
public:
    explicit FreshNames(std::string prefix = "x") : prefix_(std::move(prefix)) {}
    std::string next() { return prefix_ + std::to_string(++count_); }

private:
    std::string prefix_;
    int count_ = 0;
};

// Holds at n iff some node on `axis` from n satisfies psi.
FormulaPtr axis_exists(Axis axis, const FormulaPtr& psi, FreshNames& names);

// Holds at the nodes selected by q from a context node satisfying ctx.
// Absolute paths start from the document root; ctx then only requires that
// some node of the tree satisfies it. With attributes off, attribute tests
// compile to T. Throws UnsupportedSugar if q still contains sugar,
// UnsupportedQuery for "/" alone.
FormulaPtr compile_select(const QueryPtr& q, const FormulaPtr& ctx, FreshNames& names, bool attributes = true);
FormulaPtr compile_select(const QueryPtr& q, const FormulaPtr& ctx);

// Holds at the context nodes (satisfying ctx) from which q selects something.
// Throws UnsupportedQuery for intersections.
FormulaPtr compile_exists(const QueryPtr& q, const FormulaPtr& ctx, FreshNames& names, bool attributes = true);
FormulaPtr compile_exists(const QueryPtr& q, const FormulaPtr& ctx);

// Direct evaluation on a forest. Nodes are preorder indices; the result is
// the set of nodes selected from any of the context nodes. Position and
// count qualifiers are evaluated with their XPath meaning.
std::set<int> eval_oracle(const QueryPtr& q, const Forest& doc, const std::set<int>& context);

}  // namespace treesat::xpath
