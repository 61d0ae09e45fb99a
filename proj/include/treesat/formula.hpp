#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace treesat {

// Navigation programs: child1 = first child, child2 = next sibling, and
// their converses.
enum class Program { child1, child2, parent1, parent2 };

Program converse(Program p);
bool is_downward(Program p);
std::string to_string(Program p);  // "1", "2", "-1", "-2"

enum class FormulaKind {
    True,
    False,
    Name,       // element name
    Prop,       // atomic proposition, starts with '_'
    Start,      // '#'
    Or,
    And,
    Implies,
    Equiv,
    Not,
    Modality,   // <p>f
    Attribute,  // <l>T
    Variable,
    Let,
    Call,       // predicate call, expanded before solving
    String,     // string literal, only valid as a call argument
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Binding {
    std::string var;
    FormulaPtr body;
};

class Formula {
public:
    FormulaKind kind;
    std::string name;  // Name, Prop, Attribute, Variable, Call, String
    Program program = Program::child1;
    std::vector<FormulaPtr> kids;  // operands; Let body is kids[0]; Call args
    std::vector<Binding> bindings;

    explicit Formula(FormulaKind k) : kind(k) {}
};

namespace fm {
FormulaPtr top();
FormulaPtr bottom();
FormulaPtr name(const std::string& n);
FormulaPtr prop(const std::string& n);
FormulaPtr start();
FormulaPtr lor(FormulaPtr a, FormulaPtr b);
FormulaPtr land(FormulaPtr a, FormulaPtr b);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr equiv(FormulaPtr a, FormulaPtr b);
FormulaPtr lnot(FormulaPtr a);
FormulaPtr modal(Program p, FormulaPtr a);
FormulaPtr attr(const std::string& n);
FormulaPtr var(const std::string& n);
FormulaPtr let(std::vector<Binding> bindings, FormulaPtr body);
FormulaPtr call(const std::string& n, std::vector<FormulaPtr> args);
FormulaPtr str(const std::string& s);

// Folding constructors: drop neutral elements, short-circuit absorbing ones.
FormulaPtr conj(const std::vector<FormulaPtr>& parts);
FormulaPtr disj(const std::vector<FormulaPtr>& parts);
}  // namespace fm

// Concrete syntax, parenthesized only where precedence requires it.
std::string to_string(const FormulaPtr& f);

// Parses the concrete formula syntax. Predicate calls and string literals are
// accepted when allow_calls is set.
FormulaPtr parse_formula(const std::string& text, bool allow_calls = false);

std::size_t formula_size(const FormulaPtr& f);

std::set<std::string> element_names_in(const FormulaPtr& f);
std::set<std::string> attribute_names_in(const FormulaPtr& f);
std::set<std::string> propositions_in(const FormulaPtr& f);
bool contains_start(const FormulaPtr& f);
bool contains_calls(const FormulaPtr& f);

// Free variables (not bound by an enclosing let).
std::set<std::string> free_variables(const FormulaPtr& f);

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b);

}  // namespace treesat
