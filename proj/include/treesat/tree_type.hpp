#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace treesat {

struct AttrItem {
    enum class Kind { Optional, Required, Prohibited };
    Kind kind;
    std::string name;

    bool operator==(const AttrItem&) const = default;
};

using AttrList = std::vector<AttrItem>;

// list1 | list2 | ... | (); an empty expression allows no attribute at all.
// The trailing () of a non-empty expression adds no alternative.
struct AttrExpr {
    std::vector<AttrList> alternatives;

    bool empty() const { return alternatives.empty(); }
    bool operator==(const AttrExpr&) const = default;
};

enum class TypeKind { EmptySet, EmptySeq, Or, Concat, Element, Var, Bind };

struct TreeType;
using TypePtr = std::shared_ptr<const TreeType>;

struct TypeBinding {
    std::string var;
    TypePtr body;
};

struct TreeType {
    TypeKind kind;
    std::string name;  // Element name or Var name
    AttrExpr attrs;    // Element
    std::vector<TypePtr> kids;  // Or/Concat operands, Element content, Bind body
    std::vector<TypeBinding> bindings;

    explicit TreeType(TypeKind k) : kind(k) {}
};

namespace tt {
TypePtr none();
TypePtr empty();
TypePtr alt(TypePtr a, TypePtr b);
TypePtr seq(TypePtr a, TypePtr b);
TypePtr element(const std::string& name, AttrExpr attrs, TypePtr content);
TypePtr var(const std::string& name);
TypePtr bind(std::vector<TypeBinding> bindings, TypePtr body);
}  // namespace tt

// Textual grammar:
//   T ::= () | none | T '|' T | T ',' T | l{T} | l[attrs]{T} | x
//       | let x = T ; y = T in T | (T)
//   attrs ::= list ('|' list)*     list ::= item (',' item)*
//   item ::= l? | l | ~l
// ',' binds tighter than '|'. Unguarded recursive variables must be in tail
// position.
TypePtr parse_internal(const std::string& text);
std::string to_string(const TypePtr& t);
std::string to_string(const AttrExpr& a);

// Names appearing anywhere in the expression, bound or not.
std::set<std::string> element_names(const TypePtr& t);
std::set<std::string> attribute_names(const TypePtr& t);

std::set<std::string> added_element(const TypePtr& before, const TypePtr& after);
std::set<std::string> added_attribute(const TypePtr& before, const TypePtr& after);

}  // namespace treesat
