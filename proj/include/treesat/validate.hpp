#pragma once

#include <string>

#include "treesat/document.hpp"
#include "treesat/tree_type.hpp"

namespace treesat {

struct Validation {
    bool ok = true;
    int node = -1;  // preorder index of the offending element
    std::string message;
};

// Membership of a document in the language of a tree type, checked top-down
// on the unranked document. On failure, reports the first violation in
// document order.
Validation validate(const Element& doc, const TypePtr& t, bool check_attributes = true);

// Attribute names present on an element against one attribute expression.
bool attributes_match(const std::set<std::string>& present, const AttrExpr& a);

}  // namespace treesat
