#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "treesat/binary_tree.hpp"

namespace treesat {

// Unranked element tree. Attribute values are carried for output only; the
// logic sees attribute names.
struct Element {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<Element> children;
    std::set<std::string> props;  // propositions from a solver witness
};

using Forest = std::vector<Element>;

// Same names, same attribute names, same children, in order. Values and
// propositions are ignored.
bool same_structure(const Element& a, const Element& b);
bool same_structure(const Forest& a, const Forest& b);

std::size_t element_count(const Element& e);

// Nodes are numbered in document order, so index i of the result is the i-th
// element in preorder.
BinaryTree to_binary(const Element& root);
BinaryTree to_binary(const Forest& roots);

// Throws ForestError when the binary root has a next sibling.
Element from_binary(const BinaryTree& t);
Forest forest_from_binary(const BinaryTree& t);

// Preorder indices of the context and target nodes, -1 when absent.
struct Annotation {
    int context = -1;
    int target = -1;
};

inline constexpr const char* solver_namespace = "http://wam.inrialpes.fr/xml";

// Pretty-printed with two-space indentation. Attribute values are the empty
// string, or "_otherV" on a node carrying that proposition.
std::string serialize(const Forest& roots, const Annotation& ann = {});
std::string serialize(const Element& root, const Annotation& ann = {});

// Element/attribute subset of XML. Declarations, comments, processing
// instructions and DOCTYPE are skipped; character data is dropped and
// reported through warnings when non-blank.
Forest parse_xml(const std::string& text, std::vector<std::string>* warnings = nullptr);

// Annotation for a solver witness: the target is the marked node, the
// context is the first node in document order carrying '#' (only when
// with_context is set).
Annotation annotate(const BinaryTree& witness, int target, bool with_context);

}  // namespace treesat
