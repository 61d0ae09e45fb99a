#pragma once

#include <set>
#include <string>
#include <vector>

namespace treesat {

// First-child/next-sibling encoding of a forest. Nodes live in a flat vector;
// -1 marks an absent link. The root is never anybody's successor.
struct BinaryNode {
    std::string name;
    std::set<std::string> props;  // atomic propositions, '#' included
    std::set<std::string> attrs;
    int child1 = -1;
    int child2 = -1;
    int parent = -1;  // binary parent, reached by -1 or -2
};

struct BinaryTree {
    std::vector<BinaryNode> nodes;
    int root = -1;

    int add(std::string name);
    void set_child1(int parent, int child);
    void set_child2(int parent, int child);

    bool empty() const { return nodes.empty(); }
    std::size_t size() const { return nodes.size(); }

    // True when n is reached from its parent through program 1 (resp. 2).
    bool is_child1(int n) const;
    bool is_child2(int n) const;

    // Node indices in preorder (node, child1 subtree, child2 subtree). This
    // coincides with document order of the decoded forest.
    std::vector<int> preorder() const;
};

}  // namespace treesat
