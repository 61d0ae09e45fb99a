#include "treesat/binary_tree.hpp"

namespace treesat {

int BinaryTree::add(std::string name) {
    BinaryNode n;
    n.name = std::move(name);
    nodes.push_back(std::move(n));
    int id = static_cast<int>(nodes.size()) - 1;
    if (root < 0) root = id;
    return id;
}

void BinaryTree::set_child1(int parent, int child) {
    nodes[parent].child1 = child;
    if (child >= 0) nodes[child].parent = parent;
}

void BinaryTree::set_child2(int parent, int child) {
    nodes[parent].child2 = child;
    if (child >= 0) nodes[child].parent = parent;
}

bool BinaryTree::is_child1(int n) const {
    int p = nodes[n].parent;
    return p >= 0 && nodes[p].child1 == n;
}

bool BinaryTree::is_child2(int n) const {
    int p = nodes[n].parent;
    return p >= 0 && nodes[p].child2 == n;
}

std::vector<int> BinaryTree::preorder() const {
    std::vector<int> out;
    if (root < 0) return out;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int n = stack.back();
        stack.pop_back();
        out.push_back(n);
        if (nodes[n].child2 >= 0) stack.push_back(nodes[n].child2);
        if (nodes[n].child1 >= 0) stack.push_back(nodes[n].child1);
    }
    return out;
}

}  // namespace treesat
