#pragma once

#include "treesat/binary_tree.hpp"
#include "treesat/formula.hpp"

namespace treesat {

// Negation normal form. Implies/Equiv are eliminated, negation is pushed to
// atoms, and ~<p>f becomes ~<p>T | <p>~f. Negated recursion is handled by
// introducing a dual variable for every binding whose negation is needed.
FormulaPtr normalize(const FormulaPtr& f);

// Throws CycleError unless every recursive use of a variable is guarded by a
// modality and no recursion path mixes a program with its converse.
void check_cycle_free(const FormulaPtr& f);

// Evaluates f at node n of t. Recursion is computed by iteration to the
// (unique, for cycle-free f) fixpoint.
bool check_model(const FormulaPtr& f, const BinaryTree& t, int n);

// Set of nodes of t satisfying f.
std::vector<bool> models(const FormulaPtr& f, const BinaryTree& t);

}  // namespace treesat
