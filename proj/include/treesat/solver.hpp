#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "treesat/binary_tree.hpp"
#include "treesat/formula.hpp"

namespace treesat {

struct SolverOptions {
    // Maximum number of admitted node types before giving up.
    std::size_t budget = std::size_t(1) << 22;
    // Re-check every witness with the model checker (throws std::logic_error
    // on disagreement).
    bool verify = true;
};

struct SatResult {
    bool sat = false;
    BinaryTree witness;     // empty when unsat
    int target = -1;        // witness node where the formula holds
    std::size_t types = 0;  // admitted node types
    int rounds = 0;         // saturation rounds performed
    std::size_t lean_size = 0;
};

// Atoms and modal subformulas the saturation works over, after negation
// normal form. Probes <p>T are present for all four programs.
struct Lean {
    std::vector<std::string> names;  // element names, plus one name standing for all others
    std::vector<std::string> props;
    std::vector<std::string> attributes;
    std::vector<std::string> modalities;  // "<p>" + body, bodies printed as DAG ids
    std::size_t size() const { return names.size() + props.size() + attributes.size() + modalities.size(); }
};

Lean compute_lean(const FormulaPtr& f);

// Decides whether f holds at some node of some finite binary tree. Throws
// CycleError, ResourceLimit, or UnresolvedPlaceholder.
SatResult satisfiable(const FormulaPtr& f, const SolverOptions& opts = {});

}  // namespace treesat
