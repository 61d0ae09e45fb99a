#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "treesat/document.hpp"
#include "treesat/errors.hpp"
#include "treesat/formula.hpp"

namespace treesat {

enum class OutputFormat { human, xml, json };

struct RunConfig {
    std::string spec_path;
    std::string spec_text;  // used instead of reading spec_path when non-empty
    bool attributes = false;
    std::size_t budget = std::size_t(1) << 22;
    OutputFormat format = OutputFormat::human;
    std::string schema_dir;  // empty: the spec file's directory; subdirectories are searched too
};

// Witness checked against one schema mentioned by the spec.
struct Diagnostic {
    std::string schema;  // file name as resolved
    std::string root;
    bool valid = true;
    int node = -1;  // preorder index of the offending element
    std::string message;
};

struct RunReport {
    bool sat = false;
    Forest witness;  // empty when unsat
    BinaryTree binary_witness;
    int binary_target = -1;
    FormulaPtr formula;  // the solved formula, after normalization
    Annotation annotation;
    std::string witness_xml;
    std::vector<Diagnostic> diagnostics;
    std::vector<std::pair<std::string, double>> timings;  // phase, seconds
    std::size_t formula_size = 0;
    std::size_t lean_size = 0;
    std::size_t types = 0;
    int rounds = 0;
};

// Failure in one pipeline phase. `budget` is set when the solver ran out of
// its node-type budget, in which case the verdict is unknown.
class RunError : public Error {
public:
    RunError(std::string phase, const std::string& what, bool budget = false)
        : Error(phase + ": " + what), phase_(std::move(phase)), budget_(budget) {}
    const std::string& phase() const { return phase_; }
    bool budget() const { return budget_; }

private:
    std::string phase_;
    bool budget_;
};

// parse -> expand -> resolve placeholders -> normalize -> cycle check ->
// solve -> witness, annotation and validation against every schema used.
// Throws RunError.
RunReport run(const RunConfig& config);

std::string render(const RunReport& report, OutputFormat format);

// 0 unsatisfiable, 1 satisfiable.
inline int exit_code(const RunReport& r) { return r.sat ? 1 : 0; }

}  // namespace treesat
