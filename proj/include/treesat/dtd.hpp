#pragma once

#include <map>
#include <string>
#include <vector>

#include "treesat/tree_type.hpp"

namespace treesat {

struct DtdInfo {
    std::size_t elements = 0;    // declared element types
    std::size_t attributes = 0;  // distinct attribute names over all ATTLISTs, xmlns and xmlns:* excluded
    std::vector<std::string> undeclared;  // referenced in content models, never declared
    std::vector<std::string> warnings;
};

// Reads a DTD and returns the tree type rooted at `root`. Namespace
// declarations (xmlns, xmlns:*) in ATTLISTs are dropped. Parameter entities
// (internal and external, resolved relative to the declaring file, falling
// back to the DTD's own directory) and INCLUDE/IGNORE sections are expanded.
// Throws ParseError, UnknownRoot, UnknownSchemaFile.
TypePtr parse_dtd(const std::string& path, const std::string& root, DtdInfo* info = nullptr);

// Same, from text; `base_dir` resolves external entities.
TypePtr parse_dtd_text(const std::string& text, const std::string& root, const std::string& base_dir = ".",
                       DtdInfo* info = nullptr);

}  // namespace treesat
