#pragma once

#include "graphs/ast.hpp"

#include <string_view>
#include <vector>

namespace vultriage::graphs::c {

// Parses every function definition found in `src` into a lowered AST rooted
// at a FunctionDef node. Global declarations, prototypes and typedefs are
// consumed (typedef names are remembered) but produce no trees.
// Throws SyntaxError on input the grammar rejects.
std::vector<AstNode> parse_functions(std::string_view src);

} // namespace vultriage::graphs::c
