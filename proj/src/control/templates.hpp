#pragma once

#include <map>
#include <string>
#include <string_view>

namespace vultriage::control::templates {

// AST view
inline constexpr std::string_view kAstSummary =
    "Function <name>@L<line>: <nd> declarations, <na> assignments, <nb> branches, <nc> calls.";
inline constexpr std::string_view kKeyCalls = "Key call chain: <calls>.";
inline constexpr std::string_view kConditions = "Conditions/Loops: <stmts>.";
inline constexpr std::string_view kReturns = "Returns: <exprs>.";
inline constexpr std::string_view kIsomorphic =
    "Isomorphic functions collapsed: <rep> represents <n> functions.";

// CFG view
inline constexpr std::string_view kCfgSummary =
    "Function <name>: retained control points <k>/<n>; branches <nb>; calls <nc>.";
inline constexpr std::string_view kBranchListing = "Branch/Loop nodes: <items>.";
inline constexpr std::string_view kPath = "Path <i>: <steps>.";

// DFG view
inline constexpr std::string_view kDfgSummary =
    "Function <name>: edges retained <k>/<n>; parameter sources <np>; chains <nc>.";
inline constexpr std::string_view kParamListing = "Parameter sources: <items>.";
inline constexpr std::string_view kDataChain = "Data chain: <steps>.";

inline constexpr std::string_view kArrow = " → ";
inline constexpr std::string_view kEllipsis = "…";

// Fills every <key> in one pass. Throws MissingPlaceholder when a key has no value.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

} // namespace vultriage::control::templates
