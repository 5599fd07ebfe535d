#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vultriage::graphs {

enum class Label { Vulnerable, Benign };

struct SourceFunction {
    std::string id;
    std::string language = "c";
    std::string code;
    std::optional<Label> label;
};

// Lowered grammar node kinds. The last group are type-expansion kinds that
// carry no behaviour and are treated as noise by every filter level.
enum class AstKind {
    FunctionDef,
    ParamList,
    Declaration,
    DeclGroup,
    Assignment,
    Branch, // if, switch
    Loop,   // while, for, do-while, iterator macros
    Call,
    Return,
    Operator,
    Identifier,
    Constant,
    Compound,
    Jump, // break, continue, goto
    Label,
    Case,
    InitList,
    TypeDecl,
    PtrDecl,
    ArrayDecl,
    FuncDecl,
    IdentifierType,
    Typename,
};

// Position of a child inside its parent, where the grammar gives it a role.
enum class Role {
    None,
    Cond,
    Then,
    Else,
    Body,
    Init,
    Step,
    Value,
    Callee,
    Arg,
    Type,
    Lhs,
    Rhs,
};

struct AstNode {
    AstKind kind = AstKind::Compound;
    Role role = Role::None;
    std::string name; // identifier, operator symbol, keyword, or callee text
    std::string text; // whitespace-collapsed source text of the node
    int line = 0;
    int column = 0;
    bool has_initializer = false; // Declaration only
    std::vector<AstNode> children;

    const AstNode* child(Role r) const;
};

const char* kind_name(AstKind kind);

bool is_type_expansion(AstKind kind);

// Preorder visit; the callback returns false to skip a subtree.
void visit_preorder(const AstNode& node, const std::function<bool(const AstNode&)>& fn);

std::size_t count_nodes(const AstNode& node);

struct CategoryCounts {
    int declarations = 0;
    int assignments = 0;
    int branches = 0;
    int calls = 0;

    friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

// Counting rules, fixed for the whole project:
//   * a non-empty parameter list is one declaration aggregate;
//   * every other declarator is one declaration, and one assignment as well
//     when it carries an initializer;
//   * every assignment expression (=, +=, ...) is one assignment;
//   * if/switch/loop headers are branches;
//   * every call expression is a call.
CategoryCounts count_ast_categories(const AstNode& function_root);

} // namespace vultriage::graphs
