#include "graphs/ast.hpp"

namespace vultriage::graphs {

const AstNode* AstNode::child(Role r) const
{
    for (const auto& c : children)
        if (c.role == r)
            return &c;
    return nullptr;
}

const char* kind_name(AstKind kind)
{
    switch (kind) {
    case AstKind::FunctionDef: return "function-def";
    case AstKind::ParamList: return "param-list";
    case AstKind::Declaration: return "decl";
    case AstKind::DeclGroup: return "decl-group";
    case AstKind::Assignment: return "assignment";
    case AstKind::Branch: return "branch";
    case AstKind::Loop: return "loop";
    case AstKind::Call: return "call";
    case AstKind::Return: return "return";
    case AstKind::Operator: return "operator";
    case AstKind::Identifier: return "identifier";
    case AstKind::Constant: return "constant";
    case AstKind::Compound: return "compound";
    case AstKind::Jump: return "jump";
    case AstKind::Label: return "label";
    case AstKind::Case: return "case";
    case AstKind::InitList: return "init-list";
    case AstKind::TypeDecl: return "TypeDecl";
    case AstKind::PtrDecl: return "PtrDecl";
    case AstKind::ArrayDecl: return "ArrayDecl";
    case AstKind::FuncDecl: return "FuncDecl";
    case AstKind::IdentifierType: return "IdentifierType";
    case AstKind::Typename: return "Typename";
    }
    return "?";
}

bool is_type_expansion(AstKind kind)
{
    switch (kind) {
    case AstKind::TypeDecl:
    case AstKind::PtrDecl:
    case AstKind::ArrayDecl:
    case AstKind::FuncDecl:
    case AstKind::IdentifierType:
    case AstKind::Typename:
        return true;
    default:
        return false;
    }
}

void visit_preorder(const AstNode& node, const std::function<bool(const AstNode&)>& fn)
{
    if (!fn(node))
        return;
    for (const auto& c : node.children)
        visit_preorder(c, fn);
}

std::size_t count_nodes(const AstNode& node)
{
    std::size_t n = 0;
    visit_preorder(node, [&](const AstNode&) {
        ++n;
        return true;
    });
    return n;
}

CategoryCounts count_ast_categories(const AstNode& function_root)
{
    CategoryCounts counts;
    visit_preorder(function_root, [&](const AstNode& n) {
        switch (n.kind) {
        case AstKind::ParamList: {
            bool any = false;
            for (const auto& c : n.children)
                any = any || c.kind == AstKind::Declaration;
            if (any)
                ++counts.declarations;
            return false; // parameters are already covered by the aggregate
        }
        case AstKind::Declaration:
            ++counts.declarations;
            if (n.has_initializer)
                ++counts.assignments;
            break;
        case AstKind::Assignment:
            ++counts.assignments;
            break;
        case AstKind::Branch:
        case AstKind::Loop:
            ++counts.branches;
            break;
        case AstKind::Call:
            ++counts.calls;
            break;
        default:
            break;
        }
        return true;
    });
    return counts;
}

} // namespace vultriage::graphs
