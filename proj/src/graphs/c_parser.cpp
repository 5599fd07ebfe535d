// Recursive-descent parser for the C function subset found in real-world
// vulnerability datasets. It resolves the usual typedef ambiguity with a
// symbol set (declared typedefs, well-known library typedefs, *_t names) plus
// local lookahead, and lowers the concrete syntax directly to AstNode.

#include "graphs/c_parser.hpp"

#include "common/error.hpp"
#include "common/text.hpp"
#include "graphs/c_lexer.hpp"

#include <set>
#include <string>
#include <unordered_set>

namespace vultriage::graphs::c {

namespace {

const std::unordered_set<std::string_view> kTypeKeywords = {
    "void",  "char",   "short",   "int",      "long",     "float",   "double", "signed",
    "unsigned", "_Bool", "_Complex", "__int128", "__signed__", "__unsigned__",
};

const std::unordered_set<std::string_view> kQualifierKeywords = {
    "const",     "volatile",   "restrict", "__restrict", "__restrict__", "static",
    "extern",    "register",   "auto",     "inline",     "__inline",     "__inline__",
    "_Noreturn", "__extension__", "_Thread_local", "__thread", "__const", "__volatile__",
};

const std::unordered_set<std::string_view> kKnownTypedefs = {
    "bool",     "BOOL",    "FILE",     "DIR",      "va_list",  "BYTE",     "WORD",    "DWORD",
    "QWORD",    "UINT",    "ULONG",    "LONG",     "INT",      "CHAR",     "UCHAR",   "USHORT",
    "HANDLE",   "LPVOID",  "LPSTR",    "LPCSTR",   "SOCKET",   "u8",       "u16",     "u32",
    "u64",      "s8",      "s16",      "s32",      "s64",      "__u8",     "__u16",   "__u32",
    "__u64",    "__s8",    "__s16",    "__s32",    "__s64",    "__le16",   "__le32",  "__le64",
    "__be16",   "__be32",  "__be64",   "gboolean", "gint",     "guint",    "gchar",   "guchar",
    "gsize",    "gssize",  "gpointer", "gconstpointer", "guint8", "guint16", "guint32", "guint64",
    "gint8",    "gint16",  "gint32",   "gint64",   "uchar",    "ushort",   "uint",    "ulong",
    "jmp_buf",  "fd_set",  "sigset_t",
};

const std::unordered_set<std::string_view> kMacroQualifiers = {
    "UNUSED", "unused", "noinline", "asmlinkage", "notrace", "likely_attr", "EFIAPI", "WINAPI",
    "CALLBACK", "STDCALL", "APIENTRY",
};

bool is_double_underscore_word(std::string_view s)
{
    return s.size() > 2 && s[0] == '_' && s[1] == '_' && s != "__func__" && s != "__FUNCTION__" &&
           s != "__LINE__" && s != "__FILE__" && s != "__PRETTY_FUNCTION__";
}

bool ends_with_t(std::string_view s)
{
    return s.size() > 2 && s.substr(s.size() - 2) == "_t";
}

struct Declarator {
    std::string name;
    int name_line = 0;
    int name_column = 0;
    bool is_function = false;
    AstNode params; // ParamList when is_function
    std::vector<AstNode> type_chain; // outermost first
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src), toks_(tokenize(src)) {}

    std::vector<AstNode> run()
    {
        std::vector<AstNode> out;
        while (!at_end()) {
            if (is(";")) {
                ++pos_;
                continue;
            }
            external_declaration(out);
        }
        return out;
    }

private:
    // ---------------------------------------------------------------- tokens

    const Token& tok(std::size_t ahead = 0) const
    {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at_end() const { return tok().kind == TokKind::End; }
    bool is(std::string_view p, std::size_t ahead = 0) const
    {
        const Token& t = tok(ahead);
        return (t.kind == TokKind::Punct || t.kind == TokKind::Identifier) && t.text == p;
    }
    bool is_ident(std::size_t ahead = 0) const { return tok(ahead).kind == TokKind::Identifier; }

    [[noreturn]] void fail(const std::string& msg) const
    {
        const Token& t = tok();
        std::string near = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
        throw SyntaxError(msg + " near " + near, t.line, t.column);
    }

    void expect(std::string_view p)
    {
        if (!is(p))
            fail("expected '" + std::string(p) + "'");
        ++pos_;
    }

    bool accept(std::string_view p)
    {
        if (is(p)) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string span_text(std::size_t first, std::size_t last_exclusive) const
    {
        if (last_exclusive <= first)
            return {};
        std::size_t b = toks_[first].begin;
        std::size_t e = toks_[last_exclusive - 1].end;
        return text::collapse_whitespace(src_.substr(b, e - b));
    }

    AstNode make(AstKind kind, std::size_t first_tok, std::string name = {}) const
    {
        AstNode n;
        n.kind = kind;
        n.name = std::move(name);
        n.line = toks_[first_tok].line;
        n.column = toks_[first_tok].column;
        n.text = span_text(first_tok, pos_);
        return n;
    }

    void skip_balanced()
    {
        // Current token is an opener; skip through its matching closer.
        std::string open = tok().text;
        std::string close = open == "(" ? ")" : open == "[" ? "]" : "}";
        int depth = 0;
        do {
            if (at_end())
                fail("unbalanced '" + open + "'");
            if (is(open))
                ++depth;
            else if (is(close))
                --depth;
            ++pos_;
        } while (depth > 0);
    }

    // ------------------------------------------------------------ type names

    bool is_typedef_name(std::string_view s) const
    {
        return typedefs_.count(std::string(s)) || kKnownTypedefs.count(s) || ends_with_t(s);
    }

    bool is_specifier_keyword(std::string_view s) const
    {
        return kTypeKeywords.count(s) || kQualifierKeywords.count(s) || s == "struct" || s == "union" ||
               s == "enum" || s == "typedef" || s == "__attribute__" || s == "__declspec";
    }

    bool starts_type_name(std::size_t ahead = 0) const
    {
        const Token& t = tok(ahead);
        if (t.kind != TokKind::Identifier)
            return false;
        if (is_specifier_keyword(t.text))
            return true;
        if (is_typedef_name(t.text))
            return true;
        return false;
    }

    // Statement-level decision between a declaration and an expression.
    bool starts_declaration() const
    {
        if (!is_ident())
            return false;
        const std::string& t = tok().text;
        if (is_specifier_keyword(t))
            return true;
        if (is_double_underscore_word(t) || kMacroQualifiers.count(t))
            return is_ident(1) || is("*", 1);
        if (is_typedef_name(t))
            return is_ident(1) || is("*", 1) || is("(", 1);
        if (is_ident(1) && !is_statement_keyword(tok(1).text))
            return true;
        if (is("*", 1)) {
            std::size_t i = 1;
            while (is("*", i))
                ++i;
            while (is_ident(i) && (tok(i).text == "const" || tok(i).text == "restrict"))
                ++i;
            if (!is_ident(i))
                return false;
            ++i;
            return is("=", i) || is(";", i) || is(",", i) || is("[", i);
        }
        return false;
    }

    static bool is_statement_keyword(std::string_view s)
    {
        return s == "if" || s == "else" || s == "while" || s == "for" || s == "do" || s == "switch" ||
               s == "return" || s == "break" || s == "continue" || s == "goto" || s == "case" ||
               s == "default" || s == "sizeof";
    }

    void skip_attribute()
    {
        ++pos_; // __attribute__ / __declspec / __asm__
        if (is("("))
            skip_balanced();
    }

    // Parses declaration specifiers. Returns the IdentifierType node.
    AstNode specifiers(bool* is_typedef = nullptr)
    {
        std::size_t first = pos_;
        AstNode type = make(AstKind::IdentifierType, pos_);
        std::vector<std::string> words;
        bool seen_type = false;
        for (;;) {
            if (!is_ident())
                break;
            const std::string& t = tok().text;
            if (t == "typedef") {
                if (is_typedef)
                    *is_typedef = true;
                ++pos_;
            } else if (t == "__attribute__" || t == "__declspec" || t == "__asm__" || t == "asm") {
                skip_attribute();
            } else if (kQualifierKeywords.count(t)) {
                ++pos_;
            } else if (kTypeKeywords.count(t)) {
                words.push_back(t);
                seen_type = true;
                ++pos_;
            } else if (t == "struct" || t == "union" || t == "enum") {
                std::string w = t;
                ++pos_;
                while (is("__attribute__"))
                    skip_attribute();
                if (is_ident()) {
                    w += " " + tok().text;
                    ++pos_;
                }
                if (is("{"))
                    skip_balanced();
                words.push_back(w);
                seen_type = true;
            } else if (kMacroQualifiers.count(t) ||
                       (is_double_underscore_word(t) && !is_typedef_name(t))) {
                ++pos_;
                if (is("("))
                    skip_balanced();
            } else if (!seen_type && (is_typedef_name(t) || is_ident(1) || is("*", 1))) {
                // A leading unknown identifier followed by a declarator is a typedef name.
                if (!is_typedef_name(t) && is("*", 1) && !is_ident(2) && !is("*", 2) && !is("(", 2))
                    break;
                words.push_back(t);
                seen_type = true;
                ++pos_;
            } else {
                break;
            }
        }
        if (pos_ == first)
            fail("expected declaration specifiers");
        type.text = text::join(words, " ");
        type.name = type.text;
        return type;
    }

    // ------------------------------------------------------------ declarators

    Declarator declarator(bool allow_abstract)
    {
        Declarator d;
        std::vector<AstNode> pointers;
        while (is("*") || is("^")) {
            pointers.push_back(make(AstKind::PtrDecl, pos_, "*"));
            ++pos_;
            while (is_ident() && (kQualifierKeywords.count(tok().text) ||
                                  is_double_underscore_word(tok().text) ||
                                  kMacroQualifiers.count(tok().text))) {
                if (tok().text == "__attribute__")
                    skip_attribute();
                else
                    ++pos_;
            }
        }
        std::vector<AstNode> inner_chain;
        // A type-like identifier directly followed by a declarator terminator
        // is the declared name, as in typedef struct { ... } point_t;
        bool name_here = is_ident() && (!starts_type_name() || is(";", 1) || is(",", 1) || is("=", 1) ||
                                        is("[", 1) || is(")", 1) || is(":", 1));
        if (name_here) {
            d.name = tok().text;
            d.name_line = tok().line;
            d.name_column = tok().column;
            ++pos_;
        } else if (is("(") && (is("*", 1) || is("^", 1) || (is_ident(1) && !starts_type_name(1)) ||
                               is("(", 1))) {
            ++pos_;
            Declarator nested = declarator(allow_abstract);
            expect(")");
            d.name = nested.name;
            d.name_line = nested.name_line;
            d.name_column = nested.name_column;
            inner_chain = std::move(nested.type_chain);
            // A parenthesised declarator with a function suffix is a pointer
            // to function, never a function definition.
        } else if (!allow_abstract) {
            fail("expected declarator");
        }
        std::vector<AstNode> suffixes;
        bool first_suffix_is_function = false;
        for (;;) {
            if (is("[")) {
                std::size_t first = pos_;
                ++pos_;
                AstNode arr = make(AstKind::ArrayDecl, first, "[]");
                while (is_ident() && (kQualifierKeywords.count(tok().text)))
                    ++pos_;
                if (!is("]")) {
                    AstNode dim = assignment_expr();
                    dim.role = Role::Value;
                    arr.children.push_back(std::move(dim));
                }
                expect("]");
                arr.text = span_text(first, pos_);
                suffixes.push_back(std::move(arr));
            } else if (is("(")) {
                std::size_t first = pos_;
                AstNode params = param_list();
                if (suffixes.empty() && inner_chain.empty()) {
                    first_suffix_is_function = true;
                    d.params = std::move(params);
                }
                AstNode fn = make(AstKind::FuncDecl, first, "()");
                suffixes.push_back(std::move(fn));
            } else {
                break;
            }
        }
        while (is("__attribute__") || is("__asm__") || is("asm"))
            skip_attribute();
        d.is_function = first_suffix_is_function;
        for (auto& n : inner_chain)
            d.type_chain.push_back(std::move(n));
        for (auto& n : suffixes)
            d.type_chain.push_back(std::move(n));
        for (auto it = pointers.rbegin(); it != pointers.rend(); ++it)
            d.type_chain.push_back(std::move(*it));
        return d;
    }

    // Nest the declarator chain: chain[0] is outermost; the innermost node
    // is a TypeDecl naming the declared entity and holding the base type.
    static std::vector<AstNode> build_type_tree(std::vector<AstNode> chain, const std::string& name,
                                                AstNode base, int line, int column)
    {
        AstNode td;
        td.kind = AstKind::TypeDecl;
        td.name = name;
        td.text = base.text;
        td.line = line;
        td.column = column;
        base.role = Role::Type;
        td.children.push_back(std::move(base));
        AstNode cur = std::move(td);
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            AstNode wrap = std::move(*it);
            wrap.role = Role::Type;
            cur.role = Role::Type;
            wrap.children.insert(wrap.children.begin(), std::move(cur));
            cur = std::move(wrap);
        }
        cur.role = Role::Type;
        std::vector<AstNode> out;
        out.push_back(std::move(cur));
        return out;
    }

    AstNode param_list()
    {
        std::size_t first = pos_;
        expect("(");
        AstNode list = make(AstKind::ParamList, first, "params");
        if (is("void") && is(")", 1)) {
            pos_ += 2;
            list.text = span_text(first, pos_);
            return list;
        }
        while (!is(")")) {
            if (accept("...")) {
                continue;
            }
            std::size_t pfirst = pos_;
            if (!is_ident())
                fail("expected parameter declaration");
            AstNode base = specifiers();
            Declarator d = declarator(true);
            AstNode decl = make(AstKind::Declaration, pfirst, d.name);
            decl.line = d.name_line ? d.name_line : toks_[pfirst].line;
            for (auto& t : build_type_tree(std::move(d.type_chain), d.name, std::move(base),
                                           decl.line, toks_[pfirst].column))
                decl.children.push_back(std::move(t));
            list.children.push_back(std::move(decl));
            if (!accept(","))
                break;
        }
        expect(")");
        list.text = span_text(first, pos_);
        return list;
    }

    // ------------------------------------------------------- external decls

    void external_declaration(std::vector<AstNode>& out)
    {
        std::size_t first = pos_;
        // Top-level macro invocations such as EXPORT_SYMBOL(foo); or
        // module_init(fn) carry no definitions.
        if (is_ident() && is("(", 1) && !is_specifier_keyword(tok().text) &&
            !is_typedef_name(tok().text)) {
            std::size_t save = pos_;
            ++pos_;
            skip_balanced();
            if (is(";") || at_end() || (is_ident() && !is("{"))) {
                accept(";");
                return;
            }
            pos_ = save; // K&R-style implicit int definition: foo(a) { ... }
        }
        bool is_typedef = false;
        AstNode base = specifiers(&is_typedef);
        if (accept(";"))
            return; // struct/enum definition or forward declaration
        for (;;) {
            Declarator d = declarator(true);
            if (is_typedef && !d.name.empty())
                typedefs_.insert(d.name);
            if (d.is_function && !is_typedef && (is("{") || starts_kr_params())) {
                skip_kr_params();
                out.push_back(function_definition(first, std::move(base), std::move(d)));
                return;
            }
            if (accept("="))
                initializer();
            if (accept(","))
                continue;
            if (accept(";"))
                return;
            fail("expected ';' after declaration");
        }
    }

    bool starts_kr_params() const
    {
        // Old-style parameter declarations between ')' and '{'.
        return is_ident() && starts_type_name();
    }

    void skip_kr_params()
    {
        while (!is("{")) {
            if (at_end())
                fail("expected function body");
            ++pos_;
        }
    }

    AstNode function_definition(std::size_t first, AstNode base, Declarator d)
    {
        AstNode fn;
        fn.kind = AstKind::FunctionDef;
        fn.name = d.name;
        fn.text = d.name;
        fn.line = toks_[first].line;
        fn.column = toks_[first].column;

        AstNode ret;
        ret.kind = AstKind::FuncDecl;
        ret.name = "()";
        ret.line = d.name_line;
        ret.column = d.name_column;
        ret.role = Role::Type;
        // The function suffix itself is represented by `ret`; drop it from the chain.
        std::vector<AstNode> chain;
        for (auto& n : d.type_chain)
            if (n.kind != AstKind::FuncDecl || !chain.empty() || &n != &d.type_chain.front())
                chain.push_back(std::move(n));
        if (!chain.empty() && chain.front().kind == AstKind::FuncDecl)
            chain.erase(chain.begin());
        for (auto& t : build_type_tree(std::move(chain), d.name, std::move(base), d.name_line,
                                       d.name_column))
            ret.children.push_back(std::move(t));
        fn.children.push_back(std::move(ret));

        AstNode params = std::move(d.params);
        params.kind = AstKind::ParamList;
        params.role = Role::None;
        if (params.line == 0) {
            params.line = d.name_line;
            params.name = "params";
        }
        fn.children.push_back(std::move(params));

        AstNode body = compound();
        body.role = Role::Body;
        fn.children.push_back(std::move(body));
        return fn;
    }

    // ------------------------------------------------------------ statements

    AstNode compound()
    {
        std::size_t first = pos_;
        expect("{");
        AstNode block;
        block.kind = AstKind::Compound;
        block.name = "{}";
        block.line = toks_[first].line;
        block.column = toks_[first].column;
        while (!is("}")) {
            if (at_end())
                fail("expected '}'");
            statement_into(block.children);
        }
        expect("}");
        block.text = span_text(first, pos_);
        return block;
    }

    void statement_into(std::vector<AstNode>& out)
    {
        if (auto s = statement())
            out.push_back(std::move(*s));
    }

    std::optional<AstNode> statement()
    {
        std::size_t first = pos_;
        if (accept(";"))
            return std::nullopt;
        if (is("{"))
            return compound();
        if (is_ident()) {
            const std::string& t = tok().text;
            if (t == "if")
                return if_statement();
            if (t == "while")
                return while_statement();
            if (t == "do")
                return do_statement();
            if (t == "for")
                return for_statement();
            if (t == "switch")
                return switch_statement();
            if (t == "return") {
                ++pos_;
                AstNode r = make(AstKind::Return, first, "return");
                if (!is(";")) {
                    AstNode v = expression();
                    v.role = Role::Value;
                    r.children.push_back(std::move(v));
                }
                r.text = span_text(first, pos_);
                expect(";");
                return r;
            }
            if (t == "break" || t == "continue") {
                ++pos_;
                AstNode j = make(AstKind::Jump, first, t);
                expect(";");
                return j;
            }
            if (t == "goto") {
                ++pos_;
                if (!is_ident())
                    fail("expected label after goto");
                std::string target = tok().text;
                ++pos_;
                AstNode j = make(AstKind::Jump, first, "goto");
                j.text = "goto " + target;
                j.children.push_back(label_ref(target, first));
                expect(";");
                return j;
            }
            if (t == "case" || t == "default") {
                ++pos_;
                AstNode c = make(AstKind::Case, first, t);
                if (t == "case") {
                    AstNode v = conditional_expr();
                    v.role = Role::Value;
                    if (accept("...")) // GNU case ranges
                        conditional_expr();
                    c.children.push_back(std::move(v));
                }
                c.text = span_text(first, pos_);
                expect(":");
                if (!is("}")) {
                    if (auto inner = statement()) {
                        inner->role = Role::Body;
                        c.children.push_back(std::move(*inner));
                    }
                }
                return c;
            }
            if (is(":", 1) && !is_statement_keyword(t)) {
                pos_ += 2;
                AstNode l = make(AstKind::Label, first, t);
                l.text = t;
                if (!is("}")) {
                    if (auto inner = statement()) {
                        inner->role = Role::Body;
                        l.children.push_back(std::move(*inner));
                    }
                }
                return l;
            }
            if (t == "asm" || t == "__asm__" || t == "__asm") {
                ++pos_;
                while (is_ident() && (tok().text == "volatile" || tok().text == "__volatile__"))
                    ++pos_;
                std::size_t afirst = pos_;
                if (is("("))
                    skip_balanced();
                AstNode a = make(AstKind::Operator, afirst, "asm");
                expect(";");
                return a;
            }
            if (starts_declaration())
                return declaration_statement();
            if (is("(", 1) && !is_typedef_name(t)) {
                if (auto loop = try_macro_loop())
                    return loop;
            }
        }
        AstNode e = expression();
        expect(";");
        return e;
    }

    AstNode label_ref(const std::string& target, std::size_t first) const
    {
        AstNode id;
        id.kind = AstKind::Label;
        id.name = target;
        id.text = target;
        id.line = toks_[first].line;
        id.column = toks_[first].column;
        id.role = Role::Value;
        return id;
    }

    // IDENT(args) followed by a statement body: an iterator macro such as
    // list_for_each_entry(pos, head, member) { ... }.
    std::optional<AstNode> try_macro_loop()
    {
        std::size_t save = pos_;
        std::size_t first = pos_;
        std::string name = tok().text;
        ++pos_;
        std::size_t open = pos_;
        skip_balanced();
        if (!is("{")) {
            pos_ = save;
            return std::nullopt;
        }
        std::size_t after = pos_;
        AstNode loop;
        loop.kind = AstKind::Loop;
        loop.name = name;
        loop.line = toks_[first].line;
        loop.column = toks_[first].column;
        loop.text = name + "(" + span_text(open + 1, after - 1) + ")";
        // Header arguments are parsed best-effort so that variable uses show up.
        pos_ = open + 1;
        while (pos_ < after - 1) {
            std::size_t arg_start = pos_;
            try {
                AstNode a = assignment_expr();
                if (!is(",") && pos_ != after - 1)
                    throw SyntaxError("", 0, 0);
                a.role = Role::Cond;
                loop.children.push_back(std::move(a));
            } catch (const SyntaxError&) {
                pos_ = arg_start;
                int depth = 0;
                while (pos_ < after - 1 && !(depth == 0 && is(","))) {
                    if (is("(") || is("[") || is("{"))
                        ++depth;
                    else if (is(")") || is("]") || is("}"))
                        --depth;
                    ++pos_;
                }
            }
            if (!accept(","))
                break;
        }
        pos_ = after;
        AstNode body = *statement();
        body.role = Role::Body;
        loop.children.push_back(std::move(body));
        return loop;
    }

    std::string paren_header(std::size_t open_tok, std::size_t close_tok) const
    {
        return span_text(open_tok + 1, close_tok);
    }

    AstNode if_statement()
    {
        std::size_t first = pos_;
        ++pos_;
        std::size_t open = pos_;
        expect("(");
        AstNode cond = expression();
        cond.role = Role::Cond;
        std::size_t close = pos_;
        expect(")");
        AstNode n = make(AstKind::Branch, first, "if");
        n.text = "if(" + paren_header(open, close) + ")";
        n.children.push_back(std::move(cond));
        if (auto then = statement()) {
            then->role = Role::Then;
            n.children.push_back(std::move(*then));
        }
        if (accept("else")) {
            if (auto els = statement()) {
                els->role = Role::Else;
                n.children.push_back(std::move(*els));
            }
        }
        return n;
    }

    AstNode while_statement()
    {
        std::size_t first = pos_;
        ++pos_;
        std::size_t open = pos_;
        expect("(");
        AstNode cond = expression();
        cond.role = Role::Cond;
        std::size_t close = pos_;
        expect(")");
        AstNode n = make(AstKind::Loop, first, "while");
        n.text = "while(" + paren_header(open, close) + ")";
        n.children.push_back(std::move(cond));
        if (auto body = statement()) {
            body->role = Role::Body;
            n.children.push_back(std::move(*body));
        }
        return n;
    }

    AstNode do_statement()
    {
        std::size_t first = pos_;
        ++pos_;
        std::optional<AstNode> body = statement();
        if (!accept("while"))
            fail("expected 'while' after do body");
        std::size_t open = pos_;
        expect("(");
        AstNode cond = expression();
        cond.role = Role::Cond;
        std::size_t close = pos_;
        expect(")");
        AstNode n = make(AstKind::Loop, first, "do");
        n.text = "do-while(" + paren_header(open, close) + ")";
        expect(";");
        if (body) {
            body->role = Role::Body;
            n.children.push_back(std::move(*body));
        }
        n.children.push_back(std::move(cond));
        return n;
    }

    AstNode for_statement()
    {
        std::size_t first = pos_;
        ++pos_;
        std::size_t open = pos_;
        expect("(");
        std::optional<AstNode> init, cond, step;
        if (!accept(";")) {
            if (starts_declaration()) {
                init = declaration_statement(); // consumes ';'
            } else {
                init = expression();
                expect(";");
            }
        }
        if (!is(";"))
            cond = expression();
        expect(";");
        if (!is(")"))
            step = expression();
        std::size_t close = pos_;
        expect(")");
        AstNode n = make(AstKind::Loop, first, "for");
        n.text = "for(" + paren_header(open, close) + ")";
        if (init) {
            init->role = Role::Init;
            n.children.push_back(std::move(*init));
        }
        if (cond) {
            cond->role = Role::Cond;
            n.children.push_back(std::move(*cond));
        }
        if (step) {
            step->role = Role::Step;
            n.children.push_back(std::move(*step));
        }
        if (auto body = statement()) {
            body->role = Role::Body;
            n.children.push_back(std::move(*body));
        }
        return n;
    }

    AstNode switch_statement()
    {
        std::size_t first = pos_;
        ++pos_;
        std::size_t open = pos_;
        expect("(");
        AstNode cond = expression();
        cond.role = Role::Cond;
        std::size_t close = pos_;
        expect(")");
        AstNode n = make(AstKind::Branch, first, "switch");
        n.text = "switch(" + paren_header(open, close) + ")";
        n.children.push_back(std::move(cond));
        if (auto body = statement()) {
            body->role = Role::Body;
            n.children.push_back(std::move(*body));
        }
        return n;
    }

    AstNode declaration_statement()
    {
        std::size_t first = pos_;
        bool is_typedef = false;
        AstNode base = specifiers(&is_typedef);
        std::vector<AstNode> decls;
        if (!is(";")) {
            for (;;) {
                std::size_t dfirst = pos_;
                Declarator d = declarator(false);
                if (is_typedef)
                    typedefs_.insert(d.name);
                AstNode decl = make(AstKind::Declaration, dfirst, d.name);
                decl.line = d.name_line;
                decl.column = d.name_column;
                for (auto& t : build_type_tree(std::move(d.type_chain), d.name, base, d.name_line,
                                               d.name_column))
                    decl.children.push_back(std::move(t));
                if (accept("=")) {
                    AstNode init = initializer();
                    init.role = Role::Value;
                    decl.children.push_back(std::move(init));
                    decl.has_initializer = true;
                }
                decl.text = span_text(dfirst, pos_);
                decls.push_back(std::move(decl));
                if (!accept(","))
                    break;
            }
        }
        std::string stmt_text = span_text(first, pos_);
        expect(";");
        if (is_typedef || decls.empty()) {
            AstNode none = make(AstKind::DeclGroup, first, "typedef");
            none.text = stmt_text;
            return none;
        }
        if (decls.size() == 1) {
            decls.front().text = stmt_text;
            decls.front().line = toks_[first].line;
            decls.front().column = toks_[first].column;
            return std::move(decls.front());
        }
        AstNode group = make(AstKind::DeclGroup, first, "decls");
        group.text = stmt_text;
        group.children = std::move(decls);
        return group;
    }

    AstNode initializer()
    {
        if (!is("{"))
            return assignment_expr();
        std::size_t first = pos_;
        ++pos_;
        AstNode list = make(AstKind::InitList, first, "{}");
        while (!is("}")) {
            // Designators: .field = / [index] =
            if (is(".") || is("[")) {
                while (is(".") || is("[")) {
                    if (accept(".")) {
                        if (!is_ident())
                            fail("expected field designator");
                        ++pos_;
                    } else {
                        ++pos_;
                        AstNode idx = conditional_expr();
                        list.children.push_back(std::move(idx));
                        expect("]");
                    }
                }
                expect("=");
            }
            list.children.push_back(initializer());
            if (!accept(","))
                break;
        }
        expect("}");
        list.text = span_text(first, pos_);
        return list;
    }

    // ----------------------------------------------------------- expressions

    AstNode expression()
    {
        std::size_t first = pos_;
        AstNode lhs = assignment_expr();
        while (is(",")) {
            ++pos_;
            AstNode rhs = assignment_expr();
            AstNode n = make(AstKind::Operator, first, ",");
            n.children.push_back(std::move(lhs));
            n.children.push_back(std::move(rhs));
            lhs = std::move(n);
        }
        return lhs;
    }

    static bool is_assign_op(const Token& t)
    {
        static const std::unordered_set<std::string_view> ops = {
            "=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "^=", "|="};
        return t.kind == TokKind::Punct && ops.count(t.text);
    }

    AstNode assignment_expr()
    {
        std::size_t first = pos_;
        AstNode lhs = conditional_expr();
        if (is_assign_op(tok())) {
            std::string op = tok().text;
            ++pos_;
            AstNode rhs = assignment_expr();
            lhs.role = Role::Lhs;
            rhs.role = Role::Rhs;
            AstNode n = make(AstKind::Assignment, first, op);
            n.children.push_back(std::move(lhs));
            n.children.push_back(std::move(rhs));
            return n;
        }
        return lhs;
    }

    AstNode conditional_expr()
    {
        std::size_t first = pos_;
        AstNode cond = binary_expr(0);
        if (!is("?"))
            return cond;
        ++pos_;
        AstNode a = is(":") ? cond : expression(); // GNU a ?: b
        expect(":");
        AstNode b = conditional_expr();
        cond.role = Role::Cond;
        a.role = Role::Then;
        b.role = Role::Else;
        AstNode n = make(AstKind::Operator, first, "?:");
        n.children.push_back(std::move(cond));
        n.children.push_back(std::move(a));
        n.children.push_back(std::move(b));
        return n;
    }

    static int precedence(const Token& t)
    {
        if (t.kind != TokKind::Punct)
            return -1;
        const std::string& s = t.text;
        if (s == "||") return 1;
        if (s == "&&") return 2;
        if (s == "|") return 3;
        if (s == "^") return 4;
        if (s == "&") return 5;
        if (s == "==" || s == "!=") return 6;
        if (s == "<" || s == ">" || s == "<=" || s == ">=") return 7;
        if (s == "<<" || s == ">>") return 8;
        if (s == "+" || s == "-") return 9;
        if (s == "*" || s == "/" || s == "%") return 10;
        return -1;
    }

    AstNode binary_expr(int min_prec)
    {
        std::size_t first = pos_;
        AstNode lhs = cast_expr();
        for (;;) {
            int prec = precedence(tok());
            if (prec < 0 || prec <= min_prec - 1 || prec < min_prec)
                break;
            std::string op = tok().text;
            ++pos_;
            AstNode rhs = binary_expr(prec + 1);
            AstNode n = make(AstKind::Operator, first, op);
            n.children.push_back(std::move(lhs));
            n.children.push_back(std::move(rhs));
            lhs = std::move(n);
        }
        return lhs;
    }

    // '(' starts a type name (cast, compound literal, sizeof(type)).
    bool paren_starts_type() const
    {
        if (!is("("))
            return false;
        if (starts_type_name(1))
            return true;
        if (!is_ident(1))
            return false;
        std::size_t i = 2;
        if (is("*", i)) {
            while (is("*", i))
                ++i;
            return is(")", i);
        }
        if (is(")", 2)) {
            const Token& after = tok(3);
            return after.kind == TokKind::Identifier || after.kind == TokKind::Number ||
                   after.kind == TokKind::String || after.kind == TokKind::Char;
        }
        return false;
    }

    AstNode type_name()
    {
        std::size_t first = pos_;
        AstNode base = specifiers();
        Declarator d = declarator(true);
        AstNode tn = make(AstKind::Typename, first, "type");
        for (auto& t : build_type_tree(std::move(d.type_chain), d.name, std::move(base),
                                       toks_[first].line, toks_[first].column))
            tn.children.push_back(std::move(t));
        return tn;
    }

    AstNode cast_expr()
    {
        std::size_t first = pos_;
        if (paren_starts_type()) {
            ++pos_;
            AstNode tn = type_name();
            tn.role = Role::Type;
            expect(")");
            if (is("{")) {
                AstNode init = initializer();
                AstNode n = make(AstKind::Operator, first, "compound-literal");
                n.children.push_back(std::move(tn));
                n.children.push_back(std::move(init));
                return postfix_tail(std::move(n), first);
            }
            AstNode operand = cast_expr();
            AstNode n = make(AstKind::Operator, first, "cast");
            n.children.push_back(std::move(tn));
            n.children.push_back(std::move(operand));
            return n;
        }
        return unary_expr();
    }

    AstNode unary_expr()
    {
        std::size_t first = pos_;
        const Token& t = tok();
        if (t.kind == TokKind::Punct &&
            (t.text == "++" || t.text == "--" || t.text == "&" || t.text == "*" || t.text == "+" ||
             t.text == "-" || t.text == "!" || t.text == "~" || t.text == "&&")) {
            std::string op = t.text;
            ++pos_;
            if (op == "&&") { // GNU label address
                if (!is_ident())
                    fail("expected label");
                ++pos_;
                return make(AstKind::Constant, first, op);
            }
            AstNode operand = (op == "++" || op == "--") ? unary_expr() : cast_expr();
            AstNode n = make(AstKind::Operator, first, op);
            n.children.push_back(std::move(operand));
            return n;
        }
        if (is_ident() && (t.text == "sizeof" || t.text == "_Alignof" || t.text == "__alignof__" ||
                           t.text == "alignof")) {
            std::string op = t.text;
            ++pos_;
            AstNode n;
            if (paren_starts_type()) {
                ++pos_;
                AstNode tn = type_name();
                tn.role = Role::Type;
                expect(")");
                n = make(AstKind::Operator, first, op);
                n.children.push_back(std::move(tn));
            } else {
                AstNode operand = unary_expr();
                n = make(AstKind::Operator, first, op);
                n.children.push_back(std::move(operand));
            }
            return n;
        }
        return postfix_tail(primary_expr(), first);
    }

    AstNode primary_expr()
    {
        std::size_t first = pos_;
        const Token& t = tok();
        switch (t.kind) {
        case TokKind::Identifier: {
            if (is_statement_keyword(t.text) && t.text != "sizeof")
                fail("unexpected keyword");
            if (starts_type_name() && !is("(", 1))
                fail("unexpected type name in expression");
            ++pos_;
            return make(AstKind::Identifier, first, t.text);
        }
        case TokKind::Number:
        case TokKind::Char:
            ++pos_;
            return make(AstKind::Constant, first, t.text);
        case TokKind::String: {
            while (tok().kind == TokKind::String || (is_ident() && is_string_macro(tok().text)))
                ++pos_;
            AstNode c = make(AstKind::Constant, first);
            c.name = c.text;
            return c;
        }
        case TokKind::Punct:
            if (t.text == "(") {
                ++pos_;
                if (is("{")) { // GNU statement expression
                    AstNode block = compound();
                    expect(")");
                    return block;
                }
                AstNode inner = expression();
                expect(")");
                inner.text = span_text(first, pos_);
                return inner;
            }
            break;
        case TokKind::End:
            break;
        }
        fail("expected expression");
    }

    static bool is_string_macro(std::string_view s)
    {
        // PRId64 "..." style concatenations
        return s.rfind("PRI", 0) == 0 || s.rfind("SCN", 0) == 0;
    }

    AstNode postfix_tail(AstNode base, std::size_t first)
    {
        for (;;) {
            if (is("(")) {
                ++pos_;
                std::string callee = base.text;
                base.role = Role::Callee;
                std::vector<AstNode> args;
                while (!is(")")) {
                    AstNode a;
                    if (starts_type_name() && !is("(", 1) && !is_ident(1) ) {
                        a = type_name(); // offsetof(struct s, f), va_arg(ap, int)
                    } else if (starts_type_name() && (is("*", 1) || is_ident(1)) &&
                               kTypeKeywords.count(tok().text)) {
                        a = type_name();
                    } else {
                        a = assignment_expr();
                    }
                    a.role = Role::Arg;
                    args.push_back(std::move(a));
                    if (!accept(","))
                        break;
                }
                expect(")");
                AstNode call = make(AstKind::Call, first, callee);
                call.children.push_back(std::move(base));
                for (auto& a : args)
                    call.children.push_back(std::move(a));
                base = std::move(call);
            } else if (is("[")) {
                ++pos_;
                AstNode idx = expression();
                expect("]");
                AstNode n = make(AstKind::Operator, first, "[]");
                base.role = Role::Lhs;
                idx.role = Role::Value;
                n.children.push_back(std::move(base));
                n.children.push_back(std::move(idx));
                base = std::move(n);
            } else if (is(".") || is("->")) {
                std::string op = tok().text;
                ++pos_;
                if (!is_ident())
                    fail("expected member name");
                ++pos_;
                AstNode n = make(AstKind::Operator, first, op);
                base.role = Role::Lhs;
                n.children.push_back(std::move(base));
                base = std::move(n);
            } else if (is("++") || is("--")) {
                std::string op = "p" + tok().text;
                ++pos_;
                AstNode n = make(AstKind::Operator, first, op);
                n.children.push_back(std::move(base));
                base = std::move(n);
            } else {
                return base;
            }
        }
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::set<std::string> typedefs_;
};

} // namespace

std::vector<AstNode> parse_functions(std::string_view src)
{
    return Parser(src).run();
}

} // namespace vultriage::graphs::c
