#include "graphs/c_lexer.hpp"

#include "common/error.hpp"

#include <array>
#include <cctype>

namespace vultriage::graphs::c {

namespace {

constexpr std::array<std::string_view, 23> kMultiCharPuncts = {
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "*=",  "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##",
};

bool ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        bool line_start = true;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                advance();
                line_start = true;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                int l = line_, col = col_;
                advance();
                advance();
                while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/'))
                    advance();
                if (pos_ >= src_.size())
                    throw SyntaxError("unterminated comment", l, col);
                advance();
                advance();
                continue;
            }
            if (c == '#' && line_start) {
                skip_directive();
                continue;
            }
            line_start = false;
            out.push_back(next_token());
        }
        Token end;
        end.kind = TokKind::End;
        end.line = line_;
        end.column = col_;
        end.begin = end.end = src_.size();
        out.push_back(end);
        return out;
    }

private:
    char peek(std::size_t ahead) const
    {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance()
    {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_directive()
    {
        while (pos_ < src_.size() && src_[pos_] != '\n') {
            if (src_[pos_] == '\\' && peek(1) == '\n') {
                advance();
            } else if (src_[pos_] == '/' && peek(1) == '*') {
                advance();
                advance();
                while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/'))
                    advance();
                if (pos_ < src_.size()) {
                    advance();
                }
            }
            if (pos_ < src_.size())
                advance();
        }
    }

    Token next_token()
    {
        Token t;
        t.line = line_;
        t.column = col_;
        t.begin = pos_;
        char c = src_[pos_];

        // String/char literal prefixes: L, u, U, u8.
        std::size_t prefix = 0;
        if (c == 'L' || c == 'U' || c == 'u') {
            if (peek(1) == '"' || peek(1) == '\'')
                prefix = 1;
            else if (c == 'u' && peek(1) == '8' && (peek(2) == '"' || peek(2) == '\''))
                prefix = 2;
        }
        if (prefix > 0 || c == '"' || c == '\'') {
            for (std::size_t i = 0; i < prefix; ++i)
                advance();
            char quote = src_[pos_];
            advance();
            while (pos_ < src_.size() && src_[pos_] != quote) {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size())
                    advance();
                if (src_[pos_] == '\n')
                    throw SyntaxError("unterminated literal", t.line, t.column);
                advance();
            }
            if (pos_ >= src_.size())
                throw SyntaxError("unterminated literal", t.line, t.column);
            advance();
            t.kind = quote == '"' ? TokKind::String : TokKind::Char;
        } else if (ident_start(c)) {
            while (pos_ < src_.size() && ident_char(src_[pos_]))
                advance();
            t.kind = TokKind::Identifier;
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            while (pos_ < src_.size()) {
                char d = src_[pos_];
                if (ident_char(d) || d == '.') {
                    advance();
                } else if ((d == '+' || d == '-') &&
                           (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E' ||
                            src_[pos_ - 1] == 'p' || src_[pos_ - 1] == 'P')) {
                    advance();
                } else {
                    break;
                }
            }
            t.kind = TokKind::Number;
        } else {
            t.kind = TokKind::Punct;
            std::size_t len = 1;
            for (auto p : kMultiCharPuncts) {
                if (src_.substr(pos_, p.size()) == p) {
                    len = p.size();
                    break;
                }
            }
            static constexpr std::string_view kSingles = "{}[]()<>;:,.?!~+-*/%^&|=#\\@";
            if (len == 1 && kSingles.find(c) == std::string_view::npos)
                throw SyntaxError(std::string("unexpected character '") + c + "'", t.line, t.column);
            for (std::size_t i = 0; i < len; ++i)
                advance();
        }
        t.end = pos_;
        t.text = std::string(src_.substr(t.begin, t.end - t.begin));
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace

std::vector<Token> tokenize(std::string_view src)
{
    return Lexer(src).run();
}

} // namespace vultriage::graphs::c
