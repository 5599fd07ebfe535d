#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vultriage::graphs::c {

enum class TokKind { Identifier, Number, String, Char, Punct, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    int line = 1;
    int column = 1;
    std::size_t begin = 0; // byte offsets into the source
    std::size_t end = 0;
};

// Tokenizes C source. Comments and preprocessor directives are dropped;
// macros stay unexpanded identifiers.
std::vector<Token> tokenize(std::string_view src);

} // namespace vultriage::graphs::c
