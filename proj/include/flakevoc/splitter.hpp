#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flakevoc/lexer.hpp"

namespace flakevoc {

struct SplitResult {
    std::string original;
    std::vector<std::string> parts;
};

// Boundary-based identifier splitting. Underscores and hyphens separate and
// are dropped; lower-to-upper transitions split; letter/digit transitions
// split; an uppercase run followed by lowercase splits before its last
// capital (HTTPServer -> HTTP, Server). Same-case concatenations such as
// `readfile` are left alone: there is no dictionary or frequency model.
// Digit runs come back as their own parts. Empty input is an error; a lone
// separator yields no parts.
SplitResult split_identifier(std::string_view name);

// Applies split_identifier across a token stream. A name or string_word
// token whose split differs from the token itself is replaced by its parts
// followed by the original, so the original identifier is always
// recoverable. All-digit fragments are re-masked to #NUM#. keyword and
// number_mask tokens pass through untouched.
std::vector<Token> expand_tokens(const std::vector<Token>& tokens);

} // namespace flakevoc
