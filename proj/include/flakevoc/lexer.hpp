#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace flakevoc {

inline constexpr std::string_view kNumberMask = "#NUM#";

enum class TokenKind { keyword, name, number_mask, string_word };

std::string_view token_kind_name(TokenKind kind);

struct Token {
    TokenKind kind;
    std::string text;
    bool operator==(const Token&) const = default;
};

// Keyword list of the test language. Order is preserved because it fixes the
// auxiliary feature column layout; lookups treat the list as a set.
class KeywordSet {
public:
    KeywordSet() = default;
    explicit KeywordSet(std::vector<std::string> words);

    // Python reserved words plus `self`, which test code uses like one.
    static const KeywordSet& python_defaults();

    // One keyword per line, UTF-8. Blank lines are ignored.
    static KeywordSet load_file(const std::filesystem::path& path);

    bool contains(std::string_view word) const;
    const std::vector<std::string>& ordered() const { return ordered_; }
    std::size_t size() const { return ordered_.size(); }

private:
    std::vector<std::string> ordered_;
    std::set<std::string, std::less<>> lookup_;
};

// Lexes test source into the normalized token stream: keywords marked,
// numeric literals masked to #NUM#, identifiers kept verbatim, string literal
// contents word-tokenized, punctuation and comments dropped. Works at the
// lexical level only; no grammar is involved. Throws DataError with line and
// column on unterminated strings and characters outside the language.
std::vector<Token> tokenize(std::string_view source, const KeywordSet& keywords);

// Exact per-keyword occurrence counts over a token stream. Only keywords that
// occur appear in the map; dense layouts are the caller's concern.
std::map<std::string, std::size_t> count_keywords(const std::vector<Token>& tokens);

// Number of lines containing at least one non-whitespace character.
std::size_t count_loc(std::string_view source);

// Debug dump, one token per line as kind<TAB>text.
std::string dump_tokens(const std::vector<Token>& tokens);

} // namespace flakevoc
