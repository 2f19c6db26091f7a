#include "flakevoc/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "flakevoc/error.hpp"

namespace flakevoc {

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

// Word characters for string contents. Bytes >= 0x80 count as word characters
// so multi-byte UTF-8 sequences stay intact.
bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

// Operator and delimiter characters of the lexed test language; they carry no
// vocabulary signal and are dropped.
bool is_punctuation(unsigned char c) {
    switch (c) {
    case '+': case '-': case '*': case '/': case '%': case '@':
    case '<': case '>': case '=': case '!': case '&': case '|':
    case '^': case '~': case '(': case ')': case '[': case ']':
    case '{': case '}': case ',': case ':': case '.': case ';':
    case '\\':
        return true;
    default:
        return false;
    }
}

// String literal prefixes (r, b, u, f and two-letter combinations) belong to
// the literal, not to the identifier vocabulary.
bool is_string_prefix(std::string_view word) {
    if (word.empty() || word.size() > 2) return false;
    return std::all_of(word.begin(), word.end(), [](unsigned char c) {
        switch (std::tolower(c)) {
        case 'r': case 'b': case 'u': case 'f': return true;
        default: return false;
        }
    });
}

class Lexer {
public:
    Lexer(std::string_view source, const KeywordSet& keywords)
        : src_(source), keywords_(keywords) {}

    std::vector<Token> run() {
        while (!eof()) {
            const unsigned char c = peek();
            if (std::isspace(c)) {
                advance();
            } else if (c == '#') {
                skip_comment();
            } else if (c == '"' || c == '\'') {
                lex_string();
            } else if (is_ident_start(c)) {
                lex_identifier();
            } else if (std::isdigit(c) || (c == '.' && std::isdigit(peek(1)))) {
                lex_number();
            } else if (is_punctuation(c)) {
                advance();
            } else {
                fail(line_, col_, std::string("unexpected character '") + static_cast<char>(c) + "'");
            }
        }
        return std::move(tokens_);
    }

private:
    bool eof() const { return pos_ >= src_.size(); }

    unsigned char peek(std::size_t off = 0) const {
        return pos_ + off < src_.size() ? static_cast<unsigned char>(src_[pos_ + off]) : '\0';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    [[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& what) const {
        throw DataError("lex error at line " + std::to_string(line) + ", column " +
                        std::to_string(col) + ": " + what);
    }

    void skip_comment() {
        while (!eof() && peek() != '\n') advance();
    }

    void lex_identifier() {
        const std::size_t start = pos_;
        while (!eof() && is_ident_char(peek())) advance();
        const std::string_view word = src_.substr(start, pos_ - start);
        if (!eof() && (peek() == '"' || peek() == '\'') && is_string_prefix(word)) {
            lex_string();
            return;
        }
        if (keywords_.contains(word)) {
            tokens_.push_back({TokenKind::keyword, std::string(word)});
        } else {
            tokens_.push_back({TokenKind::name, std::string(word)});
        }
    }

    // Consumes one numeric literal (int, float, hex/octal/binary, exponent,
    // imaginary suffix, digit-group underscores) and emits the mask token.
    void lex_number() {
        const std::size_t start = pos_;
        bool hex = false;
        while (!eof()) {
            const unsigned char c = peek();
            if (is_ident_char(c)) {
                if ((c == 'x' || c == 'X') && pos_ == start + 1 && src_[start] == '0') hex = true;
                advance();
                continue;
            }
            if (c == '.' && std::isdigit(peek(1))) {
                advance();
                continue;
            }
            if ((c == '+' || c == '-') && !hex && pos_ > start) {
                const char prev = src_[pos_ - 1];
                if (prev == 'e' || prev == 'E') {
                    advance();
                    continue;
                }
            }
            break;
        }
        tokens_.push_back({TokenKind::number_mask, std::string(kNumberMask)});
    }

    // Entered with pos_ on the opening quote; prefix letters, if any, were
    // consumed by lex_identifier.
    void lex_string() {
        const std::size_t start_line = line_;
        const std::size_t start_col = col_;
        const char quote = static_cast<char>(peek());
        const bool triple = peek(1) == quote && peek(2) == quote;
        advance();
        if (triple) {
            advance();
            advance();
        }

        std::string contents;
        for (;;) {
            if (eof()) fail(start_line, start_col, "unterminated string");
            const unsigned char c = peek();
            if (c == static_cast<unsigned char>(quote)) {
                if (!triple) {
                    advance();
                    break;
                }
                if (peek(1) == quote && peek(2) == quote) {
                    advance();
                    advance();
                    advance();
                    break;
                }
                contents.push_back(static_cast<char>(c));
                advance();
                continue;
            }
            if (c == '\n' && !triple) fail(start_line, start_col, "unterminated string");
            if (c == '\\') {
                contents.push_back('\\');
                advance();
                if (eof()) fail(start_line, start_col, "unterminated string");
                contents.push_back(src_[pos_]);
                advance();
                continue;
            }
            contents.push_back(static_cast<char>(c));
            advance();
        }
        emit_string_words(contents);
    }

    void emit_string_words(std::string_view contents) {
        std::size_t i = 0;
        while (i < contents.size()) {
            while (i < contents.size() && !is_word_char(static_cast<unsigned char>(contents[i]))) ++i;
            const std::size_t word_start = i;
            while (i < contents.size() && is_word_char(static_cast<unsigned char>(contents[i]))) ++i;
            if (i > word_start) {
                tokens_.push_back({TokenKind::string_word,
                                   std::string(contents.substr(word_start, i - word_start))});
            }
        }
    }

    std::string_view src_;
    const KeywordSet& keywords_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

} // namespace

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
    case TokenKind::keyword: return "keyword";
    case TokenKind::name: return "name";
    case TokenKind::number_mask: return "number_mask";
    case TokenKind::string_word: return "string_word";
    }
    return "unknown";
}

KeywordSet::KeywordSet(std::vector<std::string> words) {
    for (std::string& w : words) {
        if (lookup_.insert(w).second) ordered_.push_back(std::move(w));
    }
}

const KeywordSet& KeywordSet::python_defaults() {
    static const KeywordSet instance{{
        "False", "None", "True", "and", "as", "assert", "async", "await",
        "break", "class", "continue", "def", "del", "elif", "else", "except",
        "finally", "for", "from", "global", "if", "import", "in", "is",
        "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
        "while", "with", "yield", "self",
    }};
    return instance;
}

KeywordSet KeywordSet::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open keyword list: " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.push_back(line);
    }
    if (words.empty()) throw DataError("keyword list is empty: " + path.string());
    return KeywordSet(std::move(words));
}

bool KeywordSet::contains(std::string_view word) const {
    return lookup_.find(word) != lookup_.end();
}

std::vector<Token> tokenize(std::string_view source, const KeywordSet& keywords) {
    return Lexer(source, keywords).run();
}

std::map<std::string, std::size_t> count_keywords(const std::vector<Token>& tokens) {
    std::map<std::string, std::size_t> counts;
    for (const Token& tok : tokens) {
        if (tok.kind == TokenKind::keyword) ++counts[tok.text];
    }
    return counts;
}

std::size_t count_loc(std::string_view source) {
    std::size_t lines = 0;
    bool non_blank = false;
    for (char c : source) {
        if (c == '\n') {
            if (non_blank) ++lines;
            non_blank = false;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            non_blank = true;
        }
    }
    if (non_blank) ++lines;
    return lines;
}

std::string dump_tokens(const std::vector<Token>& tokens) {
    std::ostringstream out;
    for (const Token& tok : tokens) {
        out << token_kind_name(tok.kind) << '\t' << tok.text << '\n';
    }
    return out.str();
}

} // namespace flakevoc
