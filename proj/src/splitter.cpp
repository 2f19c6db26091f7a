#include "flakevoc/splitter.hpp"

#include <algorithm>
#include <cctype>

#include "flakevoc/error.hpp"

namespace flakevoc {

namespace {

enum class CharClass { upper, lower, digit, separator };

// Non-ASCII bytes and anything exotic behave like lowercase letters: they
// join the current word and never open a boundary on their own.
CharClass classify(unsigned char c) {
    if (c == '_' || c == '-') return CharClass::separator;
    if (std::isupper(c)) return CharClass::upper;
    if (std::islower(c)) return CharClass::lower;
    if (std::isdigit(c)) return CharClass::digit;
    return CharClass::lower;
}

bool is_letter(CharClass c) {
    return c == CharClass::upper || c == CharClass::lower;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c);
    });
}

} // namespace

SplitResult split_identifier(std::string_view name) {
    if (name.empty()) throw DataError("cannot split an empty identifier");

    SplitResult result{std::string(name), {}};
    std::string part;
    auto flush = [&] {
        if (!part.empty()) {
            result.parts.push_back(part);
            part.clear();
        }
    };

    CharClass prev = CharClass::separator;
    for (const char raw : name) {
        const unsigned char c = static_cast<unsigned char>(raw);
        const CharClass cls = classify(c);
        if (cls == CharClass::separator) {
            flush();
            prev = cls;
            continue;
        }
        if (!part.empty()) {
            const bool case_boundary = prev == CharClass::lower && cls == CharClass::upper;
            const bool digit_boundary = (is_letter(prev) && cls == CharClass::digit) ||
                                        (prev == CharClass::digit && is_letter(cls));
            if (case_boundary || digit_boundary) {
                flush();
            } else if (prev == CharClass::upper && cls == CharClass::lower && part.size() >= 2 &&
                       classify(static_cast<unsigned char>(part[part.size() - 2])) == CharClass::upper) {
                // uppercase run ending: the last capital starts the next word
                const char last = part.back();
                part.pop_back();
                flush();
                part.push_back(last);
            }
        }
        part.push_back(raw);
        prev = cls;
    }
    flush();
    return result;
}

std::vector<Token> expand_tokens(const std::vector<Token>& tokens) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (const Token& tok : tokens) {
        if (tok.kind == TokenKind::keyword || tok.kind == TokenKind::number_mask) {
            out.push_back(tok);
            continue;
        }
        SplitResult split = split_identifier(tok.text);
        if (split.parts.empty() || (split.parts.size() == 1 && split.parts[0] == tok.text)) {
            out.push_back(tok);
            continue;
        }
        for (std::string& fragment : split.parts) {
            if (all_digits(fragment)) {
                out.push_back({TokenKind::number_mask, std::string(kNumberMask)});
            } else {
                out.push_back({tok.kind, std::move(fragment)});
            }
        }
        out.push_back(tok);
    }
    return out;
}

} // namespace flakevoc
