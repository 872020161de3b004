#pragma once

#include <compare>
#include <functional>
#include <string>
#include <vector>

namespace crpq {

// A symbol of the two-way alphabet: a base name, optionally inverted (a vs a^-).
struct Letter {
    std::string base;
    bool inverted = false;

    Letter inverse() const { return {base, !inverted}; }
    std::string str() const { return inverted ? base + "^-" : base; }
    auto operator<=>(const Letter&) const = default;
};

using Word = std::vector<Letter>;

std::string word_str(const Word& w);

// Reverse the word and invert every letter: (uv)^- = v^- u^-.
Word word_inverse(const Word& w);

} // namespace crpq

template <> struct std::hash<crpq::Letter> {
    size_t operator()(const crpq::Letter& l) const {
        return std::hash<std::string>()(l.base) * 2 + (l.inverted ? 1 : 0);
    }
};
