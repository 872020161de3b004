#include <cctype>
#include <memory>

#include "crpq/nfa.hpp"
#include "eps_nfa.hpp"

namespace crpq {

namespace {

// Fragment of the automaton under construction: entry state, exit state.
struct Frag {
    int start;
    int end;
};

// Recursive-descent parser building Thompson fragments directly into one
// EpsNfa. Grammar (lowest to highest precedence):
//   union   := concat ('|' concat)*
//   concat  := postfix (('.')? postfix)*
//   postfix := primary ('*' | '+' | '^-')*
//   primary := LETTER | '<eps>' | '(' union ')'
class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    std::shared_ptr<Nfa> parse() {
        skip_ws();
        if (eof()) throw RegexSyntaxError("empty regex", 0);
        Frag f = parse_union();
        skip_ws();
        if (!eof()) throw RegexSyntaxError("unexpected character '" + std::string(1, peek()) + "'", pos_);
        e_.initial = f.start;
        e_.finals.insert(f.end);
        return eps_nfa_finish(e_);
    }

    bool is_single_letter(Letter& out) {
        // Fast path so parse_regex("a") shares the interned canonical NFA.
        size_t p = 0;
        while (p < text_.size() && std::isspace((unsigned char)text_[p])) ++p;
        size_t start = p;
        while (p < text_.size() && is_letter_char(text_[p])) ++p;
        if (p == start) return false;
        std::string base = text_.substr(start, p - start);
        bool inverted = false;
        if (p + 1 < text_.size() && text_[p] == '^' && text_[p + 1] == '-') {
            inverted = true;
            p += 2;
        }
        while (p < text_.size() && std::isspace((unsigned char)text_[p])) ++p;
        if (p != text_.size()) return false;
        out = {base, inverted};
        return true;
    }

private:
    static bool is_letter_char(char c) {
        return std::isalnum((unsigned char)c) || c == '_';
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    void skip_ws() {
        while (!eof() && std::isspace((unsigned char)text_[pos_])) ++pos_;
    }

    bool starts_primary() {
        skip_ws();
        if (eof()) return false;
        char c = peek();
        return is_letter_char(c) || c == '(' || c == '<';
    }

    Frag parse_union() {
        Frag left = parse_concat();
        skip_ws();
        while (!eof() && peek() == '|') {
            ++pos_;
            Frag right = parse_concat();
            int s = e_.fresh(), t = e_.fresh();
            e_.eps.push_back({s, left.start});
            e_.eps.push_back({s, right.start});
            e_.eps.push_back({left.end, t});
            e_.eps.push_back({right.end, t});
            left = {s, t};
            skip_ws();
        }
        return left;
    }

    Frag parse_concat() {
        Frag left = parse_postfix();
        for (;;) {
            skip_ws();
            if (!eof() && peek() == '.') {
                ++pos_;
                Frag right = parse_postfix();
                e_.eps.push_back({left.end, right.start});
                left = {left.start, right.end};
            } else if (starts_primary()) {
                Frag right = parse_postfix();
                e_.eps.push_back({left.end, right.start});
                left = {left.start, right.end};
            } else {
                return left;
            }
        }
    }

    Frag parse_postfix() {
        int first_state = e_.n;
        Frag f = parse_primary();
        for (;;) {
            skip_ws();
            if (eof()) return f;
            char c = peek();
            if (c == '*') {
                ++pos_;
                int s = e_.fresh(), t = e_.fresh();
                e_.eps.push_back({s, f.start});
                e_.eps.push_back({s, t});
                e_.eps.push_back({f.end, f.start});
                e_.eps.push_back({f.end, t});
                f = {s, t};
            } else if (c == '+') {
                ++pos_;
                int s = e_.fresh(), t = e_.fresh();
                e_.eps.push_back({s, f.start});
                e_.eps.push_back({f.end, f.start});
                e_.eps.push_back({f.end, t});
                f = {s, t};
            } else if (c == '^') {
                if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '-')
                    throw RegexSyntaxError("expected '^-'", pos_);
                pos_ += 2;
                f = invert(f, first_state);
            } else {
                return f;
            }
        }
    }

    // Reverse a fragment in place: mirror its transitions and epsilon edges,
    // invert every letter. At this point the fragment is not yet connected to
    // anything outside, so its edges are exactly those touching the states it
    // created, i.e. ids >= first_state.
    Frag invert(Frag f, int first_state) {
        for (auto& t : e_.trans)
            if (t.src >= first_state || t.dst >= first_state) {
                std::swap(t.src, t.dst);
                t.letter = t.letter.inverse();
            }
        for (auto& [a, b] : e_.eps)
            if (a >= first_state || b >= first_state) std::swap(a, b);
        return {f.end, f.start};
    }

    Frag parse_primary() {
        skip_ws();
        if (eof()) throw RegexSyntaxError("unexpected end of regex", pos_);
        char c = peek();
        if (c == '(') {
            ++pos_;
            Frag f = parse_union();
            skip_ws();
            if (eof() || peek() != ')') throw RegexSyntaxError("expected ')'", pos_);
            ++pos_;
            return f;
        }
        if (c == '<') {
            if (text_.compare(pos_, 5, "<eps>") != 0)
                throw RegexSyntaxError("expected '<eps>'", pos_);
            pos_ += 5;
            int s = e_.fresh();
            return {s, s};
        }
        if (is_letter_char(c)) {
            size_t start = pos_;
            while (!eof() && is_letter_char(peek())) ++pos_;
            std::string base = text_.substr(start, pos_ - start);
            bool inverted = false;
            if (pos_ + 1 < text_.size() && text_[pos_] == '^' && text_[pos_ + 1] == '-') {
                inverted = true;
                pos_ += 2;
            }
            int s = e_.fresh(), t = e_.fresh();
            e_.trans.push_back({s, Letter{base, inverted}, t});
            return {s, t};
        }
        throw RegexSyntaxError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    const std::string& text_;
    size_t pos_ = 0;
    EpsNfa e_;
};

} // namespace

NfaPtr parse_regex(const std::string& text) {
    Parser p(text);
    Letter lit;
    if (p.is_single_letter(lit)) return Nfa::single_letter(lit);
    auto nfa = p.parse();
    nfa->source_ = text;
    return nfa;
}

} // namespace crpq
