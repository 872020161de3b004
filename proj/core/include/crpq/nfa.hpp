#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "crpq/letter.hpp"

namespace crpq {

class Nfa;
using NfaPtr = std::shared_ptr<const Nfa>;

// Epsilon-free NFA over the two-way alphabet. Values are immutable after
// construction; share them via NfaPtr. State ids are dense 0..n-1 and stay
// stable under sublanguage(), so refinement traces can refer to them.
class Nfa {
public:
    using State = int;

    struct Transition {
        State src;
        Letter letter;
        State dst;
        auto operator<=>(const Transition&) const = default;
    };

    Nfa(int num_states,
        std::vector<Transition> transitions,
        std::set<State> initial,
        std::set<State> final_states);

    int num_states() const { return num_states_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const std::set<State>& initial() const { return initial_; }
    const std::set<State>& final() const { return final_; }
    const std::set<Letter>& alphabet() const { return alphabet_; }

    // Outgoing transitions of one state.
    const std::vector<std::pair<Letter, State>>& out(State s) const { return out_[s]; }

    bool accepts(const Word& w) const;
    // States reachable from `from` by reading w.
    std::set<State> run(const std::set<State>& from, const Word& w) const;
    bool accepts_epsilon() const;
    bool is_empty() const;
    bool has_transition(State src, const Letter& l, State dst) const;
    bool uses_inverted_letters() const;

    // Set when this automaton is the canonical single-letter NFA {a}.
    const std::optional<Letter>& literal() const { return literal_; }
    // Regex source, when the NFA was built by parse_regex.
    const std::optional<std::string>& source() const { return source_; }

    std::string describe() const;

    // Canonical two-state NFA for {a}; interned, one shared instance per letter.
    static NfaPtr single_letter(const Letter& l);
    // NFA accepting exactly {epsilon}.
    static NfaPtr epsilon();

private:
    friend NfaPtr parse_regex(const std::string&);
    friend NfaPtr sublanguage(const NfaPtr&, State, State);
    friend NfaPtr inverse_language(const NfaPtr&);
    friend NfaPtr concat_languages(const NfaPtr&, const NfaPtr&);

    int num_states_;
    std::vector<Transition> transitions_;
    std::set<State> initial_, final_;
    std::set<Letter> alphabet_;
    std::vector<std::vector<std::pair<Letter, State>>> out_;
    std::optional<Letter> literal_;
    std::optional<std::string> source_;
};

// Regex surface syntax: letters are identifiers [A-Za-z0-9_]+ (maximal munch),
// postfix ^- (inverse), * and + (Kleene star/plus), infix | (union), `.` or
// juxtaposition of groups (concatenation), parentheses, <eps>.
// Thompson construction, epsilon transitions eliminated, one initial state.
struct RegexSyntaxError : std::runtime_error {
    size_t position;
    RegexSyntaxError(const std::string& what, size_t pos)
        : std::runtime_error(what + " at position " + std::to_string(pos)), position(pos) {}
};

NfaPtr parse_regex(const std::string& text);

// A[q,q']: same states and transitions, initial {q}, final {q'}.
NfaPtr sublanguage(const NfaPtr& nfa, Nfa::State q, Nfa::State q2);

// L^-: reverse all transitions, swap initial/final, invert every label.
NfaPtr inverse_language(const NfaPtr& nfa);

// L1 . L2 via epsilon bridging, then epsilon elimination.
NfaPtr concat_languages(const NfaPtr& a, const NfaPtr& b);

// Letter a is a word of A[q,q'] iff the single transition exists (epsilon-free).
inline bool letter_in_sublanguage(const Nfa& a, Nfa::State q, const Letter& l, Nfa::State q2) {
    return a.has_transition(q, l, q2);
}

// All words over `alphabet` of length <= max_len, shortest first, lexicographic
// within a length.
std::vector<Word> words_up_to(const std::set<Letter>& alphabet, int max_len);

// All words of L(nfa) with length <= max_len, shortest first.
std::vector<Word> language_words_up_to(const Nfa& nfa, int max_len);

// Membership-compare two languages on every word up to max_len over the union
// of their alphabets. Incomplete beyond the bound by design.
bool language_equal_sampled(const Nfa& a, const Nfa& b, int max_len = 4);

// Exact check that L holds no word longer than bound (a word longer than the
// bound exists iff one of length at most bound + |Q| does).
bool language_bounded_by(const Nfa& nfa, int bound);

// Pointer identity first, sampled equality as the fallback.
bool language_equal(const NfaPtr& a, const NfaPtr& b, int max_len = 4);

} // namespace crpq
