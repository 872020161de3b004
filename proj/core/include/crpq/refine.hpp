#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "crpq/query.hpp"

namespace crpq {

// Cache of sublanguage automata keyed by (automaton, q, q'). Sharing the
// NfaPtr lets homomorphism checking use pointer identity for languages that
// the refinement machinery re-derives.
class SublangCache {
public:
    NfaPtr get(const NfaPtr& nfa, Nfa::State q, Nfa::State q2);

private:
    std::map<std::tuple<const Nfa*, int, int>, NfaPtr> cache_;
    std::vector<NfaPtr> keepalive_;
};

// One atom's refinement: witnessing state trace q0..qn plus per-segment
// language choices, or the equality-collapse marker (legal iff eps is in L).
struct AtomTrace {
    struct Segment {
        enum Kind { Sublanguage, SingleLetter } kind;
        NfaPtr lang;
        Letter letter; // meaningful for SingleLetter
    };

    bool equality_collapse = false;
    std::vector<Nfa::State> trace; // q0..qn, empty for equality collapse
    std::vector<Segment> segments; // |segments| = |trace| - 1

    size_t length() const { return segments.size(); }
};

// A refinement of a query: per-atom traces plus the assembled result with
// fresh middle variables `<atomIndex>#<i>` and equalities collapsed.
struct Refinement {
    C2rpq base;
    std::vector<AtomTrace> traces;
    C2rpq result;
    // Per atom, the result-side variable path t0..tn (both entries equal for
    // an equality collapse).
    std::vector<std::vector<Var>> path_vars;
    // Result-side names of the base query's variables.
    std::set<Var> base_vars_in_result;
};

// Validate trace invariants against the atom it refines.
void validate_trace(const Atom& atom, const AtomTrace& t, SublangCache& cache);

// Assemble a refinement from per-atom traces (q must be equality-free).
Refinement assemble_refinement(const C2rpq& q, std::vector<AtomTrace> traces);

// All atom m-refinements in deterministic order: the equality collapse first
// when legal, then by (n, state sequence, segment kinds with Sublanguage
// before SingleLetter, letters lexicographic).
std::vector<AtomTrace> enumerate_atom_refinements(const Atom& atom, int m, SublangCache& cache);

// Lazy cartesian product of per-atom traces, enumerated by ascending total
// refinement length (equality collapses count 0), ties broken by the index
// tuple with atoms in declaration order. The trivial all-length-1 choices
// come first and the output for m is a prefix of the output for m+1.
class RefinementEnumerator {
public:
    RefinementEnumerator(const C2rpq& q, int m, SublangCache& cache);
    std::optional<Refinement> next();
    // Product size (for tests; may be huge, saturates at SIZE_MAX).
    size_t total() const;

private:
    void build_total(size_t t);

    C2rpq base_;
    std::vector<std::vector<AtomTrace>> per_atom_;    // sorted: collapse, then by n
    std::vector<std::map<size_t, std::pair<size_t, size_t>>> by_len_; // len -> [begin,end)
    size_t total_len_ = 0, max_total_ = 0, pos_ = 0;
    std::vector<std::vector<size_t>> current_; // index tuples for total_len_
    bool done_ = false;
};

// Condensation between trace variables t_i and t_j (j > i+1) of one atom:
// the segments in between become one Sublanguage segment A[q_i, q_j].
Refinement condense(const Refinement& ref, size_t atom_index, size_t i, size_t j,
                    SublangCache& cache);

// Expansions: CQs obtained by replacing each atom with a word path, words of
// per-atom length <= max_len; enumerated by total word length, then
// lexicographically. An empty word collapses the atom's endpoints.
class ExpansionEnumerator {
public:
    ExpansionEnumerator(const C2rpq& q, int max_len);
    std::optional<C2rpq> next();
    size_t total() const;

private:
    C2rpq base_;
    std::vector<std::vector<Word>> per_atom_; // sorted by (length, lex)
    std::vector<std::vector<size_t>> by_total_; // flat index lists per total length
    size_t total_len_ = 0, pos_ = 0;
    std::vector<std::vector<std::vector<size_t>>> combos_; // per total: index tuples
    void build_total(size_t t);
    int max_total_ = 0;
};

std::vector<C2rpq> enumerate_expansions(const C2rpq& q, int max_len, size_t cap = SIZE_MAX);

// Build the CQ for one choice of per-atom words.
C2rpq expansion_from_words(const C2rpq& q, const std::vector<Word>& words);

enum class ContractionMode { TwoWay, OneWay };

// Fixpoint of suppressing internal-path middle variables: existential, total
// degree exactly 2 (TwoWay) or in-degree 1 and out-degree 1 (OneWay), never
// output variables; wrong-direction segments contribute L^-.
C2rpq contract(const C2rpq& q, ContractionMode mode);

} // namespace crpq
