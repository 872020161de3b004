#pragma once

#include <optional>
#include <string>

#include "crpq/approximation.hpp"
#include "crpq/evaluation.hpp"
#include "crpq/query.hpp"

namespace crpq {

// Outcome of a bounded containment or decision procedure. No always carries
// a replayable witness: a CQ expansion of the left side not contained in the
// right side.
struct Verdict {
    enum class Kind { Yes, No, NoCounterexampleUpTo };

    Kind kind;
    bool exact = false;
    std::string notes; // provenance: SRE bound / syntactic short-circuit / CQ-left
    std::optional<C2rpq> witness;
    std::optional<int> bound;

    bool is_yes() const { return kind == Kind::Yes; }
    bool is_no() const { return kind == Kind::No; }
    std::string kind_str() const;
};

// Exact containment of a CQ in a union: guess an assignment of some
// disjunct's variables into the CQ's canonical database and check every atom
// through the regular path relations.
bool cq_contained(const C2rpq& xi, const Uc2rpq& delta);

// Bounded containment gamma in delta: enumerate expansions of gamma with
// per-atom word length <= word_bound, smallest first; No at the first
// counterexample, otherwise NoCounterexampleUpTo. Upgraded to Yes(exact)
// when (a) gamma is a CQ, (b) gamma is an SRE query and the bound covers the
// quadratic counterexample size, or (c) every gamma disjunct is isomorphic
// to some delta disjunct.
Verdict contained_bounded(const Uc2rpq& gamma, const Uc2rpq& delta, int word_bound);

// The SRE-exactness word bound: atom_count * (non_recursive_atoms + 2).
int sre_word_bound(const Uc2rpq& gamma);

struct DecideOptions {
    int m = 3;
    int word_bound = 8;
    MuaOptions mua;
};

struct DecideResult {
    Verdict verdict;
    WidthClass effective_class; // after the redirects
    MuaResult approximation;
    WidthBound bound;
    bool m_covers_ell = false;
};

// Semantic width decision: redirect the class (tree-width 1 and path-width
// targets go through the contracted classes), build the bounded
// approximation, and test containment of gamma in it. Yes verdicts are exact
// regardless of m; No verdicts are exact only when m >= ell.
DecideResult decide_semantic_width(const Uc2rpq& gamma, WidthKind target_kind, int k,
                                   bool one_way, const DecideOptions& opt, SublangCache& cache);

// Both directions of contained_bounded; exact only when both are.
Verdict equivalent_bounded(const Uc2rpq& a, const Uc2rpq& b, int word_bound);

} // namespace crpq
