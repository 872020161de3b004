#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crpq/graphdb.hpp"
#include "crpq/nfa.hpp"

namespace crpq {

using Var = std::string;

struct Atom {
    Var src;
    NfaPtr lang;
    Var dst;
};

// Conjunctive regular path query with two-way navigation. A query carrying
// equality atoms is non-canonical; collapse_equalities produces the canonical
// form. Output tuples may repeat variables.
struct C2rpq {
    std::string name = "q";
    std::set<Var> vars;
    std::vector<Var> output;
    std::vector<Atom> atoms;
    std::vector<std::pair<Var, Var>> equalities;

    size_t atom_count() const { return atoms.size(); }

    // Recompute vars as the union of everything mentioned, keeping any
    // explicitly declared extras.
    void sync_vars();
    void validate() const;

    bool is_cq() const;            // every atom language a single letter
    bool uses_inverses() const;    // any atom language with an inverted letter
};

struct Uc2rpq {
    std::string name = "Q";
    std::vector<C2rpq> disjuncts;

    size_t arity() const { return disjuncts.empty() ? 0 : disjuncts.front().output.size(); }
    void validate() const;
};

inline Uc2rpq as_union(const C2rpq& q) { return Uc2rpq{q.name, {q}}; }

// Canonical form: merge each equality class into its lexicographically least
// variable, rewrite output and atoms through the renaming.
struct CollapseResult {
    C2rpq query;
    std::map<Var, Var> renaming;
};
CollapseResult collapse_equalities(const C2rpq& q);

// Underlying undirected multigraph: one edge per atom, self-loops kept.
struct Multigraph {
    std::vector<Var> verts;
    std::vector<std::pair<int, int>> edges;

    int index_of(const Var& v) const;
};
Multigraph underlying_multigraph(const C2rpq& q);

// True iff every atom language is of the form a* or a1+...+am over positive
// letters, decided by the stored regex when available plus word sampling up
// to length 3 (documented incompleteness for NFAs built by hand).
bool is_sre(const Uc2rpq& q);
bool is_sre(const C2rpq& q);

// Canonical database of a CQ: one node per variable, one edge per atom;
// inverted-letter atoms are stored as the positive reverse edge.
struct CanonicalDb {
    GraphDb db;
    std::map<Var, NodeId> naming; // identity on variable names
};
CanonicalDb canonical_db(const C2rpq& cq);

// The single-letter language of a CQ atom.
std::optional<Letter> atom_letter(const Atom& a);

std::string describe(const C2rpq& q);

} // namespace crpq
