#pragma once

#include <optional>

#include "crpq/decomposition.hpp"
#include "crpq/morphism.hpp"
#include "crpq/refine.hpp"

namespace crpq {

// A trio: a refinement rho of gamma, an approximation alpha in the width
// class, and a strong-onto homomorphism f from rho.result onto alpha.
struct Trio {
    C2rpq gamma;
    Refinement rho;
    C2rpq alpha;
    std::map<Var, Var> f;

    const Var& image(const Var& v) const { return f.at(v); }
    void validate() const;
};

// One element of a path induced in a tagged tree decomposition: a bag, the
// alpha variable the walk sits at, and the range of refinement-path variable
// indices it represents (consecutive equal (bag,var) entries are merged).
struct InducedPathElem {
    int bag;
    Var alpha_var;
    int t_lo;
    int t_hi;
};

struct InducedPath {
    std::vector<InducedPathElem> seq;

    // The path leaves bag b at element i when seq[i].bag == b and i is last
    // or seq[i+1] sits in a different bag.
    bool leaves_at(size_t i) const;
    std::optional<size_t> leave_elem(int bag) const;
    bool cyclic() const;
};

// Path induced by atom_index's refinement path, per the link construction.
InducedPath induced_path(const Trio& trio, const TaggedTreeDecomposition& ttd,
                         size_t atom_index);

// Atom ids of rho.result in the order of the refinement path of one gamma
// atom (helper shared by the passes and the tag machinery).
std::vector<int> refinement_path_atoms(const Refinement& rho, size_t atom_index);

bool is_locally_acyclic(const Trio& trio, const TaggedTreeDecomposition& ttd);

// Per-variable types of a non-atomic bag plus the atomic flag.
struct BagProfile {
    bool atomic = false;
    std::map<Var, std::set<int>> types; // alpha var -> gamma atom indices
    // Multiset of types, the comparison key.
    std::vector<std::set<int>> multiset() const;
    bool operator==(const BagProfile&) const = default;
};

BagProfile profile_of_bag(const Trio& trio, const TaggedTreeDecomposition& ttd, int bag);

// Number of atomic bags (Fact-level bound: at most 2 * atom count of gamma).
size_t count_atomic_bags(const Trio& trio, const TaggedTreeDecomposition& ttd);

// Condense refinement paths until every induced path is acyclic. Preserves
// fineness and width, never grows the refinement, and the old alpha is
// contained in the new one (new atoms only connect co-bagged variables).
struct PassResult {
    Trio trio;
    TaggedTreeDecomposition ttd;
    size_t steps = 0;
};
PassResult make_locally_acyclic(const Trio& trio, const TaggedTreeDecomposition& ttd,
                                SublangCache& cache);

// Shorten every long non-branching path by finding two non-full, non-atomic,
// same-profile bags at distance >= 2k+1 with no atomic bag in between,
// condensing every crossing atom refinement, and splicing the halves back
// together through 2n fresh bags. Repeats until all non-branching paths are
// shorter than m0.
PassResult shorten_nonbranching(const Trio& trio, const TaggedTreeDecomposition& ttd,
                                int k, size_t m0, SublangCache& cache);

// Search routine behind the pigeonhole bound: tokens are profiles (by id),
// kTrap or kAvoid; find i < i' with tokens equal (not avoid), i' - i >= d and
// no trap in between. Returns the first such pair.
inline constexpr int kTrapToken = -1;
inline constexpr int kAvoidToken = -2;
std::optional<std::pair<size_t, size_t>> pigeonhole_search(const std::vector<int>& tokens,
                                                           size_t d);

// Maximal non-branching paths of the tree (interior bags of degree exactly
// 2), each as a bag id sequence; deterministic order.
std::vector<std::vector<int>> nonbranching_paths(const TreeDecomposition& dec);

} // namespace crpq
