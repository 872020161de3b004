#pragma once

#include <optional>

#include "crpq/bigint.hpp"
#include "crpq/morphism.hpp"
#include "crpq/refine.hpp"

namespace crpq {

enum class WidthKind {
    TreeWidth,
    PathWidth,
    ContractedTreeWidth,
    ContractedPathWidth,
    OneWayContractedTreeWidth,
    OneWayContractedPathWidth,
};

// A width class Tw_k, Pw_k, cTw_k, cPw_k or their one-way variants. One-way
// kinds reject queries containing inverted letters.
struct WidthClass {
    WidthKind kind;
    int k;

    bool one_way() const {
        return kind == WidthKind::OneWayContractedTreeWidth ||
               kind == WidthKind::OneWayContractedPathWidth;
    }
    bool contracted() const { return kind != WidthKind::TreeWidth && kind != WidthKind::PathWidth; }
    bool path_based() const {
        return kind == WidthKind::PathWidth || kind == WidthKind::ContractedPathWidth ||
               kind == WidthKind::OneWayContractedPathWidth;
    }
    std::string str() const;

    // Exact width test for one query; throws WidthCapExceeded beyond caps.
    bool admits(const C2rpq& q) const;
    int width_of(const C2rpq& q) const;
};

// The explicit bounds: m0 = 2(2n+1)(2k+1)((k+1)^n + 1) + 4n with n the atom
// count, and ell = 2(2n(m0-1) - 1) from the leaf/height chain. For the
// contracted-width-1 kinds the cubic bound c*n^3 with c = 8 applies instead.
struct WidthBound {
    BigUint m0;
    BigUint ell;
};
WidthBound width_bound(size_t atom_count, const WidthClass& cls);
WidthBound width_bound(const C2rpq& gamma, const WidthClass& cls);

// Split multi-final atom languages into one disjunct per final state, so a
// single-atom trivial refinement exists per disjunct.
std::vector<C2rpq> split_multifinal(const C2rpq& q, SublangCache& cache);

struct MuaOptions {
    int m = 3;
    size_t max_generated = 200000; // generated images across all refinements
    int jobs = 1;
};

// Provenance for one kept disjunct: which refinement of which base disjunct
// and which variable partition produced it.
struct MuaCertificate {
    size_t base_disjunct;
    Refinement refinement;
    std::map<Var, Var> quotient;
};

struct MuaResult {
    Uc2rpq approximation;
    std::vector<MuaCertificate> certificates; // parallel to disjuncts
    bool exhaustive = true;                   // false when a cap was hit
    size_t generated = 0;
    size_t refinements_seen = 0;
    bool merged_parallel_atoms = false;
};

// MUAHomBounded(gamma, cls, m): per disjunct, split multi-final atoms,
// enumerate m-refinements and their homomorphic images, keep the images the
// class admits, deduplicate by isomorphism.
MuaResult mua_hom_bounded(const Uc2rpq& gamma, const WidthClass& cls, const MuaOptions& opt,
                          SublangCache& cache);

// Remove disjuncts absorbed by another (homomorphism from the absorber into
// the absorbed); canonical processing order makes the result order-free.
Uc2rpq minimize_union(const Uc2rpq& u);

} // namespace crpq
