#pragma once

#include <map>
#include <optional>
#include <vector>

#include "crpq/query.hpp"

namespace crpq {

// Assigns stable ids to languages, pointer identity first, word-sampled
// equality as fallback. Share one instance to compare signatures across
// queries.
class LanguageClasser {
public:
    int classify(const NfaPtr& l);

private:
    std::vector<NfaPtr> reps_;
    std::map<const Nfa*, int> by_ptr_;
};

// Variable mapping src -> dst preserving the output tuple positionally and
// every atom with an equal language (pointer identity first, word-sampled
// equality as fallback).
struct Homomorphism {
    std::map<Var, Var> mapping;
    bool strong_onto = false;
};

// Complete backtracking enumeration. With want_strong_onto, keeps only maps
// under which every dst atom is the image of a src atom with equal language.
std::vector<Homomorphism> find_homomorphisms(const C2rpq& src, const C2rpq& dst,
                                             bool want_strong_onto);

// Existence check with the same semantics, stopping at the first hit.
bool homomorphism_exists(const C2rpq& src, const C2rpq& dst, bool want_strong_onto = false);

// Quotient of q by a variable partition: a strong-onto image. Parallel atoms
// whose languages compare equal merge into one (recorded in merged_parallel).
struct ImageResult {
    C2rpq image;
    std::map<Var, Var> quotient; // var -> representative
    bool merged_parallel = false;
};
ImageResult quotient_by_partition(const C2rpq& q, const std::vector<std::vector<Var>>& blocks);

// All homomorphic images of q: variable partitions in restricted-growth
// order, deduplicated by isomorphism. Lazy cursor plus a materializing
// helper for tests.
class ImageEnumerator {
public:
    explicit ImageEnumerator(const C2rpq& q);
    // Next quotient (not deduplicated); nullopt when exhausted.
    std::optional<ImageResult> next();
    size_t partitions_enumerated() const { return count_; }

private:
    C2rpq base_;
    std::vector<Var> vars_;
    std::vector<int> rgs_; // restricted growth string
    bool done_ = false;
    size_t count_ = 0;
};

std::vector<C2rpq> homomorphic_images(const C2rpq& q);

// Core of a CQ: greedily drop atoms whose removal keeps a homomorphism from
// the current query into the candidate. Unique up to isomorphism.
C2rpq cq_core(const C2rpq& cq);

// Output-preserving, language-preserving bijection on variables inducing a
// bijection of atom multisets.
bool is_isomorphic(const C2rpq& a, const C2rpq& b);

// Canonical-ish signature for bucketing before pairwise isomorphism checks;
// comparable only for queries classified by the same LanguageClasser.
std::string iso_signature(const C2rpq& q, LanguageClasser& cls);

} // namespace crpq
