#pragma once

#include <map>
#include <set>
#include <vector>

#include "crpq/decomposition.hpp"
#include "crpq/query.hpp"
#include "crpq/regular_path.hpp"

namespace crpq {

// Evaluation result: a set of node tuples with the query's output arity.
// Boolean queries yield {()} or {}.
struct ResultSet {
    std::set<std::vector<NodeId>> tuples;
    bool satisfied() const { return !tuples.empty(); }
    bool operator==(const ResultSet&) const = default;
};

// Per-call context caching the inverse-expanded database and the per-NFA
// regular path relations (keyed by NFA identity). Not thread-safe; supply
// one per concurrent evaluation.
class EvalContext {
public:
    explicit EvalContext(const GraphDb& db);

    const GraphDb& expanded() const { return expanded_; }
    const std::set<std::pair<NodeId, NodeId>>& relation(const NfaPtr& lang);

    // Statistics hook used by the materialization guard tests.
    size_t max_relation_rows = 0;

private:
    GraphDb expanded_;
    std::map<const Nfa*, std::set<std::pair<NodeId, NodeId>>> relations_;
    std::vector<NfaPtr> keepalive_;
};

// Backtracking over all variable assignments, per-atom checks through the
// regular path relations on the expanded database.
ResultSet evaluate_naive(const Uc2rpq& q, const GraphDb& db);
ResultSet evaluate_naive(const C2rpq& q, const GraphDb& db);

// Tree-width-aware engine: materializes one relation per bag (seeded from
// V(G)^|bag| and semi-joined with each tagged atom's relation), runs
// bottom-up and top-down semi-joins over the tree, then enumerates output
// tuples over the reduced relations. Every materialized relation is checked
// against the |V(G)|^(k+1) guard.
ResultSet evaluate_treewidth(const C2rpq& q, const GraphDb& db, const TaggedTreeDecomposition& ttd);

// Path-width streaming engine: scans the bags left to right maintaining the
// set of valid partial assignments restricted to the current bag, with
// output bindings carried through the frontier.
ResultSet evaluate_pathwidth(const C2rpq& q, const GraphDb& db, const TaggedTreeDecomposition& pd);

} // namespace crpq
