#pragma once

#include <set>
#include <utility>

#include "crpq/graphdb.hpp"
#include "crpq/nfa.hpp"

namespace crpq {

// All (u,v) such that some path from u to v in db is labelled by a word of
// L(nfa); reachability in the product of the NFA and the database. The empty
// path carries label epsilon. When the NFA uses inverted letters the caller
// passes an inverse-expanded database.
std::set<std::pair<NodeId, NodeId>> regular_path_pairs(const Nfa& nfa, const GraphDb& db);

} // namespace crpq
