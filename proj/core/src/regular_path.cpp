#include "crpq/regular_path.hpp"

#include <map>
#include <queue>

namespace crpq {

std::set<std::pair<NodeId, NodeId>> regular_path_pairs(const Nfa& nfa, const GraphDb& db) {
    // Node-indexed adjacency by letter.
    std::map<NodeId, std::vector<std::pair<Letter, NodeId>>> adj;
    for (const NodeId& n : db.nodes) adj[n];
    for (const auto& [src, rest] : db.edges) adj[src].push_back({rest.first, rest.second});

    std::set<std::pair<NodeId, NodeId>> out;
    for (const NodeId& start : db.nodes) {
        // BFS in the product from (q0, start) for every initial q0.
        std::set<std::pair<Nfa::State, NodeId>> seen;
        std::queue<std::pair<Nfa::State, NodeId>> todo;
        for (Nfa::State q : nfa.initial()) {
            seen.insert({q, start});
            todo.push({q, start});
        }
        while (!todo.empty()) {
            auto [q, node] = todo.front();
            todo.pop();
            if (nfa.final().count(q)) out.insert({start, node});
            for (const auto& [l, q2] : nfa.out(q))
                for (const auto& [el, node2] : adj[node])
                    if (el == l && seen.insert({q2, node2}).second) todo.push({q2, node2});
        }
    }
    return out;
}

} // namespace crpq
