#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "crpq/letter.hpp"

namespace crpq {

using NodeId = std::string;

// Edge-labelled directed multigraph with named nodes. Immutable by
// convention after load; letters are positive unless the db is an
// inverse-expanded G+-.
struct GraphDb {
    std::set<NodeId> nodes;
    std::vector<std::pair<NodeId, std::pair<Letter, NodeId>>> edges; // multiset

    struct Edge {
        NodeId src;
        Letter letter;
        NodeId dst;
    };

    void add_node(NodeId n) { nodes.insert(std::move(n)); }
    void add_edge(const NodeId& src, const Letter& l, const NodeId& dst) {
        nodes.insert(src);
        nodes.insert(dst);
        edges.push_back({src, {l, dst}});
    }

    size_t edge_count() const { return edges.size(); }
    bool expanded() const;
};

struct DbParseError : std::runtime_error {
    int line;
    DbParseError(const std::string& what, int line_no)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

// Edge-list format: one `src label dst` per line, `node id` declares an
// isolated node, `#` starts a comment. Inverse labels (`label^-`) are only
// legal in serialized G+- dumps, not user inputs.
GraphDb load_db(const std::string& text, bool allow_inverses = false);
std::string serialize_db(const GraphDb& db);

// G+-: add y -a^-> x for every edge x -a-> y. Errors if already expanded.
GraphDb expand_inverses(const GraphDb& db);

} // namespace crpq
