#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crpq/query.hpp"

namespace crpq {

// Rooted tree (or path) of bags. parent[root] == -1. Bags may contain
// variables beyond those of the decomposed graph; validity only requires
// coverage and connectedness for the graph's own vertices.
struct TreeDecomposition {
    enum class Kind { Tree, Path };

    Kind kind = Kind::Tree;
    std::vector<std::set<Var>> bags;
    std::vector<int> parent;

    int width() const;
    size_t size() const { return bags.size(); }
    std::vector<std::vector<int>> children() const;
    std::vector<std::vector<int>> adjacency() const;
    // Bag ids in BFS order from the root.
    std::vector<int> bfs_order() const;
    bool is_path() const;
};

// The three defining properties: every vertex in some bag, every edge's
// endpoints co-occurring in some bag, per-vertex bag sets connected.
bool valid_decomposition(const TreeDecomposition& dec, const Multigraph& g,
                         std::string* why = nullptr);

// Every non-root bag differs from its parent by only-additions or
// only-removals, nonempty either way.
bool is_fine(const TreeDecomposition& dec);

struct WidthCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kTreewidthCap = 20;
inline constexpr int kPathwidthCap = 18;

// Exact tree-width via dynamic programming over elimination orders;
// self-loops and parallel edges are ignored. Throws WidthCapExceeded above
// kTreewidthCap vertices.
std::pair<int, TreeDecomposition> exact_treewidth(const Multigraph& g);

// Exact path-width via the vertex-separation DP. Cap kPathwidthCap.
std::pair<int, TreeDecomposition> exact_pathwidth(const Multigraph& g);

// Merge consecutive equal bags, insert intersection bags between
// non-conforming pairs; width and validity preserved.
TreeDecomposition make_fine(const TreeDecomposition& dec);

struct TaggedTreeDecomposition {
    TreeDecomposition dec;
    std::vector<int> tag; // atom index -> bag id
    bool fine = false;
};

// Tag every atom of q (with endpoint images under f, identity when f is
// empty) to the first BFS bag containing both. Throws when an atom has no
// covering bag.
TaggedTreeDecomposition tag_atoms(const C2rpq& q, const TreeDecomposition& dec,
                                  const std::map<Var, Var>& f = {});

// Keep only the smallest connected subtree containing all tagged bags.
TaggedTreeDecomposition restrict_to_tags(const TaggedTreeDecomposition& ttd);

// Indented text dump: bag id, parent, variable set, tagged atom indices.
std::string dump_decomposition(const TaggedTreeDecomposition& ttd);

} // namespace crpq
