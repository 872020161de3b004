#include "crpq/decomposition.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <queue>
#include <sstream>

namespace crpq {

int TreeDecomposition::width() const {
    int w = -1;
    for (const auto& b : bags) w = std::max(w, int(b.size()) - 1);
    return w;
}

std::vector<std::vector<int>> TreeDecomposition::children() const {
    std::vector<std::vector<int>> ch(bags.size());
    for (size_t i = 0; i < bags.size(); ++i)
        if (parent[i] >= 0) ch[parent[i]].push_back(int(i));
    return ch;
}

std::vector<std::vector<int>> TreeDecomposition::adjacency() const {
    std::vector<std::vector<int>> adj(bags.size());
    for (size_t i = 0; i < bags.size(); ++i)
        if (parent[i] >= 0) {
            adj[i].push_back(parent[i]);
            adj[parent[i]].push_back(int(i));
        }
    return adj;
}

std::vector<int> TreeDecomposition::bfs_order() const {
    std::vector<int> order;
    auto ch = children();
    for (size_t i = 0; i < bags.size(); ++i)
        if (parent[i] < 0) {
            std::queue<int> q;
            q.push(int(i));
            while (!q.empty()) {
                int b = q.front();
                q.pop();
                order.push_back(b);
                for (int c : ch[b]) q.push(c);
            }
        }
    return order;
}

bool TreeDecomposition::is_path() const {
    auto adj = adjacency();
    int deg_over_2 = 0;
    for (const auto& a : adj)
        if (a.size() > 2) ++deg_over_2;
    return deg_over_2 == 0;
}

bool valid_decomposition(const TreeDecomposition& dec, const Multigraph& g, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (dec.bags.size() != dec.parent.size()) return fail("bags/parent size mismatch");
    if (dec.bags.empty()) return g.verts.empty() ? true : fail("no bags");
    int roots = 0;
    for (int p : dec.parent)
        if (p < 0) ++roots;
    if (roots != 1) return fail("expected exactly one root");
    if (dec.kind == TreeDecomposition::Kind::Path && !dec.is_path())
        return fail("kind is Path but the tree branches");

    for (const Var& v : g.verts) {
        bool found = false;
        for (const auto& b : dec.bags)
            if (b.count(v)) {
                found = true;
                break;
            }
        if (!found) return fail("vertex " + v + " in no bag");
    }
    for (auto [a, b] : g.edges) {
        const Var &va = g.verts[a], &vb = g.verts[b];
        bool found = false;
        for (const auto& bag : dec.bags)
            if (bag.count(va) && bag.count(vb)) {
                found = true;
                break;
            }
        if (!found) return fail("edge " + va + "-" + vb + " covered by no bag");
    }
    // Connectedness per vertex.
    auto adj = dec.adjacency();
    for (const Var& v : g.verts) {
        int start = -1, total = 0;
        for (size_t i = 0; i < dec.bags.size(); ++i)
            if (dec.bags[i].count(v)) {
                ++total;
                start = int(i);
            }
        if (start < 0) continue;
        std::set<int> seen{start};
        std::queue<int> q;
        q.push(start);
        int reached = 0;
        while (!q.empty()) {
            int b = q.front();
            q.pop();
            ++reached;
            for (int nb : adj[b])
                if (dec.bags[nb].count(v) && seen.insert(nb).second) q.push(nb);
        }
        if (reached != total) return fail("bags containing " + v + " are disconnected");
    }
    return true;
}

bool is_fine(const TreeDecomposition& dec) {
    for (size_t i = 0; i < dec.bags.size(); ++i) {
        if (dec.parent[i] < 0) continue;
        const auto& b = dec.bags[i];
        const auto& p = dec.bags[dec.parent[i]];
        std::vector<Var> added, removed;
        std::set_difference(b.begin(), b.end(), p.begin(), p.end(), std::back_inserter(added));
        std::set_difference(p.begin(), p.end(), b.begin(), b.end(), std::back_inserter(removed));
        bool ok = (added.empty() != removed.empty()); // exactly one side, nonempty
        if (!ok) return false;
    }
    return true;
}

namespace {

// Adjacency bitmasks for the simple graph underlying a multigraph.
std::vector<uint32_t> simple_adjacency(const Multigraph& g) {
    std::vector<uint32_t> adj(g.verts.size(), 0);
    for (auto [a, b] : g.edges) {
        if (a == b) continue;
        adj[a] |= 1u << b;
        adj[b] |= 1u << a;
    }
    return adj;
}

// Vertices outside S reachable from v through S (v excluded from S).
uint32_t reach_through(const std::vector<uint32_t>& adj, uint32_t S, int v) {
    uint32_t inside = adj[v] & S;
    uint32_t outside = adj[v] & ~S;
    uint32_t seen = inside;
    std::queue<int> q;
    for (int i = 0; i < 32; ++i)
        if (inside & (1u << i)) q.push(i);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        outside |= adj[u] & ~S;
        uint32_t fresh = (adj[u] & S) & ~seen;
        seen |= fresh;
        for (int i = 0; i < 32; ++i)
            if (fresh & (1u << i)) q.push(i);
    }
    return outside & ~(1u << v);
}

TreeDecomposition decomposition_from_order(const Multigraph& g, const std::vector<int>& order) {
    // Simulate elimination, collecting fill-in; bag(v) = {v} + later neighbors.
    int n = int(g.verts.size());
    std::vector<std::set<int>> nb(n);
    for (auto [a, b] : g.edges)
        if (a != b) {
            nb[a].insert(b);
            nb[b].insert(a);
        }
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[order[i]] = i;

    std::vector<std::set<int>> bag_of(n);
    std::vector<std::set<int>> work = nb;
    for (int i = 0; i < n; ++i) {
        int v = order[i];
        std::set<int> later;
        for (int u : work[v])
            if (pos[u] > i) later.insert(u);
        bag_of[v] = later;
        bag_of[v].insert(v);
        for (int a : later)
            for (int b : later)
                if (a != b) work[a].insert(b);
    }

    TreeDecomposition dec;
    dec.kind = TreeDecomposition::Kind::Tree;
    dec.bags.resize(n);
    dec.parent.assign(n, -1);
    for (int i = 0; i < n; ++i)
        for (int u : bag_of[order[i]]) dec.bags[i].insert(g.verts[u]);
    // Parent of bag i: bag of the earliest-later vertex in bag_of[order[i]].
    for (int i = 0; i < n; ++i) {
        int v = order[i];
        int best = n;
        for (int u : bag_of[v])
            if (u != v) best = std::min(best, pos[u]);
        if (best < n) dec.parent[i] = best;
    }
    // Re-root so parents point upward: the last-eliminated vertex is the root.
    // parent[i] as computed is a later bag, so the structure is already a
    // forest rooted at the last bag; connect any stray roots to the last bag.
    int root = n - 1;
    for (int i = 0; i < n; ++i)
        if (dec.parent[i] < 0 && i != root) dec.parent[i] = root;
    if (n == 0) {
        dec.bags.push_back({});
        dec.parent.push_back(-1);
    }
    return dec;
}

} // namespace

std::pair<int, TreeDecomposition> exact_treewidth(const Multigraph& g) {
    int n = int(g.verts.size());
    if (n > kTreewidthCap)
        throw WidthCapExceeded("exact_treewidth: " + std::to_string(n) + " vertices exceeds cap " +
                               std::to_string(kTreewidthCap));
    if (n == 0) {
        TreeDecomposition dec;
        dec.bags.push_back({});
        dec.parent.push_back(-1);
        return {-1, dec};
    }
    auto adj = simple_adjacency(g);

    // f(S) = min over elimination orders of S (eliminated first) of the max
    // elimination degree; Q(S,v) = neighbors of v outside S reachable via S.
    uint32_t full = n == 32 ? ~0u : (1u << n) - 1;
    std::vector<int8_t> f(size_t(1) << n, 127);
    std::vector<int8_t> pick(size_t(1) << n, -1);
    f[0] = -1;
    for (uint32_t S = 1; S <= full; ++S) {
        int best = 127, arg = -1;
        for (int v = 0; v < n; ++v) {
            if (!(S & (1u << v))) continue;
            uint32_t rest = S & ~(1u << v);
            int q = std::popcount(reach_through(adj, rest, v));
            int val = std::max(int(f[rest]), q);
            if (val < best) {
                best = val;
                arg = v;
            }
        }
        f[S] = int8_t(best);
        pick[S] = int8_t(arg);
    }
    int width = f[full];

    // pick[S] is the vertex eliminated last among S, so unwinding from the
    // full set yields the reverse elimination order.
    std::vector<int> elim;
    uint32_t S = full;
    while (S) {
        int v = pick[S];
        elim.push_back(v);
        S &= ~(1u << v);
    }
    std::reverse(elim.begin(), elim.end());

    TreeDecomposition dec = decomposition_from_order(g, elim);
    return {width, dec};
}

std::pair<int, TreeDecomposition> exact_pathwidth(const Multigraph& g) {
    int n = int(g.verts.size());
    if (n > kPathwidthCap)
        throw WidthCapExceeded("exact_pathwidth: " + std::to_string(n) + " vertices exceeds cap " +
                               std::to_string(kPathwidthCap));
    if (n == 0) {
        TreeDecomposition dec;
        dec.kind = TreeDecomposition::Kind::Path;
        dec.bags.push_back({});
        dec.parent.push_back(-1);
        return {-1, dec};
    }
    auto adj = simple_adjacency(g);
    uint32_t full = n == 32 ? ~0u : (1u << n) - 1;

    // Vertex separation: g(S) = min over v in S of max(g(S-v), |boundary(S)|)
    // where boundary(S) = vertices of S with a neighbor outside S.
    auto boundary = [&](uint32_t S) {
        int b = 0;
        for (int v = 0; v < n; ++v)
            if ((S & (1u << v)) && (adj[v] & ~S)) ++b;
        return b;
    };
    std::vector<int8_t> f(size_t(1) << n, 127);
    std::vector<int8_t> pick(size_t(1) << n, -1);
    f[0] = 0;
    for (uint32_t S = 1; S <= full; ++S) {
        int bd = boundary(S);
        int best = 127, arg = -1;
        for (int v = 0; v < n; ++v) {
            if (!(S & (1u << v))) continue;
            int val = std::max(int(f[S & ~(1u << v)]), bd);
            if (val < best) {
                best = val;
                arg = v;
            }
        }
        f[S] = int8_t(best);
        pick[S] = int8_t(arg);
    }
    int width = f[full];

    // Layout: pick[S] is the last vertex of the prefix S.
    std::vector<int> layout(n);
    uint32_t S = full;
    for (int i = n - 1; i >= 0; --i) {
        layout[i] = pick[S];
        S &= ~(1u << layout[i]);
    }

    // Path decomposition: bag i = {layout[i]} + earlier vertices with a
    // neighbor at or after position i.
    TreeDecomposition dec;
    dec.kind = TreeDecomposition::Kind::Path;
    dec.bags.resize(n);
    dec.parent.assign(n, -1);
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[layout[i]] = i;
    for (int i = 0; i < n; ++i) {
        dec.bags[i].insert(g.verts[layout[i]]);
        for (int j = 0; j < i; ++j) {
            int u = layout[j];
            bool live = false;
            for (int w = 0; w < n && !live; ++w)
                if ((adj[u] >> w) & 1u)
                    if (pos[w] >= i) live = true;
            if (live) dec.bags[i].insert(g.verts[u]);
        }
        if (i > 0) dec.parent[i] = i - 1;
    }
    return {width, dec};
}

TreeDecomposition make_fine(const TreeDecomposition& dec) {
    TreeDecomposition cur = dec;
    // Merge consecutive equal bags until none remain.
    for (bool merged = true; merged;) {
        merged = false;
        for (size_t i = 0; i < cur.bags.size(); ++i) {
            int p = cur.parent[i];
            if (p < 0 || cur.bags[i] != cur.bags[p]) continue;
            // Contract i into p.
            TreeDecomposition next;
            next.kind = cur.kind;
            std::vector<int> remap(cur.bags.size(), -1);
            int m = 0;
            for (size_t j = 0; j < cur.bags.size(); ++j)
                if (j != i) remap[j] = m++;
            next.bags.resize(m);
            next.parent.assign(m, -1);
            for (size_t j = 0; j < cur.bags.size(); ++j) {
                if (j == i) continue;
                next.bags[remap[j]] = cur.bags[j];
                int pj = cur.parent[j] == int(i) ? p : cur.parent[j];
                next.parent[remap[j]] = pj < 0 ? -1 : remap[pj];
            }
            cur = std::move(next);
            merged = true;
            break;
        }
    }
    // Insert intersection bags between non-conforming parent/child pairs.
    for (bool inserted = true; inserted;) {
        inserted = false;
        for (size_t i = 0; i < cur.bags.size(); ++i) {
            int p = cur.parent[i];
            if (p < 0) continue;
            const auto& b = cur.bags[i];
            const auto& pb = cur.bags[p];
            std::vector<Var> added, removed;
            std::set_difference(b.begin(), b.end(), pb.begin(), pb.end(), std::back_inserter(added));
            std::set_difference(pb.begin(), pb.end(), b.begin(), b.end(),
                                std::back_inserter(removed));
            if (added.empty() != removed.empty()) continue; // already fine here
            std::set<Var> inter;
            std::set_intersection(b.begin(), b.end(), pb.begin(), pb.end(),
                                  std::inserter(inter, inter.end()));
            int mid = int(cur.bags.size());
            cur.bags.push_back(inter);
            cur.parent.push_back(p);
            cur.parent[i] = mid;
            inserted = true;
            break;
        }
    }
    return cur;
}

TaggedTreeDecomposition tag_atoms(const C2rpq& q, const TreeDecomposition& dec,
                                  const std::map<Var, Var>& f) {
    auto img = [&](const Var& v) -> const Var& {
        auto it = f.find(v);
        return it == f.end() ? v : it->second;
    };
    TaggedTreeDecomposition ttd;
    ttd.dec = dec;
    std::vector<int> order = dec.bfs_order();
    for (const Atom& a : q.atoms) {
        const Var &u = img(a.src), &v = img(a.dst);
        int found = -1;
        for (int b : order)
            if (dec.bags[b].count(u) && dec.bags[b].count(v)) {
                found = b;
                break;
            }
        if (found < 0)
            throw std::invalid_argument("tag_atoms: no bag covers atom " + a.src + "->" + a.dst);
        ttd.tag.push_back(found);
    }
    ttd.fine = is_fine(dec);
    return ttd;
}

TaggedTreeDecomposition restrict_to_tags(const TaggedTreeDecomposition& ttd) {
    const TreeDecomposition& dec = ttd.dec;
    if (ttd.tag.empty()) return ttd;
    // Smallest connected subtree containing all tagged bags: mark tagged
    // bags, then walk each toward the root marking ancestors up to the
    // shallowest common region; simplest correct approach at this scale is
    // to mark all bags on paths between tagged bags.
    size_t n = dec.bags.size();
    std::vector<int> depth(n, 0);
    auto ch = dec.children();
    std::vector<int> order = dec.bfs_order();
    for (int b : order)
        if (dec.parent[b] >= 0) depth[b] = depth[dec.parent[b]] + 1;

    auto path_mark = [&](int a, int b, std::vector<char>& keep) {
        while (a != b) {
            if (depth[a] < depth[b]) std::swap(a, b);
            keep[a] = 1;
            a = dec.parent[a];
        }
        keep[a] = 1;
    };
    // The Steiner tree of the tagged bags is the union of the paths from one
    // fixed tagged bag to every other.
    std::vector<char> keep(n, 0);
    int first = ttd.tag.front();
    keep[first] = 1;
    for (int t : ttd.tag) path_mark(first, t, keep);

    std::vector<int> remap(n, -1);
    int m = 0;
    for (int b : order)
        if (keep[b]) remap[b] = m++;
    TaggedTreeDecomposition out;
    out.dec.kind = dec.kind;
    out.dec.bags.resize(m);
    out.dec.parent.assign(m, -1);
    for (int b : order) {
        if (!keep[b]) continue;
        out.dec.bags[remap[b]] = dec.bags[b];
        int p = dec.parent[b];
        while (p >= 0 && !keep[p]) p = dec.parent[p];
        out.dec.parent[remap[b]] = p < 0 ? -1 : remap[p];
    }
    for (int t : ttd.tag) out.tag.push_back(remap[t]);
    out.fine = is_fine(out.dec);
    return out;
}

std::string dump_decomposition(const TaggedTreeDecomposition& ttd) {
    std::ostringstream os;
    auto ch = ttd.dec.children();
    std::function<void(int, int)> rec = [&](int b, int indent) {
        os << std::string(indent * 2, ' ') << "bag " << b << " {";
        bool first = true;
        for (const Var& v : ttd.dec.bags[b]) {
            os << (first ? "" : " ") << v;
            first = false;
        }
        os << "}";
        std::vector<int> atoms;
        for (size_t a = 0; a < ttd.tag.size(); ++a)
            if (ttd.tag[a] == b) atoms.push_back(int(a));
        if (!atoms.empty()) {
            os << " tags[";
            for (size_t i = 0; i < atoms.size(); ++i) os << (i ? "," : "") << atoms[i];
            os << "]";
        }
        os << "\n";
        for (int c : ch[b]) rec(c, indent + 1);
    };
    for (size_t b = 0; b < ttd.dec.bags.size(); ++b)
        if (ttd.dec.parent[b] < 0) rec(int(b), 0);
    return os.str();
}

} // namespace crpq
