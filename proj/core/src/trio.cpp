#include "crpq/trio.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace crpq {

void Trio::validate() const {
    for (const Var& v : rho.result.vars)
        if (!f.count(v)) throw std::invalid_argument("trio: f not total on vars(rho)");
    for (const auto& [v, w] : f)
        if (!alpha.vars.count(w)) throw std::invalid_argument("trio: f maps outside alpha");
    if (rho.result.output.size() != alpha.output.size())
        throw std::invalid_argument("trio: output arity mismatch");
    for (size_t i = 0; i < alpha.output.size(); ++i)
        if (f.at(rho.result.output[i]) != alpha.output[i])
            throw std::invalid_argument("trio: f does not preserve outputs");
    // Homomorphism plus strong onto.
    for (const Atom& a : rho.result.atoms) {
        bool found = false;
        for (const Atom& b : alpha.atoms)
            if (b.src == f.at(a.src) && b.dst == f.at(a.dst) && language_equal(b.lang, a.lang)) {
                found = true;
                break;
            }
        if (!found) throw std::invalid_argument("trio: f is not a homomorphism");
    }
    for (const Atom& b : alpha.atoms) {
        bool hit = false;
        for (const Atom& a : rho.result.atoms)
            if (b.src == f.at(a.src) && b.dst == f.at(a.dst) && language_equal(b.lang, a.lang)) {
                hit = true;
                break;
            }
        if (!hit) throw std::invalid_argument("trio: f is not strong onto");
    }
}

std::vector<int> refinement_path_atoms(const Refinement& rho, size_t atom_index) {
    std::vector<int> out;
    int id = 0;
    for (size_t j = 0; j < rho.traces.size(); ++j) {
        const AtomTrace& t = rho.traces[j];
        if (t.equality_collapse) continue;
        if (j == atom_index)
            for (size_t s = 0; s < t.segments.size(); ++s) out.push_back(id + int(s));
        id += int(t.segments.size());
    }
    return out;
}

bool InducedPath::leaves_at(size_t i) const {
    if (i + 1 == seq.size()) return true;
    return seq[i + 1].bag != seq[i].bag;
}

std::optional<size_t> InducedPath::leave_elem(int bag) const {
    for (size_t i = 0; i < seq.size(); ++i)
        if (seq[i].bag == bag && leaves_at(i)) return i;
    return std::nullopt;
}

bool InducedPath::cyclic() const {
    for (size_t i = 0; i + 2 < seq.size() + 0; ++i)
        for (size_t j = i + 2; j < seq.size(); ++j)
            if (seq[i].bag == seq[j].bag) return true;
    return false;
}

namespace {

// Full bag path between two bags in the tree, endpoints included.
std::vector<int> tree_path(const TreeDecomposition& dec, int a, int b) {
    std::vector<int> depth(dec.bags.size(), 0);
    for (int x : dec.bfs_order())
        if (dec.parent[x] >= 0) depth[x] = depth[dec.parent[x]] + 1;
    std::vector<int> up, down;
    int x = a, y = b;
    while (depth[x] > depth[y]) {
        up.push_back(x);
        x = dec.parent[x];
    }
    while (depth[y] > depth[x]) {
        down.push_back(y);
        y = dec.parent[y];
    }
    while (x != y) {
        up.push_back(x);
        down.push_back(y);
        x = dec.parent[x];
        y = dec.parent[y];
    }
    up.push_back(x);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
}

} // namespace

InducedPath induced_path(const Trio& trio, const TaggedTreeDecomposition& ttd,
                         size_t atom_index) {
    InducedPath out;
    const AtomTrace& t = trio.rho.traces[atom_index];
    if (t.equality_collapse) return out;
    const std::vector<Var>& pv = trio.rho.path_vars[atom_index];
    std::vector<int> atoms = refinement_path_atoms(trio.rho, atom_index);

    auto push = [&](int bag, const Var& v, int tidx) {
        if (!out.seq.empty() && out.seq.back().bag == bag && out.seq.back().alpha_var == v) {
            out.seq.back().t_hi = tidx;
            return;
        }
        out.seq.push_back({bag, v, tidx, tidx});
    };

    int prev_bag = -1;
    for (size_t a = 0; a < atoms.size(); ++a) {
        int bag = ttd.tag[atoms[a]];
        if (a > 0 && bag != prev_bag) {
            // Link carrying the shared variable f(t_a).
            std::vector<int> path = tree_path(ttd.dec, prev_bag, bag);
            for (size_t i = 1; i + 1 < path.size(); ++i)
                push(path[i], trio.image(pv[a]), int(a));
        }
        push(bag, trio.image(pv[a]), int(a));
        push(bag, trio.image(pv[a + 1]), int(a + 1));
        prev_bag = bag;
    }
    return out;
}

bool is_locally_acyclic(const Trio& trio, const TaggedTreeDecomposition& ttd) {
    for (size_t j = 0; j < trio.rho.traces.size(); ++j)
        if (induced_path(trio, ttd, j).cyclic()) return false;
    return true;
}

std::vector<std::set<int>> BagProfile::multiset() const {
    std::vector<std::set<int>> out;
    for (const auto& [v, t] : types) out.push_back(t);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

bool bag_is_atomic(const Trio& trio, const TaggedTreeDecomposition& ttd, int bag) {
    int id = 0;
    for (size_t j = 0; j < trio.rho.traces.size(); ++j) {
        const AtomTrace& t = trio.rho.traces[j];
        if (t.equality_collapse) continue;
        for (size_t s = 0; s < t.segments.size(); ++s, ++id) {
            if (ttd.tag[id] != bag) continue;
            const Atom& a = trio.rho.result.atoms[id];
            if (trio.rho.base_vars_in_result.count(a.src) ||
                trio.rho.base_vars_in_result.count(a.dst))
                return true;
        }
    }
    return false;
}

} // namespace

BagProfile profile_of_bag(const Trio& trio, const TaggedTreeDecomposition& ttd, int bag) {
    BagProfile p;
    p.atomic = bag_is_atomic(trio, ttd, bag);
    if (p.atomic) return p;
    for (const Var& z : ttd.dec.bags[bag]) p.types[z];
    for (size_t j = 0; j < trio.rho.traces.size(); ++j) {
        InducedPath path = induced_path(trio, ttd, j);
        auto le = path.leave_elem(bag);
        if (le) p.types[path.seq[*le].alpha_var].insert(int(j));
    }
    return p;
}

size_t count_atomic_bags(const Trio& trio, const TaggedTreeDecomposition& ttd) {
    size_t n = 0;
    for (size_t b = 0; b < ttd.dec.bags.size(); ++b)
        if (bag_is_atomic(trio, ttd, int(b))) ++n;
    return n;
}

namespace {

// Rebuild the trio after replacing traces: fresh rho, f carried over through
// per-atom kept t-indices, alpha recomputed as the image of the new rho.
struct Rebuilt {
    Trio trio;
    // Old rho atom id -> new rho atom id, -1 for dropped segments.
    std::vector<int> atom_remap;
    // Per gamma atom, new atom id of the freshly created condensed segment
    // (-1 when the atom was not condensed).
    std::vector<int> new_segment_atom;
};

Rebuilt rebuild_trio(const Trio& old, std::vector<AtomTrace> new_traces,
                     const std::vector<std::optional<std::pair<size_t, size_t>>>& condensed) {
    Rebuilt out;
    Refinement rho2 = assemble_refinement(old.rho.base, std::move(new_traces));

    // Map f through per-atom positional correspondence of path variables.
    std::map<Var, Var> f2;
    for (size_t j = 0; j < rho2.traces.size(); ++j) {
        const auto& oldpv = old.rho.path_vars[j];
        const auto& newpv = rho2.path_vars[j];
        if (old.rho.traces[j].equality_collapse) {
            f2[newpv.front()] = old.f.at(oldpv.front());
            f2[newpv.back()] = old.f.at(oldpv.back());
            continue;
        }
        if (condensed[j]) {
            auto [a, a2] = *condensed[j];
            size_t drop = a2 - a - 1;
            for (size_t i = 0; i < oldpv.size(); ++i) {
                if (i > a && i < a2) continue;
                size_t ni = i <= a ? i : i - drop;
                f2[newpv[ni]] = old.f.at(oldpv[i]);
            }
        } else {
            for (size_t i = 0; i < oldpv.size(); ++i) f2[newpv[i]] = old.f.at(oldpv[i]);
        }
    }

    // Alpha := image of the new rho under f2; parallel atoms with equal
    // languages merge.
    C2rpq alpha2;
    alpha2.name = old.alpha.name;
    for (const Var& v : rho2.result.vars) alpha2.vars.insert(f2.at(v));
    for (const Var& v : rho2.result.output) alpha2.output.push_back(f2.at(v));
    for (const Atom& a : rho2.result.atoms) {
        Atom img{f2.at(a.src), a.lang, f2.at(a.dst)};
        bool dup = false;
        for (const Atom& b : alpha2.atoms)
            if (b.src == img.src && b.dst == img.dst && language_equal(b.lang, img.lang)) {
                dup = true;
                break;
            }
        if (!dup) alpha2.atoms.push_back(img);
    }

    // Atom id remap.
    int old_id = 0, new_id = 0;
    out.new_segment_atom.assign(old.rho.traces.size(), -1);
    for (size_t j = 0; j < old.rho.traces.size(); ++j) {
        const AtomTrace& ot = old.rho.traces[j];
        if (ot.equality_collapse) continue;
        size_t n = ot.segments.size();
        if (condensed[j]) {
            auto [a, a2] = *condensed[j];
            for (size_t s = 0; s < n; ++s) {
                int nid;
                if (s < a) nid = new_id + int(s);
                else if (s >= a2) nid = new_id + int(s - (a2 - a - 1));
                else nid = -1; // includes s == a..a2-1, replaced by the K segment
                out.atom_remap.push_back(nid);
            }
            out.new_segment_atom[j] = new_id + int(a);
            new_id += int(n - (a2 - a - 1));
        } else {
            for (size_t s = 0; s < n; ++s) out.atom_remap.push_back(new_id + int(s));
            new_id += int(n);
        }
        old_id += int(n);
    }
    (void)old_id;

    out.trio.gamma = old.gamma;
    out.trio.rho = std::move(rho2);
    out.trio.alpha = std::move(alpha2);
    out.trio.f = std::move(f2);
    return out;
}

} // namespace

PassResult make_locally_acyclic(const Trio& trio0, const TaggedTreeDecomposition& ttd0,
                                SublangCache& cache) {
    PassResult cur{trio0, ttd0, 0};
    for (;;) {
        bool changed = false;
        for (size_t j = 0; j < cur.trio.rho.traces.size() && !changed; ++j) {
            InducedPath path = induced_path(cur.trio, cur.ttd, j);
            // First cyclic pair, lexicographic.
            size_t pi = 0, pj = 0;
            bool found = false;
            for (size_t a = 0; a + 2 < path.seq.size() + 0 && !found; ++a)
                for (size_t b = a + 2; b < path.seq.size() && !found; ++b)
                    if (path.seq[a].bag == path.seq[b].bag) {
                        pi = a;
                        pj = b;
                        found = true;
                    }
            if (!found) continue;

            int bag = path.seq[pi].bag;
            size_t lo = size_t(path.seq[pi].t_hi);
            size_t hi = size_t(path.seq[pj].t_lo);
            assert(hi > lo);

            if (hi == lo + 1) {
                // The single segment between them can simply be re-tagged to
                // this bag, which both endpoint images inhabit.
                std::vector<int> atoms = refinement_path_atoms(cur.trio.rho, j);
                cur.ttd.tag[atoms[lo]] = bag;
                cur.ttd = restrict_to_tags(cur.ttd);
                ++cur.steps;
                changed = true;
                break;
            }

            // Condense between t_lo and t_hi; tag the new segment here.
            std::vector<AtomTrace> traces = cur.trio.rho.traces;
            const Atom& gatom = cur.trio.rho.base.atoms[j];
            const AtomTrace& t = traces[j];
            AtomTrace nt;
            nt.trace.assign(t.trace.begin(), t.trace.begin() + lo + 1);
            nt.trace.insert(nt.trace.end(), t.trace.begin() + hi, t.trace.end());
            nt.segments.assign(t.segments.begin(), t.segments.begin() + lo);
            nt.segments.push_back({AtomTrace::Segment::Sublanguage,
                                   cache.get(gatom.lang, t.trace[lo], t.trace[hi]), Letter{}});
            nt.segments.insert(nt.segments.end(), t.segments.begin() + hi, t.segments.end());
            traces[j] = std::move(nt);

            std::vector<std::optional<std::pair<size_t, size_t>>> cond(
                cur.trio.rho.traces.size());
            cond[j] = std::make_pair(lo, hi);
            Rebuilt rb = rebuild_trio(cur.trio, std::move(traces), cond);

            TaggedTreeDecomposition ttd2;
            ttd2.dec = cur.ttd.dec;
            ttd2.tag.assign(rb.trio.rho.result.atoms.size(), -1);
            for (size_t oldid = 0; oldid < rb.atom_remap.size(); ++oldid)
                if (rb.atom_remap[oldid] >= 0) ttd2.tag[rb.atom_remap[oldid]] = cur.ttd.tag[oldid];
            ttd2.tag[rb.new_segment_atom[j]] = bag;
            ttd2.fine = cur.ttd.fine;
            ttd2 = restrict_to_tags(ttd2);

            cur.trio = std::move(rb.trio);
            cur.ttd = std::move(ttd2);
            ++cur.steps;
            changed = true;
        }
        if (!changed) return cur;
    }
}

std::optional<std::pair<size_t, size_t>> pigeonhole_search(const std::vector<int>& tokens,
                                                           size_t d) {
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == kTrapToken || tokens[i] == kAvoidToken) continue;
        for (size_t j = i + d; j < tokens.size(); ++j) {
            if (tokens[j] == kTrapToken) break; // a trap between kills all longer spans
            if (tokens[j] != tokens[i]) continue;
            bool trapped = false;
            for (size_t m = i; m <= j && !trapped; ++m)
                if (tokens[m] == kTrapToken) trapped = true;
            if (!trapped) return std::make_pair(i, j);
        }
        // Also reject spans with a trap before position i+d.
    }
    return std::nullopt;
}

std::vector<std::vector<int>> nonbranching_paths(const TreeDecomposition& dec) {
    auto adj = dec.adjacency();
    size_t n = dec.bags.size();
    std::vector<std::vector<int>> out;
    if (n == 1) {
        out.push_back({0});
        return out;
    }
    auto is_terminal = [&](int b) { return adj[b].size() != 2; };
    std::set<std::pair<int, int>> used; // directed first step
    for (size_t b = 0; b < n; ++b) {
        if (!is_terminal(int(b))) continue;
        for (int nb : adj[b]) {
            if (used.count({int(b), nb})) continue;
            std::vector<int> path{int(b)};
            int prev = int(b), cur = nb;
            for (;;) {
                path.push_back(cur);
                if (is_terminal(cur)) break;
                int nxt = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
                prev = cur;
                cur = nxt;
            }
            used.insert({int(b), nb});
            used.insert({path.back(), path[path.size() - 2]});
            if (path.front() <= path.back()) out.push_back(path);
            else out.push_back({path.rbegin(), path.rend()});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

PassResult shorten_nonbranching(const Trio& trio0, const TaggedTreeDecomposition& ttd0,
                                int k, size_t m0, SublangCache& cache) {
    if (!ttd0.fine || !is_fine(ttd0.dec))
        throw std::invalid_argument("shorten_nonbranching: decomposition must be fine");
    if (!is_locally_acyclic(trio0, ttd0))
        throw std::invalid_argument("shorten_nonbranching: requires local acyclicity");

    PassResult cur{trio0, ttd0, 0};
    size_t d = size_t(2 * k + 1);

    for (;;) {
        // Paths and profiles are rebuilt per iteration.
        std::vector<InducedPath> paths;
        for (size_t j = 0; j < cur.trio.rho.traces.size(); ++j)
            paths.push_back(induced_path(cur.trio, cur.ttd, j));

        auto profile_at = [&](int bag) {
            BagProfile p;
            p.atomic = bag_is_atomic(cur.trio, cur.ttd, bag);
            if (p.atomic) return p;
            for (const Var& z : cur.ttd.dec.bags[bag]) p.types[z];
            for (size_t j = 0; j < paths.size(); ++j) {
                auto le = paths[j].leave_elem(bag);
                if (le) p.types[paths[j].seq[*le].alpha_var].insert(int(j));
            }
            return p;
        };

        bool applied = false;
        for (const auto& chain : nonbranching_paths(cur.ttd.dec)) {
            if (chain.size() < m0) continue;
            // Tokens: trap = atomic, avoid = full, else interned profile id.
            std::vector<BagProfile> profs(chain.size());
            std::vector<int> tokens(chain.size());
            std::vector<std::vector<std::set<int>>> interned;
            for (size_t i = 0; i < chain.size(); ++i) {
                profs[i] = profile_at(chain[i]);
                if (profs[i].atomic) {
                    tokens[i] = kTrapToken;
                } else if (int(cur.ttd.dec.bags[chain[i]].size()) == k + 1) {
                    tokens[i] = kAvoidToken;
                } else {
                    auto ms = profs[i].multiset();
                    int id = -1;
                    for (size_t m = 0; m < interned.size(); ++m)
                        if (interned[m] == ms) id = int(m);
                    if (id < 0) {
                        interned.push_back(ms);
                        id = int(interned.size()) - 1;
                    }
                    tokens[i] = id;
                }
            }
            auto pair = pigeonhole_search(tokens, d);
            if (!pair) continue;
            auto [pi, pj] = *pair;
            int b = chain[pi], b2 = chain[pj];

            // Pair the bag variables by type: nonempty types match uniquely,
            // empty-type variables pair lexicographically.
            std::vector<std::pair<Var, Var>> var_pairs;
            {
                std::map<std::set<int>, std::vector<Var>> left, right;
                for (const auto& [v, t] : profs[pi].types) left[t].push_back(v);
                for (const auto& [v, t] : profs[pj].types) right[t].push_back(v);
                for (auto& [t, vs] : left) {
                    auto& ws = right[t];
                    if (vs.size() != ws.size())
                        throw std::logic_error("shorten: profile multiset mismatch");
                    std::sort(vs.begin(), vs.end());
                    std::sort(ws.begin(), ws.end());
                    for (size_t i = 0; i < vs.size(); ++i) var_pairs.push_back({vs[i], ws[i]});
                }
            }

            // Condense every crossing atom refinement between its leave
            // indices at b and b2.
            std::vector<AtomTrace> traces = cur.trio.rho.traces;
            std::vector<std::optional<std::pair<size_t, size_t>>> cond(traces.size());
            struct DirectSeg {
                size_t gamma_atom;
                size_t seg_index;
            };
            std::vector<DirectSeg> direct; // hi == lo+1 crossings, re-tagged only
            for (size_t j = 0; j < paths.size(); ++j) {
                auto leb = paths[j].leave_elem(b);
                auto leb2 = paths[j].leave_elem(b2);
                if (!leb || !leb2) continue;
                size_t lo = size_t(paths[j].seq[*leb].t_hi);
                size_t hi = size_t(paths[j].seq[*leb2].t_hi);
                if (lo > hi) std::swap(lo, hi);
                if (hi == lo) continue; // rides a shared variable across
                if (hi == lo + 1) {
                    direct.push_back({j, lo});
                    continue;
                }
                const Atom& gatom = cur.trio.rho.base.atoms[j];
                const AtomTrace& t = traces[j];
                AtomTrace nt;
                nt.trace.assign(t.trace.begin(), t.trace.begin() + lo + 1);
                nt.trace.insert(nt.trace.end(), t.trace.begin() + hi, t.trace.end());
                nt.segments.assign(t.segments.begin(), t.segments.begin() + lo);
                nt.segments.push_back({AtomTrace::Segment::Sublanguage,
                                       cache.get(gatom.lang, t.trace[lo], t.trace[hi]),
                                       Letter{}});
                nt.segments.insert(nt.segments.end(), t.segments.begin() + hi, t.segments.end());
                traces[j] = std::move(nt);
                cond[j] = std::make_pair(lo, hi);
            }

            Rebuilt rb = rebuild_trio(cur.trio, std::move(traces), cond);

            // Splice: drop the chain interior, build the replacement bags.
            const TreeDecomposition& dec = cur.ttd.dec;
            std::set<int> dropped(chain.begin() + pi + 1, chain.begin() + pj);

            // Replacement bag contents, one add/remove step per pair.
            std::vector<std::set<Var>> steps;
            std::set<Var> curset = dec.bags[b];
            std::map<std::pair<Var, Var>, int> pair_step; // -> index into steps, -1 = bag b
            for (const auto& [u, v] : var_pairs) {
                if (u == v) {
                    pair_step[{u, v}] = -1;
                    continue;
                }
                if (!curset.count(v)) {
                    curset.insert(v);
                    steps.push_back(curset);
                }
                pair_step[{u, v}] = int(steps.size()) - 1;
                curset.erase(u);
                steps.push_back(curset);
            }
            if (curset != dec.bags[b2])
                throw std::logic_error("shorten: splice does not reach the far bag");
            bool merge_far = false;
            if (!steps.empty() && steps.back() == dec.bags[b2]) steps.pop_back();
            if (steps.empty() && dec.bags[b] == dec.bags[b2]) merge_far = true;

            // New bag table: keep everything but the interior; append steps.
            size_t oldn = dec.bags.size();
            std::vector<int> remap(oldn, -1);
            std::vector<std::set<Var>> bags2;
            for (size_t i = 0; i < oldn; ++i) {
                if (dropped.count(int(i))) continue;
                if (merge_far && int(i) == b2) continue;
                remap[i] = int(bags2.size());
                bags2.push_back(dec.bags[i]);
            }
            std::vector<int> step_ids;
            for (auto& s : steps) {
                step_ids.push_back(int(bags2.size()));
                bags2.push_back(s);
            }

            // Undirected edges of the new tree.
            std::set<std::pair<int, int>> edges;
            auto add_edge = [&](int x, int y) {
                if (x > y) std::swap(x, y);
                if (x != y) edges.insert({x, y});
            };
            for (size_t i = 0; i < oldn; ++i) {
                int p = dec.parent[i];
                if (p < 0) continue;
                int a1 = remap[i] >= 0 ? remap[i] : -1;
                int a2 = remap[p] >= 0 ? remap[p] : -1;
                // Edges incident to dropped interior bags vanish; edges to a
                // merged far bag reattach to b.
                int x = a1, y = a2;
                if (merge_far) {
                    if (int(i) == b2) x = remap[b];
                    if (p == b2) y = remap[b];
                }
                if (x < 0 || y < 0) continue;
                add_edge(x, y);
            }
            // Chain edges b - steps... - b2.
            int prev = remap[b];
            for (int sid : step_ids) {
                add_edge(prev, sid);
                prev = sid;
            }
            if (!merge_far) add_edge(prev, remap[b2]);

            // Rebuild rooted structure from the lowest id.
            TreeDecomposition dec2;
            dec2.kind = dec.kind;
            dec2.bags = bags2;
            dec2.parent.assign(bags2.size(), -1);
            {
                std::vector<std::vector<int>> adj(bags2.size());
                for (auto [x, y] : edges) {
                    adj[x].push_back(y);
                    adj[y].push_back(x);
                }
                std::vector<char> seen(bags2.size(), 0);
                std::function<void(int)> dfs = [&](int x) {
                    seen[x] = 1;
                    for (int y : adj[x])
                        if (!seen[y]) {
                            dec2.parent[y] = x;
                            dfs(y);
                        }
                };
                dfs(0);
                for (size_t i = 0; i < bags2.size(); ++i)
                    if (!seen[i]) throw std::logic_error("shorten: splice disconnected the tree");
            }

            // Tags: carry over surviving atoms, re-tag direct segments and
            // tag the new condensed segments at their pair's step bag.
            TaggedTreeDecomposition ttd2;
            ttd2.dec = std::move(dec2);
            ttd2.tag.assign(rb.trio.rho.result.atoms.size(), -1);
            auto bag_after = [&](int oldbag) {
                int nb = oldbag;
                if (merge_far && oldbag == b2) nb = b;
                return remap[nb];
            };
            for (size_t oldid = 0; oldid < rb.atom_remap.size(); ++oldid) {
                int nid = rb.atom_remap[oldid];
                if (nid < 0) continue;
                int ob = cur.ttd.tag[oldid];
                if (dropped.count(ob))
                    throw std::logic_error("shorten: surviving atom tagged in dropped region");
                ttd2.tag[nid] = bag_after(ob);
            }
            auto step_bag_for = [&](const Var& u, const Var& v) {
                auto it = pair_step.find({u, v});
                if (it == pair_step.end()) throw std::logic_error("shorten: unpaired atom");
                return it->second < 0 ? remap[b] : step_ids[it->second];
            };
            for (size_t j = 0; j < cond.size(); ++j) {
                if (!cond[j]) continue;
                const Atom& na = rb.trio.rho.result.atoms[rb.new_segment_atom[j]];
                Var u = rb.trio.f.at(na.src), v = rb.trio.f.at(na.dst);
                // Orient to (in beta(b), in beta(b2)).
                int sb;
                if (pair_step.count({u, v})) sb = step_bag_for(u, v);
                else sb = step_bag_for(v, u);
                ttd2.tag[rb.new_segment_atom[j]] = sb;
            }
            // Direct crossing segments: their atoms survived (not condensed);
            // re-tag them onto the chain.
            for (const DirectSeg& ds : direct) {
                std::vector<int> old_atoms = refinement_path_atoms(cur.trio.rho, ds.gamma_atom);
                int oldid = old_atoms[ds.seg_index];
                int nid = rb.atom_remap[oldid];
                const Atom& na = rb.trio.rho.result.atoms[nid];
                Var u = rb.trio.f.at(na.src), v = rb.trio.f.at(na.dst);
                int sb;
                if (pair_step.count({u, v})) sb = step_bag_for(u, v);
                else sb = step_bag_for(v, u);
                ttd2.tag[nid] = sb;
            }
            for (int t : ttd2.tag)
                if (t < 0) throw std::logic_error("shorten: untagged atom after splice");

            ttd2.fine = is_fine(ttd2.dec);
            ttd2 = restrict_to_tags(ttd2);
            cur.trio = std::move(rb.trio);
            cur.ttd = std::move(ttd2);
            ++cur.steps;
            applied = true;
            break;
        }
        if (!applied) return cur;
    }
}

} // namespace crpq
