#include "crpq/evaluation.hpp"

#include <algorithm>
#include <functional>

namespace crpq {

EvalContext::EvalContext(const GraphDb& db)
    : expanded_(db.expanded() ? db : expand_inverses(db)) {}

const std::set<std::pair<NodeId, NodeId>>& EvalContext::relation(const NfaPtr& lang) {
    auto it = relations_.find(lang.get());
    if (it != relations_.end()) return it->second;
    keepalive_.push_back(lang);
    auto rel = regular_path_pairs(*lang, expanded_);
    max_relation_rows = std::max(max_relation_rows, rel.size());
    return relations_.emplace(lang.get(), std::move(rel)).first->second;
}

namespace {

ResultSet evaluate_naive_one(const C2rpq& q0, EvalContext& ctx, const GraphDb& db) {
    CollapseResult col = collapse_equalities(q0);
    const C2rpq& q = col.query;

    std::vector<Var> vars(q.vars.begin(), q.vars.end());
    std::vector<NodeId> nodes(db.nodes.begin(), db.nodes.end());
    ResultSet out;
    if (vars.empty()) {
        // Boolean query with no variables: satisfied (atoms need variables).
        out.tuples.insert(std::vector<NodeId>(q.output.size()));
        return out;
    }
    if (nodes.empty()) return out;

    // Atoms grouped by the position (in `vars`) at which both ends are bound.
    std::map<Var, int> vidx;
    for (size_t i = 0; i < vars.size(); ++i) vidx[vars[i]] = int(i);
    std::vector<std::vector<const Atom*>> check_at(vars.size());
    for (const Atom& a : q.atoms) {
        int at = std::max(vidx.at(a.src), vidx.at(a.dst));
        check_at[at].push_back(&a);
    }

    std::map<Var, NodeId> assign;
    std::function<void(size_t)> rec = [&](size_t i) {
        if (q.output.empty() && !out.tuples.empty()) return;
        if (i == vars.size()) {
            std::vector<NodeId> tuple;
            for (const Var& v : q.output) tuple.push_back(assign.at(v));
            out.tuples.insert(std::move(tuple));
            return;
        }
        for (const NodeId& n : nodes) {
            assign[vars[i]] = n;
            bool ok = true;
            for (const Atom* a : check_at[i]) {
                const auto& rel = ctx.relation(a->lang);
                if (!rel.count({assign.at(a->src), assign.at(a->dst)})) {
                    ok = false;
                    break;
                }
            }
            if (ok) rec(i + 1);
        }
        assign.erase(vars[i]);
    };
    rec(0);
    return out;
}

} // namespace

ResultSet evaluate_naive(const C2rpq& q, const GraphDb& db) {
    EvalContext ctx(db);
    return evaluate_naive_one(q, ctx, db);
}

ResultSet evaluate_naive(const Uc2rpq& q, const GraphDb& db) {
    q.validate();
    EvalContext ctx(db);
    ResultSet out;
    for (const C2rpq& d : q.disjuncts) {
        ResultSet r = evaluate_naive_one(d, ctx, db);
        out.tuples.insert(r.tuples.begin(), r.tuples.end());
    }
    return out;
}

namespace {

using Tuple = std::vector<NodeId>;

struct BagRelation {
    std::vector<Var> cols;
    std::set<Tuple> rows;
};

// Positions of `vars` common to both relations.
std::vector<std::pair<int, int>> shared_columns(const std::vector<Var>& a,
                                                const std::vector<Var>& b) {
    std::vector<std::pair<int, int>> out;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            if (a[i] == b[j]) out.push_back({int(i), int(j)});
    return out;
}

void semijoin(BagRelation& r, const BagRelation& s) {
    auto shared = shared_columns(r.cols, s.cols);
    if (shared.empty()) {
        if (s.rows.empty()) r.rows.clear();
        return;
    }
    std::set<Tuple> keys;
    for (const Tuple& t : s.rows) {
        Tuple k;
        for (auto [i, j] : shared) k.push_back(t[j]);
        keys.insert(std::move(k));
    }
    for (auto it = r.rows.begin(); it != r.rows.end();) {
        Tuple k;
        for (auto [i, j] : shared) k.push_back((*it)[i]);
        if (!keys.count(k)) it = r.rows.erase(it);
        else ++it;
    }
}

} // namespace

ResultSet evaluate_treewidth(const C2rpq& q0, const GraphDb& db,
                             const TaggedTreeDecomposition& ttd) {
    if (!q0.equalities.empty())
        throw std::invalid_argument("evaluate_treewidth: query must be equality-free");
    const C2rpq& q = q0;

    Multigraph g = underlying_multigraph(q);
    std::string why;
    if (!valid_decomposition(ttd.dec, g, &why))
        throw std::invalid_argument("evaluate_treewidth: invalid decomposition: " + why);
    if (ttd.tag.size() != q.atoms.size())
        throw std::invalid_argument("evaluate_treewidth: tag/atom count mismatch");

    EvalContext ctx(db);
    std::vector<NodeId> nodes(db.nodes.begin(), db.nodes.end());

    if (q.vars.empty()) {
        ResultSet out;
        out.tuples.insert(std::vector<NodeId>(q.output.size()));
        return out;
    }
    if (nodes.empty()) return {};

    size_t k = ttd.dec.width() < 0 ? 0 : size_t(ttd.dec.width());
    double guard = 1;
    for (size_t i = 0; i < k + 1; ++i) guard *= double(nodes.size());

    // Per-bag relations: seed V(G)^|bag| then semi-join each tagged atom's
    // regular path relation. Every materialized relation must respect the
    // |V|^(k+1) bound.
    size_t nbags = ttd.dec.bags.size();
    std::vector<BagRelation> rel(nbags);
    for (size_t b = 0; b < nbags; ++b) {
        for (const Var& v : ttd.dec.bags[b])
            if (q.vars.count(v)) rel[b].cols.push_back(v);
        size_t width = rel[b].cols.size();
        std::vector<size_t> pick(width, 0);
        if (width == 0) {
            rel[b].rows.insert({});
        } else {
            for (;;) {
                Tuple t;
                for (size_t i = 0; i < width; ++i) t.push_back(nodes[pick[i]]);
                rel[b].rows.insert(std::move(t));
                size_t i = width;
                while (i > 0 && ++pick[i - 1] == nodes.size()) pick[--i] = 0;
                if (i == 0) break;
            }
        }
        if (double(rel[b].rows.size()) > guard)
            throw std::runtime_error("evaluate_treewidth: bag relation exceeds |V|^(k+1) guard");
        ctx.max_relation_rows = std::max(ctx.max_relation_rows, rel[b].rows.size());
    }
    for (size_t a = 0; a < q.atoms.size(); ++a) {
        const Atom& at = q.atoms[a];
        int b = ttd.tag[a];
        const auto& pairs = ctx.relation(at.lang);
        int si = -1, di = -1;
        for (size_t i = 0; i < rel[b].cols.size(); ++i) {
            if (rel[b].cols[i] == at.src) si = int(i);
            if (rel[b].cols[i] == at.dst) di = int(i);
        }
        for (auto it = rel[b].rows.begin(); it != rel[b].rows.end();) {
            if (!pairs.count({(*it)[si], (*it)[di]})) it = rel[b].rows.erase(it);
            else ++it;
        }
    }

    // Yannakakis: bottom-up then top-down semi-joins along tree edges.
    std::vector<int> order = ttd.dec.bfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (ttd.dec.parent[*it] >= 0) semijoin(rel[ttd.dec.parent[*it]], rel[*it]);
    for (int b : order)
        if (ttd.dec.parent[b] >= 0) semijoin(rel[b], rel[ttd.dec.parent[b]]);

    // Enumerate output tuples over the reduced relations: depth-first over
    // the tree with a continuation per child list. Reduction makes the walk
    // near backtrack-free; early exit for Boolean queries.
    auto children = ttd.dec.children();
    int root = 0;
    for (size_t b = 0; b < nbags; ++b)
        if (ttd.dec.parent[b] < 0) root = int(b);

    ResultSet out;
    std::map<Var, NodeId> bound;
    bool boolean_done = false;

    std::function<void(int, const std::function<void()>&)> visit =
        [&](int b, const std::function<void()>& done) {
            if (boolean_done) return;
            for (const Tuple& t : rel[b].rows) {
                bool ok = true;
                for (size_t i = 0; i < rel[b].cols.size() && ok; ++i) {
                    auto it = bound.find(rel[b].cols[i]);
                    if (it != bound.end() && it->second != t[i]) ok = false;
                }
                if (!ok) continue;
                std::vector<Var> added;
                for (size_t i = 0; i < rel[b].cols.size(); ++i)
                    if (!bound.count(rel[b].cols[i])) {
                        bound[rel[b].cols[i]] = t[i];
                        added.push_back(rel[b].cols[i]);
                    }
                std::function<void(size_t)> kids = [&](size_t ci) {
                    if (ci == children[b].size()) {
                        done();
                        return;
                    }
                    visit(children[b][ci], [&] { kids(ci + 1); });
                };
                kids(0);
                for (const Var& v : added) bound.erase(v);
                if (boolean_done) return;
            }
        };
    visit(root, [&] {
        Tuple tuple;
        for (const Var& v : q.output) tuple.push_back(bound.at(v));
        out.tuples.insert(std::move(tuple));
        if (q.output.empty()) boolean_done = true;
    });
    return out;
}

ResultSet evaluate_pathwidth(const C2rpq& q0, const GraphDb& db,
                             const TaggedTreeDecomposition& pd) {
    CollapseResult col = collapse_equalities(q0);
    const C2rpq& q = col.query;
    if (!q0.equalities.empty())
        throw std::invalid_argument("evaluate_pathwidth: query must be equality-free");

    Multigraph g = underlying_multigraph(q);
    std::string why;
    if (!valid_decomposition(pd.dec, g, &why))
        throw std::invalid_argument("evaluate_pathwidth: invalid decomposition: " + why);
    if (!pd.dec.is_path())
        throw std::invalid_argument("evaluate_pathwidth: decomposition is not a path");
    if (pd.tag.size() != q.atoms.size())
        throw std::invalid_argument("evaluate_pathwidth: tag/atom count mismatch");

    EvalContext ctx(db);
    std::vector<NodeId> nodes(db.nodes.begin(), db.nodes.end());
    if (q.vars.empty()) {
        ResultSet out;
        out.tuples.insert(std::vector<NodeId>(q.output.size()));
        return out;
    }
    if (nodes.empty()) return {};

    // Bags in path order starting from the root.
    std::vector<int> order = pd.dec.bfs_order();

    // Frontier: assignment restricted to the current bag plus output
    // bindings fixed so far.
    struct State {
        std::map<Var, NodeId> bag_assign;
        std::map<Var, NodeId> out_assign;
        auto operator<=>(const State&) const = default;
    };
    std::set<Var> outputs(q.output.begin(), q.output.end());

    std::set<State> frontier{State{}};
    for (int b : order) {
        std::vector<Var> bag_vars;
        for (const Var& v : pd.dec.bags[b])
            if (q.vars.count(v)) bag_vars.push_back(v);
        std::vector<const Atom*> here;
        for (size_t a = 0; a < q.atoms.size(); ++a)
            if (pd.tag[a] == b) here.push_back(&q.atoms[a]);

        std::set<State> next;
        for (const State& st : frontier) {
            // Restrict to the current bag.
            State base;
            base.out_assign = st.out_assign;
            for (const Var& v : bag_vars) {
                auto it = st.bag_assign.find(v);
                if (it != st.bag_assign.end()) base.bag_assign[v] = it->second;
            }
            // Extend to all bag variables.
            std::vector<Var> free;
            for (const Var& v : bag_vars)
                if (!base.bag_assign.count(v)) free.push_back(v);
            std::vector<size_t> pick(free.size(), 0);
            for (;;) {
                State cand = base;
                bool ok = true;
                for (size_t i = 0; i < free.size(); ++i) {
                    const NodeId& n = nodes[pick[i]];
                    // An output variable seen before must reuse its binding.
                    auto ot = cand.out_assign.find(free[i]);
                    if (ot != cand.out_assign.end() && ot->second != n) {
                        ok = false;
                        break;
                    }
                    cand.bag_assign[free[i]] = n;
                }
                if (ok) {
                    for (const Atom* a : here) {
                        const auto& rel = ctx.relation(a->lang);
                        if (!rel.count({cand.bag_assign.at(a->src), cand.bag_assign.at(a->dst)})) {
                            ok = false;
                            break;
                        }
                    }
                }
                if (ok) {
                    for (const Var& v : bag_vars)
                        if (outputs.count(v)) cand.out_assign[v] = cand.bag_assign.at(v);
                    next.insert(std::move(cand));
                }
                if (free.empty()) break;
                size_t i = free.size();
                while (i > 0 && ++pick[i - 1] == nodes.size()) pick[--i] = 0;
                if (i == 0) break;
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }

    ResultSet out;
    for (const State& st : frontier) {
        bool all = true;
        for (const Var& v : q.output)
            if (!st.out_assign.count(v)) all = false;
        if (!all) continue;
        std::vector<NodeId> tuple;
        for (const Var& v : q.output) tuple.push_back(st.out_assign.at(v));
        out.tuples.insert(std::move(tuple));
    }
    return out;
}

} // namespace crpq
