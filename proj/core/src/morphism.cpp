#include "crpq/morphism.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace crpq {

int LanguageClasser::classify(const NfaPtr& l) {
    auto it = by_ptr_.find(l.get());
    if (it != by_ptr_.end()) return it->second;
    for (size_t i = 0; i < reps_.size(); ++i)
        if (language_equal(reps_[i], l)) {
            by_ptr_.emplace(l.get(), int(i));
            return int(i);
        }
    reps_.push_back(l);
    by_ptr_.emplace(l.get(), int(reps_.size()) - 1);
    return int(reps_.size()) - 1;
}

namespace {

struct IndexedQuery {
    std::vector<Var> vars;
    std::map<Var, int> var_index;
    struct E { int src, dst, lang; };
    std::vector<E> atoms;
    std::vector<int> output; // indices
    // adjacency: per var, atoms touching it
    std::vector<std::vector<int>> touching;

    IndexedQuery(const C2rpq& q, LanguageClasser& cls) {
        vars.assign(q.vars.begin(), q.vars.end());
        for (size_t i = 0; i < vars.size(); ++i) var_index[vars[i]] = int(i);
        touching.resize(vars.size());
        for (const Atom& a : q.atoms) {
            E e{var_index.at(a.src), var_index.at(a.dst), cls.classify(a.lang)};
            touching[e.src].push_back(int(atoms.size()));
            if (e.dst != e.src) touching[e.dst].push_back(int(atoms.size()));
            atoms.push_back(e);
        }
        for (const Var& v : q.output) output.push_back(var_index.at(v));
    }
};

bool atom_in(const IndexedQuery& q, int src, int lang, int dst) {
    for (const auto& e : q.atoms)
        if (e.src == src && e.dst == dst && e.lang == lang) return true;
    return false;
}

} // namespace

std::vector<Homomorphism> find_homomorphisms(const C2rpq& src, const C2rpq& dst,
                                             bool want_strong_onto) {
    if (src.output.size() != dst.output.size())
        throw std::invalid_argument("find_homomorphisms: output arity mismatch");
    LanguageClasser cls;
    IndexedQuery S(src, cls), D(dst, cls);

    std::vector<int> f(S.vars.size(), -1);
    // Pin outputs positionally.
    for (size_t i = 0; i < S.output.size(); ++i) {
        int sv = S.output[i], dv = D.output[i];
        if (f[sv] != -1 && f[sv] != dv) return {};
        f[sv] = dv;
    }

    // Assignment order: pinned first, then by descending atom degree.
    std::vector<int> order;
    for (size_t v = 0; v < S.vars.size(); ++v) order.push_back(int(v));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        bool pa = f[a] != -1, pb = f[b] != -1;
        if (pa != pb) return pa > pb;
        return S.touching[a].size() > S.touching[b].size();
    });

    std::vector<Homomorphism> out;
    std::function<void(size_t)> rec = [&](size_t pos) {
        if (pos == order.size()) {
            if (want_strong_onto) {
                for (const auto& de : D.atoms) {
                    bool hit = false;
                    for (const auto& se : S.atoms)
                        if (se.lang == de.lang && f[se.src] == de.src && f[se.dst] == de.dst) {
                            hit = true;
                            break;
                        }
                    if (!hit) return;
                }
            }
            Homomorphism h;
            h.strong_onto = want_strong_onto;
            for (size_t v = 0; v < S.vars.size(); ++v) h.mapping[S.vars[v]] = D.vars[f[v]];
            out.push_back(std::move(h));
            return;
        }
        int v = order[pos];
        auto consistent = [&]() {
            for (int ei : S.touching[v]) {
                const auto& e = S.atoms[ei];
                if (f[e.src] == -1 || f[e.dst] == -1) continue;
                if (!atom_in(D, f[e.src], e.lang, f[e.dst])) return false;
            }
            return true;
        };
        if (f[v] != -1) {
            if (consistent()) rec(pos + 1);
            return;
        }
        for (size_t dv = 0; dv < D.vars.size(); ++dv) {
            f[v] = int(dv);
            if (consistent()) rec(pos + 1);
            f[v] = -1;
        }
    };
    if (S.vars.empty()) {
        // No variables to assign; check strong-onto over an empty map.
        if (!want_strong_onto || D.atoms.empty()) out.push_back({{}, want_strong_onto});
        return out;
    }
    rec(0);
    return out;
}

bool homomorphism_exists(const C2rpq& src, const C2rpq& dst, bool want_strong_onto) {
    // Same search, early exit.
    if (src.output.size() != dst.output.size()) return false;
    LanguageClasser cls;
    IndexedQuery S(src, cls), D(dst, cls);

    std::vector<int> f(S.vars.size(), -1);
    for (size_t i = 0; i < S.output.size(); ++i) {
        int sv = S.output[i], dv = D.output[i];
        if (f[sv] != -1 && f[sv] != dv) return false;
        f[sv] = dv;
    }
    std::vector<int> order;
    for (size_t v = 0; v < S.vars.size(); ++v) order.push_back(int(v));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        bool pa = f[a] != -1, pb = f[b] != -1;
        if (pa != pb) return pa > pb;
        return S.touching[a].size() > S.touching[b].size();
    });

    std::function<bool(size_t)> rec = [&](size_t pos) -> bool {
        if (pos == order.size()) {
            if (want_strong_onto) {
                for (const auto& de : D.atoms) {
                    bool hit = false;
                    for (const auto& se : S.atoms)
                        if (se.lang == de.lang && f[se.src] == de.src && f[se.dst] == de.dst) {
                            hit = true;
                            break;
                        }
                    if (!hit) return false;
                }
            }
            return true;
        }
        int v = order[pos];
        auto consistent = [&]() {
            for (int ei : S.touching[v]) {
                const auto& e = S.atoms[ei];
                if (f[e.src] == -1 || f[e.dst] == -1) continue;
                if (!atom_in(D, f[e.src], e.lang, f[e.dst])) return false;
            }
            return true;
        };
        if (f[v] != -1) return consistent() && rec(pos + 1);
        for (size_t dv = 0; dv < D.vars.size(); ++dv) {
            f[v] = int(dv);
            bool ok = consistent() && rec(pos + 1);
            f[v] = -1;
            if (ok) return true;
        }
        return false;
    };
    if (S.vars.empty()) return !want_strong_onto || D.atoms.empty();
    return rec(0);
}

ImageResult quotient_by_partition(const C2rpq& q, const std::vector<std::vector<Var>>& blocks) {
    ImageResult res;
    for (const auto& block : blocks) {
        Var rep = *std::min_element(block.begin(), block.end());
        for (const Var& v : block) res.quotient[v] = rep;
    }
    for (const Var& v : q.vars)
        if (!res.quotient.count(v)) res.quotient[v] = v;
    auto r = [&](const Var& v) { return res.quotient.at(v); };

    res.image.name = q.name;
    for (const Var& v : q.vars) res.image.vars.insert(r(v));
    for (const Var& v : q.output) res.image.output.push_back(r(v));
    for (const Atom& a : q.atoms) {
        Atom img{r(a.src), a.lang, r(a.dst)};
        bool dup = false;
        for (const Atom& b : res.image.atoms)
            if (b.src == img.src && b.dst == img.dst && language_equal(b.lang, img.lang)) {
                dup = true;
                if (b.lang != img.lang) res.merged_parallel = true;
                break;
            }
        if (!dup) res.image.atoms.push_back(img);
    }
    return res;
}

ImageEnumerator::ImageEnumerator(const C2rpq& q) : base_(q) {
    vars_.assign(q.vars.begin(), q.vars.end());
    rgs_.assign(vars_.size(), 0);
}

std::optional<ImageResult> ImageEnumerator::next() {
    if (done_) return std::nullopt;
    if (vars_.empty()) {
        done_ = true;
        ++count_;
        return quotient_by_partition(base_, {});
    }
    // Current partition from the restricted growth string.
    int maxb = 0;
    for (int b : rgs_) maxb = std::max(maxb, b);
    std::vector<std::vector<Var>> blocks(maxb + 1);
    for (size_t i = 0; i < vars_.size(); ++i) blocks[rgs_[i]].push_back(vars_[i]);
    ImageResult res = quotient_by_partition(base_, blocks);
    ++count_;

    // Advance: next restricted growth string in lexicographic order.
    int n = int(vars_.size());
    int i = n - 1;
    for (; i >= 1; --i) {
        int prefix_max = 0;
        for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs_[j]);
        if (rgs_[i] <= prefix_max) {
            ++rgs_[i];
            for (int j = i + 1; j < n; ++j) rgs_[j] = 0;
            break;
        }
    }
    if (i < 1) done_ = true;
    return res;
}

std::vector<C2rpq> homomorphic_images(const C2rpq& q) {
    if (!q.equalities.empty())
        throw std::invalid_argument("homomorphic_images: query must be equality-free");
    ImageEnumerator en(q);
    std::vector<C2rpq> out;
    while (auto r = en.next()) {
        bool dup = false;
        for (const C2rpq& seen : out)
            if (is_isomorphic(seen, r->image)) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(r->image);
    }
    return out;
}

C2rpq cq_core(const C2rpq& cq) {
    if (!cq.is_cq()) throw std::invalid_argument("cq_core: input is not a CQ");
    C2rpq cur = cq;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t j = 0; j < cur.atoms.size(); ++j) {
            C2rpq cand = cur;
            cand.atoms.erase(cand.atoms.begin() + j);
            std::set<Var> keep(cand.output.begin(), cand.output.end());
            for (const Atom& a : cand.atoms) {
                keep.insert(a.src);
                keep.insert(a.dst);
            }
            cand.vars = keep;
            if (homomorphism_exists(cur, cand)) {
                cur = std::move(cand);
                changed = true;
                break;
            }
        }
    }
    return cur;
}

bool is_isomorphic(const C2rpq& a, const C2rpq& b) {
    if (a.vars.size() != b.vars.size() || a.atoms.size() != b.atoms.size() ||
        a.output.size() != b.output.size())
        return false;
    LanguageClasser cls;
    IndexedQuery A(a, cls), B(b, cls);

    // Quick invariants: multisets of (lang class, is_selfloop) and degrees.
    auto profile = [](const IndexedQuery& q) {
        std::multiset<std::pair<int, bool>> langs;
        std::multiset<size_t> degs;
        for (const auto& e : q.atoms) langs.insert({e.lang, e.src == e.dst});
        for (const auto& t : q.touching) degs.insert(t.size());
        return std::make_pair(langs, degs);
    };
    if (profile(A) != profile(B)) return false;

    std::vector<int> f(A.vars.size(), -1), used(B.vars.size(), 0);
    for (size_t i = 0; i < A.output.size(); ++i) {
        int sv = A.output[i], dv = B.output[i];
        if (f[sv] != -1 && f[sv] != dv) return false;
        if (f[sv] == -1) {
            if (used[dv]) return false;
            f[sv] = dv;
            used[dv] = 1;
        }
    }

    std::function<bool(size_t)> rec = [&](size_t v) -> bool {
        if (v == A.vars.size()) {
            // Atom multiset bijection.
            std::multiset<std::tuple<int, int, int>> ma, mb;
            for (const auto& e : A.atoms) ma.insert({f[e.src], e.lang, f[e.dst]});
            for (const auto& e : B.atoms) mb.insert({e.src, e.lang, e.dst});
            return ma == mb;
        }
        if (f[v] != -1) return rec(v + 1);
        for (size_t dv = 0; dv < B.vars.size(); ++dv) {
            if (used[dv]) continue;
            if (A.touching[v].size() != B.touching[dv].size()) continue;
            f[v] = int(dv);
            used[dv] = 1;
            if (rec(v + 1)) return true;
            f[v] = -1;
            used[dv] = 0;
        }
        return false;
    };
    return rec(0);
}

std::string iso_signature(const C2rpq& q, LanguageClasser& cls) {
    IndexedQuery I(q, cls);
    std::multiset<std::string> atom_sigs;
    for (const auto& e : I.atoms) {
        std::ostringstream os;
        os << e.lang << ":" << I.touching[e.src].size() << ">" << I.touching[e.dst].size()
           << (e.src == e.dst ? ":loop" : "");
        atom_sigs.insert(os.str());
    }
    std::ostringstream os;
    os << q.vars.size() << "|" << q.output.size() << "|";
    for (const auto& s : atom_sigs) os << s << ";";
    return os.str();
}

} // namespace crpq
