#include "crpq/refine.hpp"

#include <algorithm>
#include <cassert>

namespace crpq {

NfaPtr SublangCache::get(const NfaPtr& nfa, Nfa::State q, Nfa::State q2) {
    auto key = std::make_tuple(nfa.get(), int(q), int(q2));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    NfaPtr sub = sublanguage(nfa, q, q2);
    keepalive_.push_back(nfa);
    cache_.emplace(key, sub);
    return sub;
}

void validate_trace(const Atom& atom, const AtomTrace& t, SublangCache& cache) {
    if (t.equality_collapse) {
        if (!atom.lang->accepts_epsilon())
            throw std::invalid_argument("equality collapse on a language without epsilon");
        if (!t.trace.empty() || !t.segments.empty())
            throw std::invalid_argument("equality collapse with a non-empty trace");
        return;
    }
    if (t.trace.size() != t.segments.size() + 1 || t.segments.empty())
        throw std::invalid_argument("trace/segment length mismatch");
    if (!atom.lang->initial().count(t.trace.front()))
        throw std::invalid_argument("trace does not start in an initial state");
    if (!atom.lang->final().count(t.trace.back()))
        throw std::invalid_argument("trace does not end in a final state");
    for (size_t i = 0; i < t.segments.size(); ++i) {
        const auto& seg = t.segments[i];
        Nfa::State a = t.trace[i], b = t.trace[i + 1];
        if (seg.kind == AtomTrace::Segment::Sublanguage) {
            NfaPtr expect = cache.get(atom.lang, a, b);
            if (seg.lang != expect && !language_equal(seg.lang, expect))
                throw std::invalid_argument("sublanguage segment does not match A[q,q']");
        } else {
            if (!letter_in_sublanguage(*atom.lang, a, seg.letter, b))
                throw std::invalid_argument("single-letter segment not in A[q,q']");
        }
    }
}

Refinement assemble_refinement(const C2rpq& q, std::vector<AtomTrace> traces) {
    if (!q.equalities.empty())
        throw std::invalid_argument("refinement base must be equality-free");
    if (traces.size() != q.atoms.size())
        throw std::invalid_argument("one trace per atom required");

    C2rpq raw;
    raw.name = q.name;
    raw.vars = q.vars;
    raw.output = q.output;
    std::vector<std::vector<Var>> paths(q.atoms.size());

    for (size_t j = 0; j < q.atoms.size(); ++j) {
        const Atom& atom = q.atoms[j];
        const AtomTrace& t = traces[j];
        if (t.equality_collapse) {
            raw.equalities.push_back({atom.src, atom.dst});
            paths[j] = {atom.src, atom.dst};
            continue;
        }
        std::vector<Var> pv;
        pv.push_back(atom.src);
        for (size_t i = 1; i < t.trace.size() - 1; ++i) {
            Var mid = std::to_string(j) + "#" + std::to_string(i);
            raw.vars.insert(mid);
            pv.push_back(mid);
        }
        pv.push_back(atom.dst);
        for (size_t i = 0; i < t.segments.size(); ++i)
            raw.atoms.push_back({pv[i], t.segments[i].lang, pv[i + 1]});
        paths[j] = std::move(pv);
    }
    raw.sync_vars();

    CollapseResult col = collapse_equalities(raw);
    Refinement ref;
    ref.base = q;
    ref.traces = std::move(traces);
    ref.result = std::move(col.query);
    ref.path_vars.resize(paths.size());
    for (size_t j = 0; j < paths.size(); ++j)
        for (const Var& v : paths[j]) ref.path_vars[j].push_back(col.renaming.at(v));
    for (const Var& v : q.vars) ref.base_vars_in_result.insert(col.renaming.at(v));
    return ref;
}

std::vector<AtomTrace> enumerate_atom_refinements(const Atom& atom, int m, SublangCache& cache) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    std::vector<AtomTrace> out;
    if (atom.lang->accepts_epsilon()) out.push_back({true, {}, {}});

    const Nfa& A = *atom.lang;
    std::vector<Letter> letters(A.alphabet().begin(), A.alphabet().end());

    for (int n = 1; n <= m; ++n) {
        // State sequences q0..qn, q0 initial, qn final, lexicographic.
        std::vector<Nfa::State> seq(n + 1);
        std::function<void(int)> rec = [&](int pos) {
            if (pos == n + 1) {
                if (!A.final().count(seq[n])) return;
                // Per-segment kind choices, Sublanguage before SingleLetter.
                std::vector<std::vector<AtomTrace::Segment>> choices(n);
                for (int i = 0; i < n; ++i) {
                    choices[i].push_back({AtomTrace::Segment::Sublanguage,
                                          cache.get(atom.lang, seq[i], seq[i + 1]),
                                          Letter{}});
                    for (const Letter& l : letters)
                        if (letter_in_sublanguage(A, seq[i], l, seq[i + 1]))
                            choices[i].push_back({AtomTrace::Segment::SingleLetter,
                                                  Nfa::single_letter(l), l});
                }
                std::vector<size_t> pick(n, 0);
                for (;;) {
                    AtomTrace t;
                    t.trace = seq;
                    for (int i = 0; i < n; ++i) t.segments.push_back(choices[i][pick[i]]);
                    out.push_back(std::move(t));
                    int i = n - 1;
                    while (i >= 0 && ++pick[i] == choices[i].size()) pick[i--] = 0;
                    if (i < 0) break;
                }
                return;
            }
            if (pos == 0) {
                for (Nfa::State s : A.initial()) {
                    seq[0] = s;
                    rec(1);
                }
                return;
            }
            for (Nfa::State s = 0; s < A.num_states(); ++s) {
                seq[pos] = s;
                rec(pos + 1);
            }
        };
        rec(0);
    }
    return out;
}

RefinementEnumerator::RefinementEnumerator(const C2rpq& q, int m, SublangCache& cache)
    : base_(q) {
    if (!q.equalities.empty())
        throw std::invalid_argument("refinement base must be equality-free");
    for (const Atom& a : q.atoms)
        per_atom_.push_back(enumerate_atom_refinements(a, m, cache));
    by_len_.resize(per_atom_.size());
    size_t min_total = 0;
    for (size_t j = 0; j < per_atom_.size(); ++j) {
        if (per_atom_[j].empty()) {
            done_ = true;
            return;
        }
        size_t i = 0;
        while (i < per_atom_[j].size()) {
            size_t len = per_atom_[j][i].segments.size();
            size_t k = i;
            while (k < per_atom_[j].size() && per_atom_[j][k].segments.size() == len) ++k;
            by_len_[j][len] = {i, k};
            i = k;
        }
        min_total += by_len_[j].begin()->first;
        max_total_ += by_len_[j].rbegin()->first;
    }
    total_len_ = min_total;
    build_total(total_len_);
}

void RefinementEnumerator::build_total(size_t t) {
    current_.clear();
    pos_ = 0;
    std::vector<size_t> lens(per_atom_.size());
    std::function<void(size_t, size_t)> rec = [&](size_t atom, size_t remaining) {
        if (atom == per_atom_.size()) {
            if (remaining == 0) {
                // Expand length choices into index tuples, odometer over the
                // per-atom ranges, last atom fastest.
                std::vector<std::pair<size_t, size_t>> ranges;
                for (size_t j = 0; j < lens.size(); ++j) ranges.push_back(by_len_[j].at(lens[j]));
                std::vector<size_t> idx;
                for (auto& r : ranges) idx.push_back(r.first);
                for (;;) {
                    current_.push_back(idx);
                    size_t j = idx.size();
                    while (j > 0 && ++idx[j - 1] == ranges[j - 1].second)
                        idx[--j] = ranges[j - 1].first;
                    if (j == 0) break;
                }
            }
            return;
        }
        size_t rest_min = 0;
        for (size_t j = atom + 1; j < per_atom_.size(); ++j) rest_min += by_len_[j].begin()->first;
        for (const auto& [len, range] : by_len_[atom]) {
            if (len > remaining || remaining - len < rest_min) continue;
            lens[atom] = len;
            rec(atom + 1, remaining - len);
        }
    };
    if (per_atom_.empty()) {
        if (t == 0) current_.push_back({});
        return;
    }
    rec(0, t);
}

size_t RefinementEnumerator::total() const {
    size_t t = 1;
    for (const auto& v : per_atom_) {
        if (v.empty()) return 0;
        if (t > SIZE_MAX / v.size()) return SIZE_MAX;
        t *= v.size();
    }
    return t;
}

std::optional<Refinement> RefinementEnumerator::next() {
    for (;;) {
        if (done_) return std::nullopt;
        if (pos_ < current_.size()) {
            const auto& idx = current_[pos_++];
            std::vector<AtomTrace> traces;
            traces.reserve(per_atom_.size());
            for (size_t j = 0; j < per_atom_.size(); ++j) traces.push_back(per_atom_[j][idx[j]]);
            return assemble_refinement(base_, std::move(traces));
        }
        if (total_len_ >= max_total_) {
            done_ = true;
            return std::nullopt;
        }
        ++total_len_;
        build_total(total_len_);
    }
}

Refinement condense(const Refinement& ref, size_t atom_index, size_t i, size_t j,
                    SublangCache& cache) {
    if (atom_index >= ref.traces.size())
        throw std::out_of_range("condense: atom index out of range");
    const AtomTrace& t = ref.traces[atom_index];
    if (t.equality_collapse)
        throw std::invalid_argument("condense: trace has no segments");
    size_t n = t.segments.size();
    if (i > n || j > n) throw std::out_of_range("condense: index out of range");
    if (j <= i + 1) throw std::invalid_argument("condense: requires j > i+1");

    const Atom& atom = ref.base.atoms[atom_index];
    AtomTrace nt;
    nt.trace.assign(t.trace.begin(), t.trace.begin() + i + 1);
    nt.trace.insert(nt.trace.end(), t.trace.begin() + j, t.trace.end());
    nt.segments.assign(t.segments.begin(), t.segments.begin() + i);
    nt.segments.push_back({AtomTrace::Segment::Sublanguage,
                           cache.get(atom.lang, t.trace[i], t.trace[j]), Letter{}});
    nt.segments.insert(nt.segments.end(), t.segments.begin() + j, t.segments.end());

    std::vector<AtomTrace> traces = ref.traces;
    traces[atom_index] = std::move(nt);
    return assemble_refinement(ref.base, std::move(traces));
}

ExpansionEnumerator::ExpansionEnumerator(const C2rpq& q, int max_len) : base_(q) {
    if (!q.equalities.empty())
        throw std::invalid_argument("expansion base must be equality-free");
    if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
    max_total_ = 0;
    for (const Atom& a : q.atoms) {
        per_atom_.push_back(language_words_up_to(*a.lang, max_len));
        max_total_ += max_len;
    }
    combos_.resize(max_total_ + 1);
    build_total(0);
}

void ExpansionEnumerator::build_total(size_t t) {
    // All per-atom word index tuples whose lengths sum to t.
    std::vector<std::vector<size_t>>& out = combos_[t];
    std::vector<size_t> pick(per_atom_.size(), 0);
    std::function<void(size_t, size_t)> rec = [&](size_t atom, size_t remaining) {
        if (atom == per_atom_.size()) {
            if (remaining == 0) out.push_back(pick);
            return;
        }
        for (size_t w = 0; w < per_atom_[atom].size(); ++w) {
            size_t len = per_atom_[atom][w].size();
            if (len > remaining) break; // words sorted by length
            pick[atom] = w;
            rec(atom + 1, remaining - len);
        }
    };
    rec(0, t);
}

size_t ExpansionEnumerator::total() const {
    size_t t = 1;
    for (const auto& v : per_atom_) {
        if (v.empty()) return 0;
        if (t > SIZE_MAX / v.size()) return SIZE_MAX;
        t *= v.size();
    }
    return t;
}

std::optional<C2rpq> ExpansionEnumerator::next() {
    for (;;) {
        if (total_len_ > size_t(max_total_)) return std::nullopt;
        for (const auto& v : per_atom_)
            if (v.empty()) return std::nullopt;
        if (pos_ < combos_[total_len_].size()) {
            const auto& pick = combos_[total_len_][pos_++];
            std::vector<Word> words;
            for (size_t j = 0; j < pick.size(); ++j) words.push_back(per_atom_[j][pick[j]]);
            return expansion_from_words(base_, words);
        }
        ++total_len_;
        pos_ = 0;
        if (total_len_ <= size_t(max_total_)) build_total(total_len_);
    }
}

std::vector<C2rpq> enumerate_expansions(const C2rpq& q, int max_len, size_t cap) {
    ExpansionEnumerator en(q, max_len);
    std::vector<C2rpq> out;
    while (out.size() < cap) {
        auto e = en.next();
        if (!e) break;
        out.push_back(std::move(*e));
    }
    return out;
}

C2rpq expansion_from_words(const C2rpq& q, const std::vector<Word>& words) {
    std::vector<AtomTrace> traces;
    for (size_t j = 0; j < q.atoms.size(); ++j) {
        const Word& w = words[j];
        AtomTrace t;
        if (w.empty()) {
            t.equality_collapse = true;
        } else {
            // A dummy but consistent state trace: follow one accepting run.
            const Nfa& A = *q.atoms[j].lang;
            std::vector<Nfa::State> run;
            std::function<bool(std::set<Nfa::State>, size_t, std::vector<Nfa::State>&)> find =
                [&](std::set<Nfa::State> cur, size_t pos, std::vector<Nfa::State>& acc) -> bool {
                if (pos == w.size()) {
                    for (Nfa::State s : cur)
                        if (A.final().count(s)) { acc.push_back(s); return true; }
                    return false;
                }
                for (Nfa::State s : cur)
                    for (const auto& [l, d] : A.out(s))
                        if (l == w[pos]) {
                            acc.push_back(s);
                            if (find({d}, pos + 1, acc)) return true;
                            acc.pop_back();
                        }
                return false;
            };
            std::vector<Nfa::State> acc;
            if (!find(A.initial(), 0, acc))
                throw std::invalid_argument("expansion word not accepted by the atom language");
            t.trace = acc;
            for (const Letter& l : w)
                t.segments.push_back({AtomTrace::Segment::SingleLetter, Nfa::single_letter(l), l});
        }
        traces.push_back(std::move(t));
    }
    Refinement ref = assemble_refinement(q, std::move(traces));
    return ref.result;
}

namespace {

struct Incidence {
    size_t atom;
    bool at_src; // the variable sits at the atom's source
};

} // namespace

C2rpq contract(const C2rpq& q, ContractionMode mode) {
    if (!q.equalities.empty())
        throw std::invalid_argument("contract: query must be equality-free");
    C2rpq cur = q;
    std::set<Var> outputs(cur.output.begin(), cur.output.end());
    for (;;) {
        // Incidences per variable; self-loops contribute two slots.
        std::map<Var, std::vector<Incidence>> inc;
        for (const Var& v : cur.vars) inc[v];
        for (size_t j = 0; j < cur.atoms.size(); ++j) {
            inc[cur.atoms[j].src].push_back({j, true});
            inc[cur.atoms[j].dst].push_back({j, false});
        }
        Var chosen;
        bool found = false;
        for (const auto& [v, slots] : inc) {
            if (outputs.count(v)) continue;
            if (slots.size() != 2) continue;
            if (slots[0].atom == slots[1].atom) continue; // self-loop or same atom twice
            if (mode == ContractionMode::OneWay) {
                // Exactly one incoming, one outgoing, no inverted letters around.
                bool in1 = !slots[0].at_src, out1 = slots[1].at_src;
                bool in2 = !slots[1].at_src, out2 = slots[0].at_src;
                if (!((in1 && out1) || (in2 && out2))) continue;
            }
            chosen = v;
            found = true;
            break;
        }
        if (!found) return cur;

        auto slots = inc[chosen];
        auto endpoint = [&](const Incidence& s) {
            return s.at_src ? cur.atoms[s.atom].dst : cur.atoms[s.atom].src;
        };
        if (mode == ContractionMode::OneWay) {
            // Forced orientation: the incoming atom first.
            if (slots[0].at_src) std::swap(slots[0], slots[1]);
        } else {
            // Deterministic orientation: start at the smaller endpoint; on
            // ties prefer opening with a forward-traversed segment.
            auto first_is_better = [&](const Incidence& a, const Incidence& b) {
                if (endpoint(a) != endpoint(b)) return endpoint(a) < endpoint(b);
                if (a.at_src != b.at_src) return !a.at_src;
                return a.atom < b.atom;
            };
            if (first_is_better(slots[1], slots[0])) std::swap(slots[0], slots[1]);
        }
        size_t e1 = slots[0].atom, e2 = slots[1].atom;
        const Atom& a1 = cur.atoms[e1];
        const Atom& a2 = cur.atoms[e2];
        // Path u -K1-> chosen -K2-> v; a segment against its atom's direction
        // contributes the inverse language.
        Var u = endpoint(slots[0]);
        NfaPtr k1 = slots[0].at_src ? inverse_language(a1.lang) : a1.lang;
        Var v = endpoint(slots[1]);
        NfaPtr k2 = slots[1].at_src ? a2.lang : inverse_language(a2.lang);
        NfaPtr k = concat_languages(k1, k2);

        C2rpq next;
        next.name = cur.name;
        next.output = cur.output;
        for (size_t j = 0; j < cur.atoms.size(); ++j)
            if (j != e1 && j != e2) next.atoms.push_back(cur.atoms[j]);
        next.atoms.push_back({u, k, v});
        for (const Var& w : cur.vars)
            if (w != chosen) next.vars.insert(w);
        next.sync_vars();
        cur = std::move(next);
    }
}

} // namespace crpq
