#include "crpq/query.hpp"

#include <algorithm>
#include <sstream>

namespace crpq {

void C2rpq::sync_vars() {
    for (const Var& v : output) vars.insert(v);
    for (const Atom& a : atoms) {
        vars.insert(a.src);
        vars.insert(a.dst);
    }
    for (const auto& [x, y] : equalities) {
        vars.insert(x);
        vars.insert(y);
    }
}

void C2rpq::validate() const {
    for (const Var& v : output)
        if (!vars.count(v)) throw std::invalid_argument("output variable not declared: " + v);
    for (const Atom& a : atoms) {
        if (!vars.count(a.src)) throw std::invalid_argument("atom endpoint not declared: " + a.src);
        if (!vars.count(a.dst)) throw std::invalid_argument("atom endpoint not declared: " + a.dst);
        if (!a.lang) throw std::invalid_argument("atom with null language");
    }
    for (const auto& [x, y] : equalities)
        if (!vars.count(x) || !vars.count(y))
            throw std::invalid_argument("equality endpoint not declared");
}

bool C2rpq::is_cq() const {
    for (const Atom& a : atoms)
        if (!atom_letter(a)) return false;
    return true;
}

bool C2rpq::uses_inverses() const {
    for (const Atom& a : atoms)
        if (a.lang->uses_inverted_letters()) return true;
    return false;
}

void Uc2rpq::validate() const {
    if (disjuncts.empty()) throw std::invalid_argument("union with no disjuncts");
    size_t n = disjuncts.front().output.size();
    for (const C2rpq& d : disjuncts) {
        d.validate();
        if (d.output.size() != n)
            throw std::invalid_argument("union disjuncts with mixed output arity");
    }
}

namespace {

struct UnionFind {
    std::map<Var, Var> parent;
    const Var& find(const Var& v) {
        auto it = parent.find(v);
        if (it == parent.end() || it->second == v) return v;
        const Var& r = find(it->second);
        parent[v] = r;
        return parent[v];
    }
    void unite(const Var& a, const Var& b) {
        Var ra = find(a), rb = find(b);
        if (ra == rb) return;
        // Lexicographically least representative.
        if (rb < ra) std::swap(ra, rb);
        parent[rb] = ra;
        parent.emplace(ra, ra);
    }
};

} // namespace

CollapseResult collapse_equalities(const C2rpq& q) {
    UnionFind uf;
    for (const auto& [x, y] : q.equalities) uf.unite(x, y);
    CollapseResult res;
    for (const Var& v : q.vars) res.renaming[v] = uf.find(v);
    auto r = [&](const Var& v) { return res.renaming.at(v); };

    res.query.name = q.name;
    for (const Var& v : q.vars) res.query.vars.insert(r(v));
    for (const Var& v : q.output) res.query.output.push_back(r(v));
    for (const Atom& a : q.atoms) res.query.atoms.push_back({r(a.src), a.lang, r(a.dst)});
    res.query.validate();
    return res;
}

int Multigraph::index_of(const Var& v) const {
    auto it = std::find(verts.begin(), verts.end(), v);
    return it == verts.end() ? -1 : int(it - verts.begin());
}

Multigraph underlying_multigraph(const C2rpq& q) {
    Multigraph g;
    g.verts.assign(q.vars.begin(), q.vars.end());
    for (const Atom& a : q.atoms)
        g.edges.push_back({g.index_of(a.src), g.index_of(a.dst)});
    return g;
}

namespace {

// One atom language against the two SRE shapes. Uses the regex source when
// present, then confirms by sampling words up to length 3.
bool atom_is_sre(const Nfa& lang) {
    std::vector<Letter> letters;
    for (const Letter& l : lang.alphabet()) {
        if (l.inverted) return false;
        letters.push_back(l);
    }
    // Candidate a*: the unique letter, when epsilon and that letter are in.
    if (lang.accepts_epsilon()) {
        if (letters.size() != 1) return false; // {eps} alone is not an SRE
        const Letter& a = letters.front();
        for (int i = 0; i <= 3; ++i)
            if (!lang.accepts(Word(i, a))) return false;
        // Reject mixtures like eps|b sneaking through the alphabet check.
        for (const Word& w : words_up_to(lang.alphabet(), 3))
            if (lang.accepts(w) != (std::all_of(w.begin(), w.end(), [&](const Letter& l) { return l == a; })))
                return false;
        if (lang.source()) {
            const std::string& s = *lang.source();
            auto star = s.find('*');
            if (star == std::string::npos) return false; // finite language described, not a*
        }
        return true;
    }
    // Candidate a1+...+am: exactly the length-1 words, nothing longer.
    std::set<Word> ones;
    for (const Letter& l : letters)
        if (lang.accepts({l})) ones.insert({l});
    if (ones.empty()) return false;
    for (const Word& w : words_up_to(lang.alphabet(), 3)) {
        bool expect = w.size() == 1 && ones.count(w);
        if (lang.accepts(w) != expect) return false;
    }
    return true;
}

} // namespace

bool is_sre(const C2rpq& q) {
    for (const Atom& a : q.atoms)
        if (!atom_is_sre(*a.lang)) return false;
    return true;
}

bool is_sre(const Uc2rpq& q) {
    for (const C2rpq& d : q.disjuncts)
        if (!is_sre(d)) return false;
    return true;
}

std::optional<Letter> atom_letter(const Atom& a) {
    if (a.lang->literal()) return a.lang->literal();
    // Structural fallback for two-state single-transition automata.
    const Nfa& n = *a.lang;
    if (n.transitions().size() == 1 && n.initial().size() == 1 && n.final().size() == 1) {
        const auto& t = n.transitions().front();
        if (*n.initial().begin() == t.src && *n.final().begin() == t.dst && t.src != t.dst &&
            !n.accepts_epsilon())
            return t.letter;
    }
    return std::nullopt;
}

CanonicalDb canonical_db(const C2rpq& cq) {
    if (!cq.equalities.empty())
        throw std::invalid_argument("canonical_db: query must be equality-free");
    CanonicalDb res;
    for (const Var& v : cq.vars) {
        res.db.add_node(v);
        res.naming[v] = v;
    }
    for (const Atom& a : cq.atoms) {
        auto l = atom_letter(a);
        if (!l) throw std::invalid_argument("canonical_db: atom language is not a single letter");
        if (l->inverted)
            res.db.add_edge(a.dst, l->inverse(), a.src);
        else
            res.db.add_edge(a.src, *l, a.dst);
    }
    return res;
}

std::string describe(const C2rpq& q) {
    std::ostringstream os;
    os << q.name << "(";
    for (size_t i = 0; i < q.output.size(); ++i) os << (i ? "," : "") << q.output[i];
    os << ") := ";
    bool first = true;
    for (const Atom& a : q.atoms) {
        if (!first) os << " , ";
        first = false;
        os << a.src << " -[" << a.lang->describe() << "]-> " << a.dst;
    }
    for (const auto& [x, y] : q.equalities) {
        if (!first) os << " , ";
        first = false;
        os << x << " = " << y;
    }
    return os.str();
}

} // namespace crpq
