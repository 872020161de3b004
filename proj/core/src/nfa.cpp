#include "crpq/nfa.hpp"

#include <algorithm>
#include <mutex>
#include <queue>
#include <sstream>

#include "eps_nfa.hpp"

namespace crpq {

std::string word_str(const Word& w) {
    if (w.empty()) return "<eps>";
    std::string s;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) s += ".";
        s += w[i].str();
    }
    return s;
}

Word word_inverse(const Word& w) {
    Word r(w.rbegin(), w.rend());
    for (auto& l : r) l = l.inverse();
    return r;
}

Nfa::Nfa(int num_states,
         std::vector<Transition> transitions,
         std::set<State> initial,
         std::set<State> final_states)
    : num_states_(num_states),
      transitions_(std::move(transitions)),
      initial_(std::move(initial)),
      final_(std::move(final_states)) {
    auto check = [&](State s) {
        if (s < 0 || s >= num_states_)
            throw std::invalid_argument("NFA references unknown state " + std::to_string(s));
    };
    for (State s : initial_) check(s);
    for (State s : final_) check(s);
    std::sort(transitions_.begin(), transitions_.end());
    transitions_.erase(std::unique(transitions_.begin(), transitions_.end()), transitions_.end());
    out_.resize(num_states_);
    for (const auto& t : transitions_) {
        check(t.src);
        check(t.dst);
        alphabet_.insert(t.letter);
        out_[t.src].emplace_back(t.letter, t.dst);
    }
}

bool Nfa::accepts(const Word& w) const {
    std::set<State> cur = run(initial_, w);
    for (State s : cur)
        if (final_.count(s)) return true;
    return false;
}

std::set<Nfa::State> Nfa::run(const std::set<State>& from, const Word& w) const {
    std::set<State> cur = from;
    for (const Letter& l : w) {
        std::set<State> next;
        for (State s : cur)
            for (const auto& [letter, dst] : out_[s])
                if (letter == l) next.insert(dst);
        cur = std::move(next);
        if (cur.empty()) break;
    }
    return cur;
}

bool Nfa::accepts_epsilon() const {
    for (State s : initial_)
        if (final_.count(s)) return true;
    return false;
}

bool Nfa::is_empty() const {
    std::set<State> seen = initial_;
    std::queue<State> todo;
    for (State s : initial_) todo.push(s);
    while (!todo.empty()) {
        State s = todo.front();
        todo.pop();
        if (final_.count(s)) return false;
        for (const auto& [l, d] : out_[s])
            if (seen.insert(d).second) todo.push(d);
    }
    return true;
}

bool Nfa::has_transition(State src, const Letter& l, State dst) const {
    if (src < 0 || src >= num_states_) return false;
    for (const auto& [letter, d] : out_[src])
        if (letter == l && d == dst) return true;
    return false;
}

bool Nfa::uses_inverted_letters() const {
    for (const Letter& l : alphabet_)
        if (l.inverted) return true;
    return false;
}

std::string Nfa::describe() const {
    if (source_) return *source_;
    if (literal_) return literal_->str();
    std::ostringstream os;
    os << "nfa(" << num_states_ << " states";
    os << ", init {";
    bool first = true;
    for (State s : initial_) { os << (first ? "" : ",") << s; first = false; }
    os << "}, final {";
    first = true;
    for (State s : final_) { os << (first ? "" : ",") << s; first = false; }
    os << "})";
    return os.str();
}

NfaPtr Nfa::single_letter(const Letter& l) {
    static std::mutex mu;
    static std::map<Letter, NfaPtr> interned;
    std::lock_guard<std::mutex> lock(mu);
    auto it = interned.find(l);
    if (it != interned.end()) return it->second;
    auto nfa = std::make_shared<Nfa>(2, std::vector<Nfa::Transition>{{0, l, 1}},
                                     std::set<State>{0}, std::set<State>{1});
    const_cast<Nfa&>(*nfa).literal_ = l;
    const_cast<Nfa&>(*nfa).source_ = l.str();
    interned.emplace(l, nfa);
    return nfa;
}

NfaPtr Nfa::epsilon() {
    static NfaPtr eps = [] {
        auto n = std::make_shared<Nfa>(1, std::vector<Nfa::Transition>{},
                                       std::set<State>{0}, std::set<State>{0});
        const_cast<Nfa&>(*n).source_ = "<eps>";
        return n;
    }();
    return eps;
}

NfaPtr sublanguage(const NfaPtr& nfa, Nfa::State q, Nfa::State q2) {
    if (q < 0 || q >= nfa->num_states() || q2 < 0 || q2 >= nfa->num_states())
        throw std::invalid_argument("sublanguage: unknown state id");
    auto sub = std::make_shared<Nfa>(nfa->num_states(), nfa->transitions(),
                                     std::set<Nfa::State>{q}, std::set<Nfa::State>{q2});
    const_cast<Nfa&>(*sub).source_.reset();
    return sub;
}

NfaPtr inverse_language(const NfaPtr& nfa) {
    std::vector<Nfa::Transition> ts;
    ts.reserve(nfa->transitions().size());
    for (const auto& t : nfa->transitions())
        ts.push_back({t.dst, t.letter.inverse(), t.src});
    auto inv = std::make_shared<Nfa>(nfa->num_states(), std::move(ts),
                                     nfa->final(), nfa->initial());
    return inv;
}

std::vector<std::set<int>> EpsNfa::closures() const {
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : eps) adj[a].push_back(b);
    std::vector<std::set<int>> cl(n);
    for (int s = 0; s < n; ++s) {
        std::queue<int> todo;
        todo.push(s);
        cl[s].insert(s);
        while (!todo.empty()) {
            int u = todo.front();
            todo.pop();
            for (int v : adj[u])
                if (cl[s].insert(v).second) todo.push(v);
        }
    }
    return cl;
}

// Eliminate epsilon transitions, trim unreachable states, then repeatedly
// merge states with identical finality and outgoing rows. The merge keeps
// automata small and single-final where the language allows it.
std::shared_ptr<Nfa> eps_nfa_finish(const EpsNfa& e) {
    auto cl = e.closures();

    std::vector<Nfa::Transition> trans;
    for (int s = 0; s < e.n; ++s)
        for (int r : cl[s])
            for (const auto& t : e.trans)
                if (t.src == r) trans.push_back({s, t.letter, t.dst});

    std::set<int> finals;
    for (int s = 0; s < e.n; ++s)
        for (int r : cl[s])
            if (e.finals.count(r)) { finals.insert(s); break; }

    // Trim to states reachable from the initial state.
    std::vector<std::vector<std::pair<Letter, int>>> out(e.n);
    for (const auto& t : trans) out[t.src].emplace_back(t.letter, t.dst);
    std::set<int> reach{e.initial};
    std::queue<int> todo;
    todo.push(e.initial);
    while (!todo.empty()) {
        int u = todo.front();
        todo.pop();
        for (auto& [l, v] : out[u])
            if (reach.insert(v).second) todo.push(v);
    }

    std::vector<int> remap(e.n, -1);
    int m = 0;
    for (int s = 0; s < e.n; ++s)
        if (reach.count(s)) remap[s] = m++;

    std::vector<Nfa::Transition> ts;
    for (const auto& t : trans)
        if (remap[t.src] >= 0 && remap[t.dst] >= 0)
            ts.push_back({remap[t.src], t.letter, remap[t.dst]});
    std::set<int> fin;
    for (int s : finals)
        if (remap[s] >= 0) fin.insert(remap[s]);
    int init = remap[e.initial];

    // Merge fixpoint.
    for (;;) {
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        std::map<std::pair<bool, std::set<std::pair<Letter, int>>>, std::vector<int>> rows;
        std::vector<std::set<std::pair<Letter, int>>> row(m);
        for (const auto& t : ts) row[t.src].insert({t.letter, t.dst});
        for (int s = 0; s < m; ++s)
            rows[{fin.count(s) > 0, row[s]}].push_back(s);
        std::vector<int> rep(m);
        bool merged = false;
        for (auto& [key, group] : rows) {
            for (int s : group) rep[s] = group.front();
            if (group.size() > 1) merged = true;
        }
        if (!merged) break;
        std::vector<int> re(m, -1);
        int m2 = 0;
        for (int s = 0; s < m; ++s)
            if (rep[s] == s) re[s] = m2++;
        for (auto& t : ts) {
            t.src = re[rep[t.src]];
            t.dst = re[rep[t.dst]];
        }
        std::set<int> fin2;
        for (int s : fin) fin2.insert(re[rep[s]]);
        fin = std::move(fin2);
        init = re[rep[init]];
        m = m2;
    }

    return std::make_shared<Nfa>(m, std::move(ts), std::set<int>{init}, fin);
}

NfaPtr concat_languages(const NfaPtr& a, const NfaPtr& b) {
    EpsNfa e;
    e.n = a->num_states() + b->num_states() + 1;
    int off = a->num_states();
    int start = e.n - 1;
    e.initial = start;
    for (const auto& t : a->transitions()) e.trans.push_back(t);
    for (const auto& t : b->transitions())
        e.trans.push_back({t.src + off, t.letter, t.dst + off});
    for (int s : a->initial()) e.eps.push_back({start, s});
    for (int f : a->final())
        for (int s : b->initial()) e.eps.push_back({f, s + off});
    for (int f : b->final()) e.finals.insert(f + off);
    return eps_nfa_finish(e);
}

std::vector<Word> words_up_to(const std::set<Letter>& alphabet, int max_len) {
    std::vector<Word> result{{}};
    std::vector<Word> frontier{{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Word> next;
        for (const Word& w : frontier)
            for (const Letter& l : alphabet) {
                Word w2 = w;
                w2.push_back(l);
                next.push_back(w2);
            }
        result.insert(result.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return result;
}

std::vector<Word> language_words_up_to(const Nfa& nfa, int max_len) {
    std::vector<Word> result;
    std::set<Word> seen;
    // BFS over (word length, state set); collect words reaching a final state.
    struct Item { Word w; std::set<Nfa::State> states; };
    std::vector<Item> frontier{{{}, nfa.initial()}};
    auto harvest = [&](const Item& it) {
        for (Nfa::State s : it.states)
            if (nfa.final().count(s)) {
                if (seen.insert(it.w).second) result.push_back(it.w);
                break;
            }
    };
    for (auto& it : frontier) harvest(it);
    for (int len = 1; len <= max_len; ++len) {
        std::map<Word, std::set<Nfa::State>> next;
        for (const auto& it : frontier)
            for (Nfa::State s : it.states)
                for (const auto& [l, d] : nfa.out(s)) {
                    Word w2 = it.w;
                    w2.push_back(l);
                    next[w2].insert(d);
                }
        frontier.clear();
        for (auto& [w, states] : next) {
            frontier.push_back({w, states});
            harvest(frontier.back());
        }
    }
    return result;
}

bool language_bounded_by(const Nfa& nfa, int bound) {
    // Layered reachability up to bound + |Q| steps.
    std::set<Nfa::State> layer = nfa.initial();
    for (int len = 1; len <= bound + nfa.num_states(); ++len) {
        std::set<Nfa::State> next;
        for (Nfa::State s : layer)
            for (const auto& [l, d] : nfa.out(s)) next.insert(d);
        layer = std::move(next);
        if (layer.empty()) return true;
        if (len > bound)
            for (Nfa::State s : layer)
                if (nfa.final().count(s)) return false;
    }
    return true;
}

bool language_equal_sampled(const Nfa& a, const Nfa& b, int max_len) {
    std::set<Letter> alpha = a.alphabet();
    alpha.insert(b.alphabet().begin(), b.alphabet().end());
    for (const Word& w : words_up_to(alpha, max_len))
        if (a.accepts(w) != b.accepts(w)) return false;
    return true;
}

bool language_equal(const NfaPtr& a, const NfaPtr& b, int max_len) {
    if (a == b) return true;
    if (a->literal() && b->literal()) return *a->literal() == *b->literal();
    return language_equal_sampled(*a, *b, max_len);
}

} // namespace crpq
